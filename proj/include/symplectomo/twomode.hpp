// twomode.hpp
// Two-mode marginals (single quadrature "tilde" and joint "vector"),
// symplectic completion of settings, the two-mode kernel and two-mode
// reconstruction. Phase-space ordering is (q1, q2, p1, p2); a setting row
// (mu1, mu2, nu1, nu2) is identified with the complex pair c_j = mu_j + i nu_j.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "symplectomo/core.hpp"
#include "symplectomo/csv.hpp"
#include "symplectomo/fock.hpp"
#include "symplectomo/marginals.hpp"
#include "symplectomo/reconstruct.hpp"
#include "symplectomo/settings.hpp"
#include "symplectomo/states.hpp"

namespace symplectomo {

using RowVector4 = Eigen::RowVector4d;

inline constexpr double kSymplecticTolerance = 1e-10;

/// sigma = [[0, I], [-I, 0]].
inline Matrix4 symplectic_form() {
  Matrix4 s = Matrix4::Zero();
  s(0, 2) = s(1, 3) = 1.0;
  s(2, 0) = s(3, 1) = -1.0;
  return s;
}

inline RowVector4 first_row(const TwoModeSetting& s) { return {s.mu[0], s.mu[1], s.nu[0], s.nu[1]}; }
inline RowVector4 second_row(const TwoModeSetting& s) { return {s.mu_p[0], s.mu_p[1], s.nu_p[0], s.nu_p[1]}; }

inline double symplectic_residual(const Matrix4& lambda) {
  const Matrix4 s = symplectic_form();
  return (lambda * s * lambda.transpose() - s).cwiseAbs().maxCoeff();
}

/// Inverse of a symplectic matrix, -sigma Lambda^T sigma.
inline Matrix4 symplectic_inverse(const Matrix4& lambda) {
  const Matrix4 s = symplectic_form();
  return -s * lambda.transpose() * s;
}

/// Second row from the complex map c' = (conj c2, -conj c1): commutes with
/// the first row, orthogonal to it and of equal length.
inline TwoModeSetting complete_setting(TwoModeSetting s) {
  s.mu_p = {s.mu[1], -s.mu[0]};
  s.nu_p = {-s.nu[1], s.nu[0]};
  return s;
}

/// Full 4x4 transform whose first two rows are the setting's rows. The
/// conjugate rows are Y = (R R^T)^{-1} R sigma, which makes Lambda symplectic
/// whenever the two given rows commute.
inline Matrix4 full_transform(const TwoModeSetting& s) {
  Eigen::Matrix<double, 2, 4> r;
  r.row(0) = first_row(s);
  r.row(1) = second_row(s);
  const Matrix4 sig = symplectic_form();
  const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
  const double comm = r.row(0) * sig * r.row(1).transpose();
  if (std::abs(comm) > kSymplecticTolerance * scale * scale) {
    throw Error(ErrorKind::NotSymplectic, "setting rows do not commute (" + format_double(comm) + ")");
  }
  const Eigen::Matrix2d gram = r * r.transpose();
  if (std::abs(gram.determinant()) < 1e-14 * scale * scale * scale * scale) {
    throw Error(ErrorKind::NotSymplectic, "setting rows are linearly dependent");
  }
  Matrix4 lambda;
  lambda.topRows<2>() = r;
  lambda.bottomRows<2>() = gram.inverse() * r * sig;
  if (symplectic_residual(lambda) > kSymplecticTolerance * scale * scale) {
    throw Error(ErrorKind::NotSymplectic, "completed transform fails the symplectic check");
  }
  return lambda;
}

// ---------------------------------------------------------------------------
// Tilde (single-quadrature) marginals

/// Gaussian with variance (mu, nu) M (mu, nu)^T; zero means only.
inline double tilde_marginal_gaussian(const Gaussian2& g, double x1, const TwoModeSetting& s) {
  s.validate_tilde();
  if (!g.means.isZero(0.0)) throw Error(ErrorKind::NonzeroMeansUnsupported, "closed form assumes zero means");
  const RowVector4 r = first_row(s);
  const double var = r * g.cov.matrix() * r.transpose();
  const double u = x1 - s.delta[0];
  return std::exp(-u * u / (2.0 * var)) / std::sqrt(kTwoPi * var);
}

/// Even two-mode cat N+(|A> + |-A>), closed form with A = (Q + iP)/sqrt2.
inline double tilde_marginal_cat(const std::array<Complex, 2>& amp, double x1, const TwoModeSetting& s) {
  s.validate_tilde();
  const double n_plus = two_mode_cat_normalization(TwoModeCat{amp, Parity::Plus});
  const double q1 = kSqrt2 * amp[0].real(), p1 = kSqrt2 * amp[0].imag();
  const double q2 = kSqrt2 * amp[1].real(), p2 = kSqrt2 * amp[1].imag();
  const double m1 = s.mu[0], m2 = s.mu[1], v1 = s.nu[0], v2 = s.nu[1];
  const double s2 = s.norm2();
  const double x = x1 - s.delta[0];
  const double a1 = v1 * p1 + m1 * q1;
  const double a2 = v2 * p2 + m2 * q2;
  const double pre = 2.0 / std::sqrt(kPi) * n_plus * n_plus / std::sqrt(s2);
  const double envelope = std::exp((-x * x - a1 * a1 - a2 * a2) / s2);
  const double fringe =
      std::exp((-(p1 * p1 + q1 * q1) * (v2 * v2 + m2 * m2) - (p2 * p2 + q2 * q2) * (v1 * v1 + m1 * m1) +
                2.0 * (m1 * p1 - v1 * q1) * (m2 * p2 - v2 * q2)) /
               s2) *
      std::cos(2.0 * (m1 * p1 + m2 * p2 - v1 * q1 - v2 * q2) * x / s2);
  const double lobes = std::exp(-2.0 * a1 * a2 / s2) * std::cosh(2.0 * (a1 + a2) * x / s2);
  return pre * envelope * (fringe + lobes);
}

namespace detail {

/// X1 = s q_b for the mode b = sum_j conj(c_j) a_j / s. A cat N(|A> + e|-A>)
/// splits into b with amplitude beta = sum conj(c_j) A_j / s and an
/// orthogonal remainder, whose overlap damps the interference term.
inline double tilde_marginal_cat_reduced(const TwoModeCat& cat, double x1, const TwoModeSetting& s) {
  s.validate_tilde();
  const double n = two_mode_cat_normalization(cat);
  const double sn = std::sqrt(s.norm2());
  const Complex c1(s.mu[0], s.nu[0]), c2(s.mu[1], s.nu[1]);
  const Complex beta = (std::conj(c1) * cat.amp[0] + std::conj(c2) * cat.amp[1]) / sn;
  const double a2 = std::norm(cat.amp[0]) + std::norm(cat.amp[1]);
  const double perp2 = std::max(0.0, a2 - std::norm(beta));
  const double e = cat.parity == Parity::Plus ? 1.0 : -1.0;
  const double y = (x1 - s.delta[0]) / sn;
  const Complex f = coherent_wavefunction(beta, y);
  const Complex g = coherent_wavefunction(-beta, y);
  const double dens = std::norm(f) + std::norm(g) + 2.0 * e * std::exp(-2.0 * perp2) * (f * std::conj(g)).real();
  return n * n * dens / sn;
}

inline std::optional<Gaussian2> as_gaussian(const OneModeState& a, const OneModeState& b) {
  auto piece = [](const OneModeState& st, double& var, double& mq, double& mp) {
    if (std::holds_alternative<Vacuum>(st)) {
      var = 0.5, mq = mp = 0.0;
      return true;
    }
    if (const auto* t = std::get_if<Thermal>(&st)) {
      validate(st);
      var = 0.5 / t->lambda, mq = mp = 0.0;
      return true;
    }
    if (const auto* c = std::get_if<Coherent>(&st)) {
      var = 0.5, mq = kSqrt2 * c->alpha.real(), mp = kSqrt2 * c->alpha.imag();
      return true;
    }
    return false;
  };
  double v1, q1, p1, v2, q2, p2;
  if (!piece(a, v1, q1, p1) || !piece(b, v2, q2, p2)) return std::nullopt;
  Matrix4 m = Matrix4::Zero();
  m(0, 0) = m(2, 2) = v1;
  m(1, 1) = m(3, 3) = v2;
  return Gaussian2{CovarianceMatrix(m), Vector4(q1, q2, p1, p2)};
}

/// Product states: X1 is a sum of independent one-mode quadratures.
inline double tilde_marginal_product(const Product& prod, double x1, const TwoModeSetting& s) {
  const QuadratureSetting s1{s.mu[0], s.nu[0], 0.0};
  const QuadratureSetting s2{s.mu[1], s.nu[1], 0.0};
  const double x = x1 - s.delta[0];
  if (s2.norm2() == 0.0) return marginal(prod.mode1, x, s1);
  if (s1.norm2() == 0.0) return marginal(prod.mode2, x, s2);
  UniformGrid g = default_x_grid(prod.mode1, s1);
  g.n = 801;
  const auto h = trapezoid_weights(g);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    const double y = g.at(i);
    acc += h[i] * marginal(prod.mode1, y, s1) * marginal(prod.mode2, x - y, s2);
  }
  return acc;
}

}  // namespace detail

/// Tilde marginal of any two-mode state (closed forms where available,
/// convolution for general products).
inline double tilde_marginal(const TwoModeState& state, double x1, const TwoModeSetting& s) {
  s.validate_tilde();
  if (const auto* g = std::get_if<Gaussian2>(&state)) {
    const RowVector4 r = first_row(s);
    const double var = r * g->cov.matrix() * r.transpose();
    const double u = x1 - s.delta[0] - r.dot(g->means.transpose());
    return std::exp(-u * u / (2.0 * var)) / std::sqrt(kTwoPi * var);
  }
  if (const auto* c = std::get_if<TwoModeCat>(&state)) {
    if (c->parity == Parity::Plus) return tilde_marginal_cat(c->amp, x1, s);
    return detail::tilde_marginal_cat_reduced(*c, x1, s);
  }
  const auto& prod = std::get<Product>(state);
  if (const auto g = detail::as_gaussian(prod.mode1, prod.mode2)) return tilde_marginal(*g, x1, s);
  return detail::tilde_marginal_product(prod, x1, s);
}

// ---------------------------------------------------------------------------
// Vector (joint) marginals

/// Bivariate normal pushforward of a Gaussian state.
inline double vector_marginal_gaussian(const Gaussian2& g, const Vec2& x, const TwoModeSetting& s) {
  const Matrix4 lambda = full_transform(s);
  const Eigen::Matrix<double, 2, 4> r = lambda.topRows<2>();
  const Eigen::Matrix2d cov = r * g.cov.matrix() * r.transpose();
  const Eigen::Vector2d d = Eigen::Vector2d(x[0] - s.delta[0], x[1] - s.delta[1]) - r * g.means;
  return std::exp(-0.5 * d.dot(cov.ldlt().solve(d))) / (kTwoPi * std::sqrt(cov.determinant()));
}

namespace detail {
/// Phase-space points the state is concentrated around and a width.
inline std::pair<std::vector<Vector4>, double> two_mode_spread(const TwoModeState& state) {
  if (const auto* g = std::get_if<Gaussian2>(&state)) {
    Eigen::SelfAdjointEigenSolver<Matrix4> es(g->cov.matrix(), Eigen::EigenvaluesOnly);
    return {{g->means}, std::sqrt(es.eigenvalues().maxCoeff())};
  }
  if (const auto* c = std::get_if<TwoModeCat>(&state)) {
    const Vector4 a(kSqrt2 * c->amp[0].real(), kSqrt2 * c->amp[1].real(), kSqrt2 * c->amp[0].imag(),
                    kSqrt2 * c->amp[1].imag());
    return {{a, -a}, std::sqrt(0.5)};
  }
  const auto& prod = std::get<Product>(state);
  const QuadratureSetting unit{1.0, 0.0, 0.0}, unit_p{0.0, 1.0, 0.0};
  const auto cq1 = projected_centers(prod.mode1, unit), cp1 = projected_centers(prod.mode1, unit_p);
  const auto cq2 = projected_centers(prod.mode2, unit), cp2 = projected_centers(prod.mode2, unit_p);
  std::vector<Vector4> pts;
  for (std::size_t i = 0; i < cq1.size(); ++i)
    for (std::size_t j = 0; j < cq2.size(); ++j) pts.emplace_back(cq1[i], cq2[j], cp1[i], cp2[j]);
  const double sig = std::max(component_sigma(prod.mode1, unit), component_sigma(prod.mode2, unit));
  return {pts, sig};
}
}  // namespace detail

/// Joint density of (X1, X2) by integrating the Wigner function over the
/// conjugate pair (Y1, Y2) of the completed symplectic transform.
struct PlaneRule {
  double half_width_sigmas = 8.0;
  std::size_t n = 161;
};

inline double vector_marginal_numeric(const TwoModeState& state, const Vec2& x, const TwoModeSetting& s,
                                      const PlaneRule& rule = {}) {
  const Matrix4 lambda = full_transform(s);
  const Matrix4 inv = symplectic_inverse(lambda);
  const auto [centers, sigma] = detail::two_mode_spread(state);
  std::array<double, 2> lo{}, hi{};
  for (int j = 0; j < 2; ++j) {
    const RowVector4 y = lambda.row(2 + j);
    double mn = 1e300, mx = -1e300;
    for (const auto& c : centers) {
      mn = std::min(mn, y.dot(c.transpose()));
      mx = std::max(mx, y.dot(c.transpose()));
    }
    const double half = rule.half_width_sigmas * sigma * y.norm();
    lo[j] = mn - half;
    hi[j] = mx + half;
  }
  const UniformGrid g1{lo[0], hi[0], rule.n}, g2{lo[1], hi[1], rule.n};
  const auto h1 = trapezoid_weights(g1), h2 = trapezoid_weights(g2);
  const double u1 = x[0] - s.delta[0], u2 = x[1] - s.delta[1];
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.n; ++i) {
    for (std::size_t j = 0; j < rule.n; ++j) {
      const Vector4 z = inv * Vector4(u1, u2, g1.at(i), g2.at(j));
      acc += h1[i] * h2[j] * wigner_two_mode(state, {z(0), z(1)}, {z(2), z(3)});
    }
  }
  return acc / (kTwoPi * kTwoPi);
}

inline double vector_marginal(const TwoModeState& state, const Vec2& x, const TwoModeSetting& s) {
  if (const auto* g = std::get_if<Gaussian2>(&state)) return vector_marginal_gaussian(*g, x, s);
  if (const auto* prod = std::get_if<Product>(&state)) {
    if (const auto g = detail::as_gaussian(prod->mode1, prod->mode2)) return vector_marginal_gaussian(*g, x, s);
  }
  return vector_marginal_numeric(state, x, s);
}

// ---------------------------------------------------------------------------
// Setting schedules on the unit sphere of R^4 (Hopf coordinates):
//   c1 = cos(theta) e^{i phi1}, c2 = sin(theta) e^{i phi2},
// theta at Gauss-Legendre nodes on [0, pi/2], phi1, phi2 evenly spaced on
// [0, 2 pi). Row order: theta major, then phi1, then phi2.

struct HopfLayout {
  std::size_t n_theta = 16;
  std::size_t n_phi = 24;

  std::size_t size() const { return n_theta * n_phi * n_phi; }
  double phi(std::size_t a) const { return kTwoPi * static_cast<double>(a) / static_cast<double>(n_phi); }
};

inline std::vector<Vector4> hopf_directions(const HopfLayout& layout) {
  const auto th = gauss_legendre(layout.n_theta, 0.0, kPi / 2.0);
  std::vector<Vector4> out;
  out.reserve(layout.size());
  for (std::size_t t = 0; t < layout.n_theta; ++t) {
    const double c = std::cos(th.nodes[t]), s = std::sin(th.nodes[t]);
    for (std::size_t a = 0; a < layout.n_phi; ++a) {
      for (std::size_t b = 0; b < layout.n_phi; ++b) {
        const double f1 = layout.phi(a), f2 = layout.phi(b);
        out.emplace_back(c * std::cos(f1), s * std::cos(f2), c * std::sin(f1), s * std::sin(f2));
      }
    }
  }
  return out;
}

inline std::vector<TwoModeSetting> tilde_hopf_settings(const HopfLayout& layout) {
  std::vector<TwoModeSetting> out;
  for (const auto& w : hopf_directions(layout)) {
    TwoModeSetting s;
    s.mu = {w(0), w(1)};
    s.nu = {w(2), w(3)};
    out.push_back(s);
  }
  return out;
}

/// The 4x4 matrix of c -> z1 c + z2 J c acting on (mu1, mu2, nu1, nu2).
inline Matrix4 frequency_map(const Vec2& z) {
  Matrix4 j = Matrix4::Zero();
  // J: mu'1 = mu2, mu'2 = -mu1, nu'1 = -nu2, nu'2 = nu1
  j(0, 1) = 1.0;
  j(1, 0) = -1.0;
  j(2, 3) = -1.0;
  j(3, 2) = 1.0;
  return z[0] * Matrix4::Identity() + z[1] * j;
}

/// Vector settings whose combined direction z1 r1 + z2 r2 is |z| times a
/// Hopf direction; r2 is the J completion of r1.
inline std::vector<TwoModeSetting> vector_hopf_settings(const HopfLayout& layout, const Vec2& z) {
  const double zn = std::hypot(z[0], z[1]);
  if (!(zn > 0.0)) throw Error(ErrorKind::DegenerateConfig, "z vector must be nonzero");
  const Matrix4 mt = frequency_map(z).transpose();
  std::vector<TwoModeSetting> out;
  for (const auto& w : hopf_directions(layout)) {
    const Vector4 r = mt * w / zn;
    TwoModeSetting s;
    s.mu = {r(0), r(1)};
    s.nu = {r(2), r(3)};
    out.push_back(complete_setting(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-mode tomograms

enum class TwoModeKind { Tilde, Vector };

/// Tilde: values(k, i) at x1_grid.at(i). Vector: values(k, i * n2 + j) at
/// (x1_grid.at(i), x2_grid.at(j)).
struct TwoModeTomogram {
  TwoModeKind kind = TwoModeKind::Tilde;
  std::vector<TwoModeSetting> settings;
  UniformGrid x1_grid;
  UniformGrid x2_grid;
  Eigen::MatrixXd values;

  std::size_t points_per_row() const { return kind == TwoModeKind::Tilde ? x1_grid.n : x1_grid.n * x2_grid.n; }

  std::vector<double> row_integrals() const {
    const auto h1 = trapezoid_weights(x1_grid);
    const auto h2 = kind == TwoModeKind::Vector ? trapezoid_weights(x2_grid) : std::vector<double>{};
    std::vector<double> out(settings.size(), 0.0);
    for (std::size_t k = 0; k < settings.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      if (kind == TwoModeKind::Tilde) {
        for (std::size_t i = 0; i < x1_grid.n; ++i) out[k] += h1[i] * values(kk, static_cast<Eigen::Index>(i));
      } else {
        for (std::size_t i = 0; i < x1_grid.n; ++i)
          for (std::size_t j = 0; j < x2_grid.n; ++j)
            out[k] += h1[i] * h2[j] * values(kk, static_cast<Eigen::Index>(i * x2_grid.n + j));
      }
    }
    return out;
  }

  double max_normalization_error() const {
    double worst = 0.0;
    for (double v : row_integrals()) worst = std::max(worst, std::abs(v - 1.0));
    return worst;
  }
};

namespace detail {
inline void check_two_mode_normalization(const TwoModeTomogram& t) {
  const auto ints = t.row_integrals();
  for (std::size_t k = 0; k < ints.size(); ++k) {
    if (std::abs(ints[k] - 1.0) > kTomogramNormTolerance) {
      throw Error(ErrorKind::GridTooNarrow, "row " + std::to_string(k) + " integrates to " + format_double(ints[k]));
    }
  }
}

/// Standard deviation of X1 for a unit setting, bounded over directions.
inline double unit_quadrature_sigma(const TwoModeState& state) { return two_mode_spread(state).second; }

inline double max_center_projection(const TwoModeState& state, const RowVector4& row) {
  double m = 0.0;
  for (const auto& c : two_mode_spread(state).first) m = std::max(m, std::abs(row.dot(c.transpose())));
  return m;
}
}  // namespace detail

/// Default symmetric grid covering every row: max |center| + 8 sigma |row|.
inline UniformGrid default_tilde_grid(const TwoModeState& state, const std::vector<TwoModeSetting>& settings,
                                      std::size_t n = 401) {
  const double sig = detail::unit_quadrature_sigma(state);
  double half = 0.0;
  for (const auto& s : settings) {
    const RowVector4 r = first_row(s);
    half = std::max(half, std::abs(s.delta[0]) + detail::max_center_projection(state, r) + 8.0 * sig * r.norm());
  }
  return {-half, half, n};
}

inline TwoModeTomogram tabulate_tilde_tomogram(const TwoModeState& state, const std::vector<TwoModeSetting>& settings,
                                               const UniformGrid& grid) {
  if (settings.empty()) throw Error(ErrorKind::EmptySchedule, "no settings");
  grid.validate();
  TwoModeTomogram t{TwoModeKind::Tilde, settings, grid, {}, Eigen::MatrixXd(settings.size(), grid.n)};
  const auto rows = parallel_map(settings.size(), [&](std::size_t k) {
    std::vector<double> row(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) row[i] = std::max(0.0, tilde_marginal(state, grid.at(i), settings[k]));
    return row;
  });
  for (std::size_t k = 0; k < settings.size(); ++k)
    for (std::size_t i = 0; i < grid.n; ++i) t.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = rows[k][i];
  detail::check_two_mode_normalization(t);
  return t;
}

inline TwoModeTomogram tabulate_tilde_tomogram(const TwoModeState& state, const std::vector<TwoModeSetting>& settings) {
  return tabulate_tilde_tomogram(state, settings, default_tilde_grid(state, settings));
}

inline std::pair<UniformGrid, UniformGrid> default_vector_grids(const TwoModeState& state,
                                                                const std::vector<TwoModeSetting>& settings,
                                                                std::size_t n = 81) {
  const double sig = detail::unit_quadrature_sigma(state);
  double h1 = 0.0, h2 = 0.0;
  for (const auto& s : settings) {
    const RowVector4 r1 = first_row(s), r2 = second_row(s);
    h1 = std::max(h1, std::abs(s.delta[0]) + detail::max_center_projection(state, r1) + 8.0 * sig * r1.norm());
    h2 = std::max(h2, std::abs(s.delta[1]) + detail::max_center_projection(state, r2) + 8.0 * sig * r2.norm());
  }
  return {UniformGrid{-h1, h1, n}, UniformGrid{-h2, h2, n}};
}

inline TwoModeTomogram tabulate_vector_tomogram(const TwoModeState& state, const std::vector<TwoModeSetting>& settings,
                                                const UniformGrid& g1, const UniformGrid& g2) {
  if (settings.empty()) throw Error(ErrorKind::EmptySchedule, "no settings");
  g1.validate();
  g2.validate();
  for (const auto& s : settings) full_transform(s);
  TwoModeTomogram t{TwoModeKind::Vector, settings, g1, g2, Eigen::MatrixXd(settings.size(), g1.n * g2.n)};
  const auto rows = parallel_map(settings.size(), [&](std::size_t k) {
    std::vector<double> row(g1.n * g2.n);
    for (std::size_t i = 0; i < g1.n; ++i)
      for (std::size_t j = 0; j < g2.n; ++j)
        row[i * g2.n + j] = std::max(0.0, vector_marginal(state, {g1.at(i), g2.at(j)}, settings[k]));
    return row;
  });
  for (std::size_t k = 0; k < settings.size(); ++k)
    for (std::size_t i = 0; i < rows[k].size(); ++i) t.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = rows[k][i];
  detail::check_two_mode_normalization(t);
  return t;
}

inline TwoModeTomogram tabulate_vector_tomogram(const TwoModeState& state, const std::vector<TwoModeSetting>& settings) {
  const auto [g1, g2] = default_vector_grids(state, settings);
  return tabulate_vector_tomogram(state, settings, g1, g2);
}

// CSV: mu1,mu2,nu1,nu2,mup1,mup2,nup1,nup2,x1[,x2],w. The format has no
// shift columns, so x is the centered value and shifted settings are rejected.

inline const std::vector<std::string>& two_mode_setting_columns() {
  static const std::vector<std::string> cols{"mu1", "mu2", "nu1", "nu2", "mup1", "mup2", "nup1", "nup2"};
  return cols;
}

inline std::string setting_csv_prefix(const TwoModeSetting& s) {
  std::string out;
  for (double v : {s.mu[0], s.mu[1], s.nu[0], s.nu[1], s.mu_p[0], s.mu_p[1], s.nu_p[0], s.nu_p[1]}) {
    out += format_double(v) + ",";
  }
  return out;
}

inline std::string two_mode_tomogram_csv(const TwoModeTomogram& t) {
  std::ostringstream os;
  for (const auto& c : two_mode_setting_columns()) os << c << ',';
  os << (t.kind == TwoModeKind::Vector ? "x1,x2,w\n" : "x1,w\n");
  for (std::size_t k = 0; k < t.settings.size(); ++k) {
    const auto& s = t.settings[k];
    if (s.delta[0] != 0.0 || s.delta[1] != 0.0) {
      throw Error(ErrorKind::UnsupportedVariant, "two-mode CSV has no shift columns; tabulate with delta = 0");
    }
    const std::string prefix = setting_csv_prefix(s);
    const auto kk = static_cast<Eigen::Index>(k);
    if (t.kind == TwoModeKind::Tilde) {
      for (std::size_t i = 0; i < t.x1_grid.n; ++i)
        os << prefix << format_double(t.x1_grid.at(i)) << ',' << format_double(t.values(kk, static_cast<Eigen::Index>(i))) << '\n';
    } else {
      for (std::size_t i = 0; i < t.x1_grid.n; ++i)
        for (std::size_t j = 0; j < t.x2_grid.n; ++j)
          os << prefix << format_double(t.x1_grid.at(i)) << ',' << format_double(t.x2_grid.at(j)) << ','
             << format_double(t.values(kk, static_cast<Eigen::Index>(i * t.x2_grid.n + j))) << '\n';
    }
  }
  return os.str();
}

inline TwoModeTomogram two_mode_tomogram_from_table(const NumericTable& table) {
  auto cols = two_mode_setting_columns();
  TwoModeTomogram t;
  if (table.header.size() == 10) {
    cols.insert(cols.end(), {"x1", "w"});
    t.kind = TwoModeKind::Tilde;
  } else {
    cols.insert(cols.end(), {"x1", "x2", "w"});
    t.kind = TwoModeKind::Vector;
  }
  require_header(table, cols);
  std::vector<std::vector<const std::vector<double>*>> groups;
  for (const auto& r : table.rows) {
    TwoModeSetting s;
    s.mu = {r[0], r[1]};
    s.nu = {r[2], r[3]};
    s.mu_p = {r[4], r[5]};
    s.nu_p = {r[6], r[7]};
    if (t.settings.empty() || !(t.settings.back() == s)) {
      s.validate_tilde();
      t.settings.push_back(s);
      groups.emplace_back();
    }
    if (r.back() < 0.0) throw Error(ErrorKind::Parse, "negative marginal value");
    groups.back().push_back(&r);
  }
  if (t.settings.empty()) throw Error(ErrorKind::EmptySchedule, "tomogram has no rows");
  const auto& first = groups.front();
  if (t.kind == TwoModeKind::Tilde) {
    std::vector<double> xs;
    for (const auto* r : first) xs.push_back((*r)[8]);
    t.x1_grid = detail::grid_from_points(xs);
  } else {
    std::vector<double> x1s, x2s;
    for (const auto* r : first) {
      if (x1s.empty() || x1s.back() != (*r)[8]) x1s.push_back((*r)[8]);
      if (x1s.size() == 1) x2s.push_back((*r)[9]);
    }
    t.x1_grid = detail::grid_from_points(x1s);
    t.x2_grid = detail::grid_from_points(x2s);
  }
  const std::size_t per = t.points_per_row();
  t.values.resize(static_cast<Eigen::Index>(t.settings.size()), static_cast<Eigen::Index>(per));
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (groups[k].size() != per) throw Error(ErrorKind::Parse, "two-mode tomogram rows have unequal lengths");
    for (std::size_t i = 0; i < per; ++i) {
      const auto& r = *groups[k][i];
      const bool same = t.kind == TwoModeKind::Tilde
                            ? r[8] == (*first[i])[8]
                            : (r[8] == (*first[i])[8] && r[9] == (*first[i])[9]);
      if (!same) throw Error(ErrorKind::Parse, "two-mode tomogram rows use different grids");
      t.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = r.back();
    }
  }
  return t;
}

inline TwoModeTomogram read_two_mode_tomogram_csv(const std::string& path) {
  return two_mode_tomogram_from_table(read_csv(path));
}

// ---------------------------------------------------------------------------
// Kernel

/// <n1_row n2_row| K |n1_col n2_col> with
///   K = (z1^4 / (2pi)^2) e^{-i z.x} D(xi_1) (x) D(xi_2),
///   xi_j = -(1/sqrt2)[z1 (nu_j - i mu_j) + z2 (nu'_j - i mu'_j)].
inline Complex kernel_two_mode_number(const std::array<unsigned, 2>& n_row, const std::array<unsigned, 2>& n_col,
                                      const Vec2& x, const TwoModeSetting& s, const Vec2& z) {
  const double z1 = z[0], z2 = z[1];
  Complex val = std::pow(z1, 4) / (kTwoPi * kTwoPi) * std::exp(Complex(0.0, -(z1 * x[0] + z2 * x[1])));
  for (int j = 0; j < 2; ++j) {
    const Complex xi = -(z1 * Complex(s.nu[j], -s.mu[j]) + z2 * Complex(s.nu_p[j], -s.mu_p[j])) / kSqrt2;
    val *= displacement_element(n_row[j], n_col[j], xi);
  }
  return val;
}

// ---------------------------------------------------------------------------
// Reconstruction
//
// With c = z1 (mu + i nu) + z2 (mu' + i nu') the density operator is
//   rho = (2pi)^{-2} int d^4c chi(c) D(i c1 / sqrt2) (x) D(i c2 / sqrt2),
// chi(c) = <exp(-i (c-weighted quadrature))>. In Hopf coordinates
// d^4c = R^3 sin(theta) cos(theta) dR dtheta dphi1 dphi2, and the phi sums
// become a discrete Fourier transform over the harmonic d_j = n_j - m_j.

struct TwoModeReconstructionConfig {
  std::optional<Vec2> z;  // (1, 0) for tilde tomograms, (1, 1) for vector ones
  std::array<std::size_t, 2> dims{12, 12};
  double r_max = 8.0;  // radius in c space
  std::size_t n_r = 40;
  Projection projection = Projection::Hermitize;

  Vec2 resolved_z(TwoModeKind kind) const {
    if (z) return *z;
    return kind == TwoModeKind::Tilde ? Vec2{1.0, 0.0} : Vec2{1.0, 1.0};
  }

  void validate() const {
    if (z && !(std::hypot((*z)[0], (*z)[1]) > 0.0)) throw Error(ErrorKind::DegenerateConfig, "z vector must be nonzero");
    if (dims[0] == 0 || dims[1] == 0 || n_r == 0) throw Error(ErrorKind::DegenerateConfig, "dims and n_r must be >= 1");
    if (!(r_max >= kMinDampingRadius)) throw Error(ErrorKind::DegenerateConfig, "r_max must be >= 6");
  }
};

/// Finds the Hopf layout that generated the tomogram's settings.
inline HopfLayout detect_hopf_layout(const TwoModeTomogram& t, const Vec2& z) {
  const std::size_t rows = t.settings.size();
  for (std::size_t n_phi = 1; n_phi * n_phi <= rows; ++n_phi) {
    if (rows % (n_phi * n_phi) != 0) continue;
    const HopfLayout layout{rows / (n_phi * n_phi), n_phi};
    const auto expect = t.kind == TwoModeKind::Tilde ? tilde_hopf_settings(layout) : vector_hopf_settings(layout, z);
    bool ok = true;
    for (std::size_t k = 0; k < rows && ok; ++k) {
      const auto& a = t.settings[k];
      const auto& b = expect[k];
      const double d = (first_row(a) - first_row(b)).cwiseAbs().maxCoeff() +
                       (t.kind == TwoModeKind::Vector ? (second_row(a) - second_row(b)).cwiseAbs().maxCoeff() : 0.0);
      ok = d < 1e-9;
    }
    if (ok) return layout;
  }
  throw Error(ErrorKind::DegenerateConfig, "tomogram settings are not a Hopf schedule for this z");
}

namespace detail {

/// chi at c = R * (Hopf direction of row k), for every radial node.
inline std::vector<Complex> two_mode_characteristic(const TwoModeTomogram& t, std::size_t k, const Vec2& z,
                                                    const std::vector<double>& radii) {
  const auto& s = t.settings[k];
  if (t.kind == TwoModeKind::Tilde) {
    const QuadratureSetting unit{1.0, 0.0, s.delta[0]};
    return characteristic_from_row(t.x1_grid, t.values.data() + k, t.values.rows(), unit, radii);
  }
  std::vector<Complex> out(radii.size(), 0.0);
  const auto h1 = trapezoid_weights(t.x1_grid);
  const auto kk = static_cast<Eigen::Index>(k);
  const auto h2 = trapezoid_weights(t.x2_grid);
  const double zn = std::hypot(z[0], z[1]);
  for (std::size_t r = 0; r < radii.size(); ++r) {
    const double lam = radii[r] / zn;
    std::vector<Complex> e2(t.x2_grid.n);
    for (std::size_t j = 0; j < t.x2_grid.n; ++j) e2[j] = h2[j] * std::polar(1.0, -lam * z[1] * (t.x2_grid.at(j) - s.delta[1]));
    Complex acc = 0.0;
    for (std::size_t i = 0; i < t.x1_grid.n; ++i) {
      Complex inner = 0.0;
      for (std::size_t j = 0; j < t.x2_grid.n; ++j) inner += t.values(kk, static_cast<Eigen::Index>(i * t.x2_grid.n + j)) * e2[j];
      acc += h1[i] * std::polar(1.0, -lam * z[0] * (t.x1_grid.at(i) - s.delta[0])) * inner;
    }
    out[r] = acc;
  }
  return out;
}

}  // namespace detail

inline ReconstructionReport reconstruct_two_mode(const TwoModeTomogram& t, const TwoModeReconstructionConfig& cfg) {
  cfg.validate();
  if (t.settings.empty()) throw Error(ErrorKind::EmptyBatches, "tomogram has no rows");
  const Vec2 z = cfg.resolved_z(t.kind);
  const HopfLayout layout = detect_hopf_layout(t, z);
  const auto radial = gauss_legendre(cfg.n_r, 0.0, cfg.r_max);
  const auto theta = gauss_legendre(layout.n_theta, 0.0, kPi / 2.0);
  const std::size_t np = layout.n_phi;

  // chi[k][r]
  const auto chi = parallel_map(t.settings.size(),
                                [&](std::size_t k) { return detail::two_mode_characteristic(t, k, z, radial.nodes); });

  const auto d1 = static_cast<Eigen::Index>(cfg.dims[0]);
  const auto d2 = static_cast<Eigen::Index>(cfg.dims[1]);
  const auto dim = d1 * d2;

  // twiddles e^{i d phi_a}
  auto twiddle = [&](Eigen::Index dmax) {
    Eigen::MatrixXcd w(2 * dmax - 1, static_cast<Eigen::Index>(np));
    for (Eigen::Index d = -(dmax - 1); d <= dmax - 1; ++d)
      for (std::size_t a = 0; a < np; ++a) w(d + dmax - 1, static_cast<Eigen::Index>(a)) = std::polar(1.0, static_cast<double>(d) * layout.phi(a));
    return w;
  };
  const Eigen::MatrixXcd tw1 = twiddle(d1), tw2 = twiddle(d2);
  static const Complex ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const double dphi2 = (kTwoPi / static_cast<double>(np)) * (kTwoPi / static_cast<double>(np));

  const std::size_t n_nodes = cfg.n_r * layout.n_theta;
  const ComplexMatrix zero = ComplexMatrix::Zero(dim, dim);
  ComplexMatrix raw = chunked_sum(n_nodes, zero, [&](std::size_t node) {
    const std::size_t ir = node / layout.n_theta;
    const std::size_t it = node % layout.n_theta;
    const double r = radial.nodes[ir];
    const double th = theta.nodes[it];
    const double weight = radial.weights[ir] * theta.weights[it] * r * r * r * std::sin(th) * std::cos(th) * dphi2 /
                          (kTwoPi * kTwoPi);
    // chi on the (phi1, phi2) torus for this (R, theta)
    Eigen::MatrixXcd g(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(np));
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = 0; b < np; ++b)
        g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = chi[(it * np + a) * np + b][ir];
    const Eigen::MatrixXcd f = tw1 * g * tw2.transpose();  // F(d1, d2)
    const ComplexMatrix b1 = displacement_matrix(Complex(r * std::cos(th) / kSqrt2, 0.0), cfg.dims[0]);
    const ComplexMatrix b2 = displacement_matrix(Complex(r * std::sin(th) / kSqrt2, 0.0), cfg.dims[1]);
    ComplexMatrix term(dim, dim);
    for (Eigen::Index n1 = 0; n1 < d1; ++n1)
      for (Eigen::Index m1 = 0; m1 < d1; ++m1)
        for (Eigen::Index n2 = 0; n2 < d2; ++n2)
          for (Eigen::Index m2 = 0; m2 < d2; ++m2) {
            const Eigen::Index e1 = n1 - m1, e2 = n2 - m2;
            term(n1 * d2 + n2, m1 * d2 + m2) = weight * b1(n1, m1) * b2(n2, m2) *
                                               ipow[(((e1 + e2) % 4) + 4) % 4] * f(e1 + d1 - 1, e2 + d2 - 1);
          }
    return term;
  });
  const double tr = raw.trace().real();
  if (std::abs(tr - 1.0) > kTraceUnderresolved) {
    throw Error(ErrorKind::GridUnderresolved, "raw two-mode trace " + format_double(tr) + " deviates from 1");
  }
  auto rep = finish_report(std::move(raw), cfg.projection, {cfg.dims[0], cfg.dims[1]});
  rep.settings_used = t.settings.size();
  return rep;
}

}  // namespace symplectomo
