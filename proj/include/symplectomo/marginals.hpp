// marginals.hpp
// One-mode marginal distributions of the generalized quadrature
// X = mu q + nu p + delta, analytic and by line integration of the Wigner
// function, plus tabulated tomograms and their CSV form.

#pragma once

#include <Eigen/Dense>

#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "symplectomo/core.hpp"
#include "symplectomo/csv.hpp"
#include "symplectomo/settings.hpp"
#include "symplectomo/states.hpp"

namespace symplectomo {

namespace detail {

/// Normalized Hermite function h_n(y), |h_n|^2 the position density of |n>.
inline double hermite_function(unsigned n, double y) {
  double prev = 0.0;
  double cur = std::pow(kPi, -0.25) * std::exp(-0.5 * y * y);
  for (unsigned k = 0; k < n; ++k) {
    const double next = std::sqrt(2.0 / (k + 1.0)) * y * cur - std::sqrt(k / (k + 1.0)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Mean of mu q + nu p for each coherent component of the state ({0} when
/// the state has no coherent decomposition).
inline std::vector<double> projected_centers(const OneModeState& state, const QuadratureSetting& s) {
  const auto sup = as_superposition(state);
  if (!sup) return {0.0};
  std::vector<double> out;
  for (const auto& term : *sup) {
    out.push_back(kSqrt2 * (s.mu * term.amp[0].real() + s.nu * term.amp[0].imag()));
  }
  return out;
}

/// Width of a single component of the marginal.
inline double component_sigma(const OneModeState& state, const QuadratureSetting& s) {
  double var = 0.5;
  if (const auto* t = std::get_if<Thermal>(&state)) var = 0.5 / t->lambda;
  if (const auto* n = std::get_if<NumberState>(&state)) var = 0.5 * (2.0 * n->n + 1.0);
  return std::sqrt(var * s.norm2());
}

/// Cat marginal in the printed form, for a quadrature whose components have
/// variance 1/4. Evaluating it at (sqrt(2) mu, sqrt(2) nu) gives the density
/// for the convention used here.
inline double cat_closed_form(double a, double b, double x, double mu, double nu) {
  const double s2 = mu * mu + nu * nu;
  const double norm = 1.0 + std::cos(2.0 * a * b) * std::exp(-2.0 * b * b);
  const double u = x - mu * a;
  const double gauss = std::exp(-2.0 * (u * u + b * b * nu * nu) / s2);
  const double fringes =
      std::cosh(4.0 * nu * b * u / s2) + std::cos(2.0 * b * (2.0 * mu * x - a * (mu * mu - nu * nu)) / s2);
  return std::sqrt(2.0 / kPi) / std::sqrt(s2) / norm * gauss * fringes;
}

}  // namespace detail

/// Printed cat marginal evaluated in this library's quadrature convention.
inline double even_cat_marginal(double a, double b, double x, double mu, double nu) {
  return detail::cat_closed_form(a, b, x, kSqrt2 * mu, kSqrt2 * nu);
}

/// Density of the measured value X under the setting; w(X - delta) of the
/// centered quadrature mu q + nu p.
inline double marginal_analytic(const OneModeState& state, double x, const QuadratureSetting& setting) {
  setting.validate();
  validate(state);
  const double s2 = setting.norm2();
  const double u = x - setting.delta;
  if (std::holds_alternative<Vacuum>(state)) return std::exp(-u * u / s2) / std::sqrt(kPi * s2);
  if (const auto* t = std::get_if<Thermal>(&state)) {
    return std::sqrt(t->lambda / (kPi * s2)) * std::exp(-t->lambda * u * u / s2);
  }
  if (const auto* c = std::get_if<Coherent>(&state)) {
    const double m = kSqrt2 * (setting.mu * c->alpha.real() + setting.nu * c->alpha.imag());
    return std::exp(-(u - m) * (u - m) / s2) / std::sqrt(kPi * s2);
  }
  if (const auto* c = std::get_if<EvenCat>(&state)) return even_cat_marginal(c->a, c->b, u, setting.mu, setting.nu);
  const double s = std::sqrt(s2);
  if (const auto* n = std::get_if<NumberState>(&state)) {
    const double h = detail::hermite_function(n->n, u / s);
    return h * h / s;
  }
  if (const auto* pair = std::get_if<CoherentPair>(&state)) {
    // x_theta statistics of |g> equal position statistics of |g e^{-i theta}>
    const Complex rot = std::polar(1.0, -std::atan2(setting.nu, setting.mu));
    const auto sup = pair_superposition(pair->gamma1, pair->gamma2);
    Complex amp = 0.0;
    for (const auto& term : sup) amp += term.coeff * coherent_wavefunction(term.amp[0] * rot, u / s);
    return std::norm(amp) / norm_squared(sup) / s;
  }
  throw Error(ErrorKind::UnsupportedVariant, "no closed-form marginal for " + describe(state));
}

/// Trapezoid rule along the line mu q + nu p = X - delta, parametrized by
/// arc length t in [c - half_width, c + half_width] around the state's
/// components.
struct LineIntegral {
  double half_width = 8.0;
  std::size_t n = 2001;
};

inline double marginal_numeric(const OneModeState& state, double x, const QuadratureSetting& setting,
                               const LineIntegral& rule = {}) {
  setting.validate();
  if (rule.n < 2 || !(rule.half_width > 0.0)) throw Error(ErrorKind::InvalidParameter, "bad line-integral rule");
  const double s2 = setting.norm2();
  const double s = std::sqrt(s2);
  const double u = x - setting.delta;
  const double q0 = u * setting.mu / s2;
  const double p0 = u * setting.nu / s2;
  const double dq = -setting.nu / s;
  const double dp = setting.mu / s;

  // place the window over the components' positions along the line
  double tmin = 0.0, tmax = 0.0;
  if (const auto sup = as_superposition(state)) {
    tmin = std::numeric_limits<double>::infinity();
    tmax = -tmin;
    for (const auto& term : *sup) {
      const double t = kSqrt2 * (term.amp[0].real() * dq + term.amp[0].imag() * dp);
      tmin = std::min(tmin, t);
      tmax = std::max(tmax, t);
    }
  }
  const double lo = tmin - rule.half_width;
  const double hi = tmax + rule.half_width;
  const double base_step = 2.0 * rule.half_width / static_cast<double>(rule.n - 1);
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / base_step)) + 1;
  const double h = (hi - lo) / static_cast<double>(n - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = lo + h * static_cast<double>(i);
    const double wt = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    sum += wt * wigner(state, q0 + t * dq, p0 + t * dp);
  }
  return sum * h / (kTwoPi * s);
}

/// Analytic where available, numeric line integral otherwise.
inline double marginal(const OneModeState& state, double x, const QuadratureSetting& setting) {
  if (std::holds_alternative<Custom>(state)) {
    throw Error(ErrorKind::UnsupportedVariant, "marginal of a custom density matrix");
  }
  return marginal_analytic(state, x, setting);
}

/// Default x-grid: components' spread plus 8 standard deviations each side,
/// 1201 points.
inline UniformGrid default_x_grid(const OneModeState& state, const QuadratureSetting& setting) {
  setting.validate();
  if (std::holds_alternative<Custom>(state)) {
    throw Error(ErrorKind::UnsupportedVariant, "default grid of a custom density matrix");
  }
  const auto centers = detail::projected_centers(state, setting);
  const double sigma = detail::component_sigma(state, setting);
  const auto [mn, mx] = std::minmax_element(centers.begin(), centers.end());
  return {setting.delta + *mn - 8.0 * sigma, setting.delta + *mx + 8.0 * sigma, 1201};
}

/// Smallest grid covering every setting's default grid.
inline UniformGrid default_x_grid(const OneModeState& state, const std::vector<QuadratureSetting>& settings) {
  if (settings.empty()) throw Error(ErrorKind::EmptySchedule, "no settings");
  UniformGrid g = default_x_grid(state, settings.front());
  for (const auto& s : settings) {
    const auto gs = default_x_grid(state, s);
    g.lo = std::min(g.lo, gs.lo);
    g.hi = std::max(g.hi, gs.hi);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Tomograms

/// values(k, i) = density of the measured X at x_grid.at(i) for settings[k].
struct Tomogram {
  std::vector<QuadratureSetting> settings;
  UniformGrid x_grid;
  Eigen::MatrixXd values;

  /// Trapezoid integral of each row.
  std::vector<double> row_integrals() const {
    const auto w = trapezoid_weights(x_grid);
    std::vector<double> out(settings.size(), 0.0);
    for (std::size_t k = 0; k < settings.size(); ++k) {
      for (std::size_t i = 0; i < x_grid.n; ++i) out[k] += w[i] * values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
    }
    return out;
  }

  double max_normalization_error() const {
    double worst = 0.0;
    for (double v : row_integrals()) worst = std::max(worst, std::abs(v - 1.0));
    return worst;
  }
};

inline constexpr double kTomogramNormTolerance = 1e-3;

inline Tomogram tabulate_tomogram(const OneModeState& state, const std::vector<QuadratureSetting>& settings,
                                  const UniformGrid& grid) {
  if (settings.empty()) throw Error(ErrorKind::EmptySchedule, "no settings");
  grid.validate();
  for (const auto& s : settings) s.validate();
  Tomogram t{settings, grid, Eigen::MatrixXd(settings.size(), grid.n)};
  const auto rows = parallel_map(settings.size(), [&](std::size_t k) {
    std::vector<double> row(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) row[i] = std::max(0.0, marginal(state, grid.at(i), settings[k]));
    return row;
  });
  for (std::size_t k = 0; k < settings.size(); ++k) {
    for (std::size_t i = 0; i < grid.n; ++i) t.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = rows[k][i];
  }
  const auto integrals = t.row_integrals();
  for (std::size_t k = 0; k < integrals.size(); ++k) {
    if (std::abs(integrals[k] - 1.0) > kTomogramNormTolerance) {
      throw Error(ErrorKind::GridTooNarrow, "row " + std::to_string(k) + " integrates to " +
                                                format_double(integrals[k]));
    }
  }
  return t;
}

inline Tomogram tabulate_tomogram(const OneModeState& state, const std::vector<QuadratureSetting>& settings) {
  return tabulate_tomogram(state, settings, default_x_grid(state, settings));
}

inline std::string tomogram_csv(const Tomogram& t) {
  std::ostringstream os;
  os << "mu,nu,delta,x,w\n";
  for (std::size_t k = 0; k < t.settings.size(); ++k) {
    const auto& s = t.settings[k];
    const std::string prefix = format_double(s.mu) + "," + format_double(s.nu) + "," + format_double(s.delta) + ",";
    for (std::size_t i = 0; i < t.x_grid.n; ++i) {
      os << prefix << format_double(t.x_grid.at(i)) << ','
         << format_double(t.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i))) << '\n';
    }
  }
  return os.str();
}

namespace detail {
/// Recovers a uniform grid from consecutive x values.
inline UniformGrid grid_from_points(const std::vector<double>& xs) {
  if (xs.size() < 2) throw Error(ErrorKind::Parse, "a tomogram row needs at least 2 points");
  UniformGrid g{xs.front(), xs.back(), xs.size()};
  const double tol = 1e-9 * std::max({1.0, std::abs(g.lo), std::abs(g.hi)});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::abs(xs[i] - g.at(i)) > tol) throw Error(ErrorKind::Parse, "tomogram x values are not a uniform grid");
  }
  g.validate();
  return g;
}
}  // namespace detail

/// Groups consecutive rows with equal (mu, nu, delta) into settings. All
/// settings must share the same x grid.
inline Tomogram tomogram_from_table(const NumericTable& table) {
  require_header(table, {"mu", "nu", "delta", "x", "w"});
  Tomogram t;
  std::vector<std::vector<double>> xs, ws;
  for (const auto& r : table.rows) {
    const QuadratureSetting s{r[0], r[1], r[2]};
    if (t.settings.empty() || !(t.settings.back() == s)) {
      s.validate();
      t.settings.push_back(s);
      xs.emplace_back();
      ws.emplace_back();
    }
    if (r[4] < 0.0) throw Error(ErrorKind::Parse, "negative marginal value");
    xs.back().push_back(r[3]);
    ws.back().push_back(r[4]);
  }
  if (t.settings.empty()) throw Error(ErrorKind::EmptySchedule, "tomogram has no rows");
  t.x_grid = detail::grid_from_points(xs.front());
  t.values.resize(static_cast<Eigen::Index>(t.settings.size()), static_cast<Eigen::Index>(t.x_grid.n));
  for (std::size_t k = 0; k < t.settings.size(); ++k) {
    if (xs[k] != xs.front()) throw Error(ErrorKind::Parse, "tomogram rows use different x grids");
    for (std::size_t i = 0; i < t.x_grid.n; ++i) t.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = ws[k][i];
  }
  return t;
}

inline Tomogram read_tomogram_csv(const std::string& path) { return tomogram_from_table(read_csv(path)); }

}  // namespace symplectomo
