// reconstruct.hpp
// One-mode density-matrix reconstruction: quadrature integration of
//   rho = int dx dmu dnu w(x, mu, nu) K(x, mu, nu)
// over a polar (mu, nu) grid, the sample-averaging estimator, the homodyne
// variant and comparison measures.
//
// Every tomogram row or sample batch fixes the marginal on a whole ray of
// (mu, nu) through scaling homogeneity, so the x-integral for a point at
// radius r on the ray through the row's setting (radius rho_k) is
//   C_k(u) = int dX w_k(X) exp[-i (u / rho_k)(X - delta_k)],  u = |z| r.
// The opposite ray is covered by parity: C(-u) = conj C(u).

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "symplectomo/core.hpp"
#include "symplectomo/fock.hpp"
#include "symplectomo/kernels.hpp"
#include "symplectomo/marginals.hpp"
#include "symplectomo/settings.hpp"
#include "symplectomo/states.hpp"

namespace symplectomo {

enum class Projection { None, Hermitize, HermitizeClip };

inline const char* to_string(Projection p) {
  switch (p) {
    case Projection::None: return "none";
    case Projection::Hermitize: return "hermitize";
    case Projection::HermitizeClip: return "hermitize_and_clip";
  }
  return "unknown";
}

inline Projection parse_projection(const std::string& s) {
  if (s == "none") return Projection::None;
  if (s == "hermitize") return Projection::Hermitize;
  if (s == "hermitize_and_clip" || s == "hermitize_clip" || s == "hermitize_and_clip_negative_eigenvalues" || s == "clip") {
    return Projection::HermitizeClip;
  }
  throw Error(ErrorKind::Parse, "unknown projection '" + s + "'");
}

inline constexpr double kMinDampingRadius = 6.0;
inline constexpr double kTraceUnderresolved = 5e-2;

struct ReconstructionConfig {
  KernelScale scale;
  std::size_t dim = 40;
  std::optional<double> r_max;  // default 8 / |z|
  std::size_t n_r = 64;
  std::size_t n_phi = 64;
  std::optional<UniformGrid> x_integration;  // grid for evaluator input
  Projection projection = Projection::Hermitize;

  double radius() const { return r_max ? *r_max : 8.0 / std::abs(scale.z); }

  void validate() const {
    if (scale.z == 0.0 || !std::isfinite(scale.z)) throw Error(ErrorKind::DegenerateConfig, "z must be nonzero");
    if (dim == 0 || n_r == 0 || n_phi == 0) throw Error(ErrorKind::DegenerateConfig, "dim, n_r and n_phi must be >= 1");
    if (!(radius() * std::abs(scale.z) >= kMinDampingRadius)) {
      throw Error(ErrorKind::DegenerateConfig, "r_max * |z| must be >= 6");
    }
    if (x_integration) x_integration->validate();
  }
};

struct ReconstructionReport {
  FockDensityMatrix rho;
  ComplexMatrix raw;  // before projection
  double trace_error = 0.0;
  double hermiticity_residual = 0.0;
  double min_eigenvalue = 0.0;
  std::size_t settings_used = 0;
  std::size_t samples_used = 0;
  Projection projection = Projection::Hermitize;
  std::size_t clipped_eigenvalues = 0;

  /// Density-matrix fields followed by the scalar diagnostics.
  std::string to_json() const {
    std::ostringstream os;
    os << '{' << density_json_fields(rho) << ",\"trace_error\":" << format_double(trace_error)
       << ",\"hermiticity_residual\":" << format_double(hermiticity_residual)
       << ",\"min_eigenvalue\":" << format_double(min_eigenvalue) << ",\"settings_used\":" << settings_used
       << ",\"samples_used\":" << samples_used << ",\"projection\":\"" << to_string(projection)
       << "\",\"clipped_eigenvalues\":" << clipped_eigenvalues << "}\n";
    return os.str();
  }
};

/// Builds the report from a raw estimate: diagnostics first, then projection.
inline ReconstructionReport finish_report(ComplexMatrix raw, Projection projection, std::vector<std::size_t> dims = {}) {
  ReconstructionReport rep;
  rep.trace_error = std::abs(raw.trace().real() - 1.0);
  rep.hermiticity_residual = hermiticity_residual(raw);
  rep.projection = projection;
  ComplexMatrix m = 0.5 * (raw + raw.adjoint());
  if (projection == Projection::HermitizeClip) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (ev(i) < 0.0) {
        ev(i) = 0.0;
        ++rep.clipped_eigenvalues;
      }
    }
    if (ev.sum() > 0.0) ev /= ev.sum();
    m = es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  }
  rep.rho = FockDensityMatrix(m, std::move(dims));
  rep.min_eigenvalue = rep.rho.min_eigenvalue();
  rep.raw = std::move(raw);
  return rep;
}

namespace detail {

/// One ray of the (mu, nu) plane: its direction, angular quadrature weight
/// and the characteristic function at the radial nodes.
struct RayData {
  double phi = 0.0;
  double weight = 0.0;
  std::vector<Complex> chi;
};

/// chi(u_i) = sum_j h_j w_j exp[-i (u_i / rho)(x_j - delta)] over a uniform grid.
inline std::vector<Complex> characteristic_from_row(const UniformGrid& grid, const double* values, std::ptrdiff_t stride,
                                                    const QuadratureSetting& s, const std::vector<double>& u) {
  const double rho = std::sqrt(s.norm2());
  const auto h = trapezoid_weights(grid);
  std::vector<Complex> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double k = u[i] / rho;
    // phase recurrence along the uniform grid
    const Complex step = std::polar(1.0, -k * grid.step());
    Complex ph = std::polar(1.0, -k * (grid.lo - s.delta));
    Complex acc = 0.0;
    for (std::size_t j = 0; j < grid.n; ++j) {
      acc += h[j] * values[static_cast<std::ptrdiff_t>(j) * stride] * ph;
      ph *= step;
      if ((j & 63) == 63) ph /= std::abs(ph);
    }
    out[i] = acc;
  }
  return out;
}

inline std::vector<Complex> characteristic_from_samples(const std::vector<double>& xs, const QuadratureSetting& s,
                                                        const std::vector<double>& u) {
  const double rho = std::sqrt(s.norm2());
  std::vector<Complex> out(u.size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double k = u[i] / rho;
    Complex acc = 0.0;
    for (double x : xs) acc += std::polar(1.0, -k * (x - s.delta));
    out[i] = acc / static_cast<double>(xs.size());
  }
  return out;
}

/// rho_nm = (1/2pi) sum_i wu_i u_i B_nm(u_i) i^d sum_k w_k e^{i d phi_k} [chi_k + (-1)^d conj chi_k],
/// with B = D(u / sqrt2) and d = n - m. The radial rule may carry a regulator
/// already folded into `radial_weight`.
inline ComplexMatrix assemble_one_mode(const std::vector<RayData>& rays, const std::vector<double>& u,
                                       const std::vector<double>& radial_weight, std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  const auto n_d = 2 * n - 1;
  // angular sums S(i, d + n - 1)
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(u.size()), n_d);
  for (const auto& ray : rays) {
    for (Eigen::Index d = -(n - 1); d <= n - 1; ++d) {
      const Complex rot = std::polar(ray.weight, static_cast<double>(d) * ray.phi);
      const double sign = (d % 2 == 0) ? 1.0 : -1.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        S(static_cast<Eigen::Index>(i), d + n - 1) += rot * (ray.chi[i] + sign * std::conj(ray.chi[i]));
      }
    }
  }
  static const Complex ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const ComplexMatrix zero = ComplexMatrix::Zero(n, n);
  return chunked_sum(u.size(), zero, [&](std::size_t i) {
    ComplexMatrix term = displacement_matrix(Complex(u[i] / kSqrt2, 0.0), dim);
    const double w = radial_weight[i] * u[i] / kTwoPi;
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) {
        const Eigen::Index d = a - b;
        term(a, b) *= w * ipow[((d % 4) + 4) % 4] * S(static_cast<Eigen::Index>(i), d + n - 1);
      }
    }
    return term;
  });
}

inline double setting_angle(const QuadratureSetting& s) { return std::atan2(s.nu, s.mu); }

}  // namespace detail

/// Reconstruction from a tabulated tomogram. Each row gets angular weight
/// pi / (number of rows), which is exact for rows evenly spread over [0, pi)
/// or [0, 2pi).
inline ReconstructionReport reconstruct_from_tomogram(const Tomogram& t, const ReconstructionConfig& cfg) {
  cfg.validate();
  if (t.settings.empty()) throw Error(ErrorKind::EmptyBatches, "tomogram has no rows");
  const auto rule = gauss_legendre(cfg.n_r, 0.0, cfg.radius() * std::abs(cfg.scale.z));
  const double wphi = kPi / static_cast<double>(t.settings.size());
  auto rays = parallel_map(t.settings.size(), [&](std::size_t k) {
    const auto& s = t.settings[k];
    s.validate();
    const double* row = t.values.data() + k;
    return detail::RayData{detail::setting_angle(s), wphi,
                           detail::characteristic_from_row(t.x_grid, row, t.values.rows(), s, rule.nodes)};
  });
  auto raw = detail::assemble_one_mode(rays, rule.nodes, rule.weights, cfg.dim);
  const double tr = raw.trace().real();
  if (std::abs(tr - 1.0) > kTraceUnderresolved) {
    throw Error(ErrorKind::GridUnderresolved, "raw trace " + format_double(tr) + " deviates from 1");
  }
  auto rep = finish_report(std::move(raw), cfg.projection);
  rep.settings_used = t.settings.size();
  return rep;
}

/// Marginal given as a function of (X, setting).
using MarginalEvaluator = std::function<double(double, const QuadratureSetting&)>;

/// Tabulates the evaluator on n_phi unit-circle settings over cfg.x_integration
/// (default [-10, 10], 1601 points), then reconstructs.
inline ReconstructionReport reconstruct_from_tomogram(const MarginalEvaluator& w, const ReconstructionConfig& cfg) {
  cfg.validate();
  const UniformGrid grid = cfg.x_integration.value_or(UniformGrid{-10.0, 10.0, 1601});
  Tomogram t{unit_circle_settings(cfg.n_phi), grid, Eigen::MatrixXd(cfg.n_phi, grid.n)};
  const auto rows = parallel_map(cfg.n_phi, [&](std::size_t k) {
    std::vector<double> row(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) row[i] = w(grid.at(i), t.settings[k]);
    return row;
  });
  for (std::size_t k = 0; k < cfg.n_phi; ++k) {
    for (std::size_t i = 0; i < grid.n; ++i) t.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = rows[k][i];
  }
  return reconstruct_from_tomogram(t, cfg);
}

/// Exact tomogram of an analytic state on n_phi unit-circle settings and
/// the state's default grid, then reconstruction.
inline ReconstructionReport reconstruct_state(const OneModeState& state, const ReconstructionConfig& cfg) {
  cfg.validate();
  const auto settings = unit_circle_settings(cfg.n_phi);
  const auto grid = cfg.x_integration.value_or(default_x_grid(state, settings));
  return reconstruct_from_tomogram(tabulate_tomogram(state, settings, grid), cfg);
}

/// Sample-averaging estimator. A batch drawn with direction density
/// `weight` (per radian over [0, pi)) gets angular weight 1 / (M weight).
inline ReconstructionReport reconstruct_from_samples(const std::vector<SampleBatch>& batches,
                                                     const ReconstructionConfig& cfg) {
  cfg.validate();
  std::size_t total = 0;
  for (const auto& b : batches) {
    b.validate();
    if (!std::holds_alternative<QuadratureSetting>(b.setting)) {
      throw Error(ErrorKind::UnsupportedVariant, "one-mode estimator given a two-mode batch");
    }
    total += b.outcomes.size();
  }
  if (batches.empty() || total == 0) throw Error(ErrorKind::EmptyBatches, "no samples");
  const auto rule = gauss_legendre(cfg.n_r, 0.0, cfg.radius() * std::abs(cfg.scale.z));
  const double m = static_cast<double>(batches.size());
  auto rays = parallel_map(batches.size(), [&](std::size_t k) {
    const auto& b = batches[k];
    const auto& s = std::get<QuadratureSetting>(b.setting);
    s.validate();
    detail::RayData ray{detail::setting_angle(s), 1.0 / (m * b.weight), {}};
    ray.chi = b.outcomes.empty() ? std::vector<Complex>(rule.nodes.size(), 0.0)
                                 : detail::characteristic_from_samples(b.outcomes, s, rule.nodes);
    if (b.outcomes.empty()) ray.weight = 0.0;
    return ray;
  });
  auto rep = finish_report(detail::assemble_one_mode(rays, rule.nodes, rule.weights, cfg.dim), cfg.projection);
  rep.settings_used = batches.size();
  rep.samples_used = total;
  return rep;
}

// ---------------------------------------------------------------------------
// Homodyne reconstruction (rotation subgroup, radial integral per phase)

namespace detail {
inline ReconstructionReport reconstruct_homodyne_rays(std::vector<RayData> rays, const std::vector<double>& r,
                                                      const RadialRule& rule, std::size_t dim) {
  const double dr = rule.r_cutoff / static_cast<double>(rule.n - 1);
  std::vector<double> w(rule.n);
  for (std::size_t i = 0; i < rule.n; ++i) {
    w[i] = ((i == 0 || i + 1 == rule.n) ? 0.5 : 1.0) * dr * std::exp(-rule.eps * r[i] * r[i]);
  }
  // tail check on |B_nm(r)| times the mean |chi| envelope
  std::vector<double> env(rule.n, 0.0);
  for (const auto& ray : rays) {
    for (std::size_t i = 0; i < rule.n; ++i) env[i] += ray.weight * std::abs(ray.chi[i]);
  }
  const auto n = static_cast<Eigen::Index>(dim);
  const std::size_t tail = rule.tail_start();
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(n, n);
  const auto envelope = [&](std::size_t i) -> Eigen::MatrixXd {
    return (w[i] * r[i] * env[i]) * displacement_matrix(Complex(r[i] / kSqrt2, 0.0), dim).cwiseAbs();
  };
  const Eigen::MatrixXd total = chunked_sum(rule.n, zero, envelope);
  const Eigen::MatrixXd tail_sum =
      chunked_sum(rule.n - tail, zero, [&](std::size_t i) { return envelope(tail + i); });
  const double scale = total.maxCoeff();
  if (scale > 0.0 && tail_sum.maxCoeff() > kCutoffTailTolerance * scale) {
    throw Error(ErrorKind::CutoffTooSmall, "radial tail carries " + format_double(tail_sum.maxCoeff() / scale) +
                                               " of the homodyne integrand; raise r_cutoff or lower dim");
  }
  return finish_report(assemble_one_mode(rays, r, w, dim), Projection::Hermitize);
}

inline std::vector<double> radial_nodes(const RadialRule& rule) {
  std::vector<double> r(rule.n);
  for (std::size_t i = 0; i < rule.n; ++i) r[i] = rule.r_cutoff * static_cast<double>(i) / static_cast<double>(rule.n - 1);
  return r;
}
}  // namespace detail

/// Homodyne estimator from phase-tagged samples. Batch settings give the
/// phase, phi = atan2(nu, mu); outcomes are rescaled to the unit quadrature.
/// The symmetric kernel makes each row's weight 2 / (M weight) over [0, 2pi).
inline ReconstructionReport reconstruct_homodyne(const std::vector<SampleBatch>& batches, std::size_t dim,
                                                 double r_cutoff = 12.0, double eps = 1e-4) {
  const RadialRule rule{r_cutoff, eps, 4001};
  rule.validate();
  if (dim == 0) throw Error(ErrorKind::InvalidParameter, "dim must be >= 1");
  std::size_t total = 0;
  for (const auto& b : batches) {
    b.validate();
    if (!std::holds_alternative<QuadratureSetting>(b.setting)) {
      throw Error(ErrorKind::UnsupportedVariant, "homodyne estimator given a two-mode batch");
    }
    total += b.outcomes.size();
  }
  if (batches.empty() || total == 0) throw Error(ErrorKind::EmptyBatches, "no samples");
  const auto r = detail::radial_nodes(rule);
  const double m = static_cast<double>(batches.size());
  auto rays = parallel_map(batches.size(), [&](std::size_t k) {
    const auto& b = batches[k];
    const auto& s = std::get<QuadratureSetting>(b.setting);
    s.validate();
    detail::RayData ray{detail::setting_angle(s), 1.0 / (m * b.weight), std::vector<Complex>(r.size(), 0.0)};
    if (b.outcomes.empty()) ray.weight = 0.0;
    else ray.chi = detail::characteristic_from_samples(b.outcomes, s, r);
    return ray;
  });
  auto rep = detail::reconstruct_homodyne_rays(std::move(rays), r, rule, dim);
  rep.settings_used = batches.size();
  rep.samples_used = total;
  return rep;
}

/// Homodyne estimator applied to a tabulated tomogram (rows evenly spread in phase).
inline ReconstructionReport reconstruct_homodyne(const Tomogram& t, std::size_t dim, double r_cutoff = 12.0,
                                                 double eps = 1e-4) {
  const RadialRule rule{r_cutoff, eps, 4001};
  rule.validate();
  if (dim == 0) throw Error(ErrorKind::InvalidParameter, "dim must be >= 1");
  if (t.settings.empty()) throw Error(ErrorKind::EmptyBatches, "tomogram has no rows");
  const auto r = detail::radial_nodes(rule);
  const double wphi = kPi / static_cast<double>(t.settings.size());
  auto rays = parallel_map(t.settings.size(), [&](std::size_t k) {
    const auto& s = t.settings[k];
    s.validate();
    return detail::RayData{detail::setting_angle(s), wphi,
                           detail::characteristic_from_row(t.x_grid, t.values.data() + k, t.values.rows(), s, r)};
  });
  auto rep = detail::reconstruct_homodyne_rays(std::move(rays), r, rule, dim);
  rep.settings_used = t.settings.size();
  return rep;
}

// ---------------------------------------------------------------------------
// Comparison

namespace detail {
/// Square roots of eigenvalues, with rounding-level ones (below dim * eps * max)
/// set to zero; otherwise a rank-1 input picks up ~1e-8 per null direction.
inline Eigen::VectorXd sqrt_spectrum(const Eigen::VectorXd& ev) {
  const double cut = static_cast<double>(ev.size()) * std::numeric_limits<double>::epsilon() * std::max(1.0, ev.cwiseAbs().maxCoeff());
  return ev.unaryExpr([cut](double v) { return v > cut ? std::sqrt(v) : 0.0; });
}

inline ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd s = sqrt_spectrum(es.eigenvalues());
  return es.eigenvectors() * s.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

inline void require_same_dim(const FockDensityMatrix& a, const FockDensityMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimMismatch, "dimensions " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
}
}  // namespace detail

/// Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2, clamped to [0, 1].
inline double fidelity(const FockDensityMatrix& a, const FockDensityMatrix& b) {
  detail::require_same_dim(a, b);
  const ComplexMatrix sa = detail::psd_sqrt(a.matrix());
  const ComplexMatrix inner = sa * b.matrix() * sa;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  const double f = detail::sqrt_spectrum(es.eigenvalues()).sum();
  return std::clamp(f * f, 0.0, 1.0);
}

/// (1/2) sum |eigenvalues(a - b)|.
inline double trace_distance(const FockDensityMatrix& a, const FockDensityMatrix& b) {
  detail::require_same_dim(a, b);
  const ComplexMatrix d = a.matrix() - b.matrix();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double max_abs_deviation(const FockDensityMatrix& a, const FockDensityMatrix& b) {
  detail::require_same_dim(a, b);
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Wigner function straight from a tomogram (Fourier inversion over the
// polar (mu, nu) grid):
//   W(q, p) = (1/2pi) int u du dphi C(u, phi) exp[iu(q cos phi + p sin phi)].

inline double wigner_from_tomogram(const Tomogram& t, double q, double p, const ReconstructionConfig& cfg = {}) {
  cfg.validate();
  if (t.settings.empty()) throw Error(ErrorKind::EmptyBatches, "tomogram has no rows");
  const auto rule = gauss_legendre(cfg.n_r, 0.0, cfg.radius() * std::abs(cfg.scale.z));
  const double wphi = kPi / static_cast<double>(t.settings.size());
  const auto parts = parallel_map(t.settings.size(), [&](std::size_t k) {
    const auto& s = t.settings[k];
    const auto chi = detail::characteristic_from_row(t.x_grid, t.values.data() + k, t.values.rows(), s, rule.nodes);
    const double phi = detail::setting_angle(s);
    const double proj = q * std::cos(phi) + p * std::sin(phi);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double u = rule.nodes[i];
      // ray plus its parity image contribute 2 Re
      acc += rule.weights[i] * u * 2.0 * (chi[i] * std::polar(1.0, u * proj)).real();
    }
    return acc;
  });
  double w = 0.0;
  for (double v : parts) w += v;
  return w * wphi / kTwoPi;
}

}  // namespace symplectomo
