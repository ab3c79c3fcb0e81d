// states.hpp
// Analytic one- and two-mode states, their truncated number-basis density
// matrices and their Wigner functions (normalized to 2*pi per mode).

#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "symplectomo/core.hpp"
#include "symplectomo/fock.hpp"

namespace symplectomo {

inline constexpr double kDefaultTraceTolerance = 1e-6;
inline constexpr std::size_t kDefaultFockDim = 40;

// ---------------------------------------------------------------------------
// One-mode states

struct Vacuum {};

struct NumberState {
  unsigned n = 0;
};

struct Coherent {
  Complex alpha;
};

/// (|a+ib> + |a-ib>) / {2[1 + cos(2ab) exp(-2b^2)]}^{1/2}, coherent amplitudes.
struct EvenCat {
  double a = 0.0;
  double b = 0.0;
};

/// Normalized superposition |gamma1> + |gamma2> of two coherent states.
struct CoherentPair {
  Complex gamma1;
  Complex gamma2;
};

/// Thermal state with lambda = tanh(hbar omega / 2kT) in (0, 1].
struct Thermal {
  double lambda = 1.0;
};

struct Custom {
  FockDensityMatrix rho;
};

using OneModeState = std::variant<Vacuum, NumberState, Coherent, EvenCat, CoherentPair, Thermal, Custom>;

inline std::string describe(const OneModeState& state) {
  struct Visitor {
    std::string operator()(const Vacuum&) const { return "vacuum"; }
    std::string operator()(const NumberState& s) const { return "fock:n=" + std::to_string(s.n); }
    std::string operator()(const Coherent& s) const {
      return "coherent:re=" + format_double(s.alpha.real()) + ",im=" + format_double(s.alpha.imag());
    }
    std::string operator()(const EvenCat& s) const {
      return "cat:a=" + format_double(s.a) + ",b=" + format_double(s.b);
    }
    std::string operator()(const CoherentPair& s) const {
      return "pair:re1=" + format_double(s.gamma1.real()) + ",im1=" + format_double(s.gamma1.imag()) +
             ",re2=" + format_double(s.gamma2.real()) + ",im2=" + format_double(s.gamma2.imag());
    }
    std::string operator()(const Thermal& s) const { return "thermal:lambda=" + format_double(s.lambda); }
    std::string operator()(const Custom& s) const { return "custom:dim=" + std::to_string(s.rho.dim()); }
  };
  return std::visit(Visitor{}, state);
}

inline void validate(const OneModeState& state) {
  if (const auto* t = std::get_if<Thermal>(&state)) {
    if (!(t->lambda > 0.0 && t->lambda <= 1.0)) {
      throw Error(ErrorKind::InvalidParameter, "thermal lambda must lie in (0, 1]");
    }
  }
}

/// Thermal Boltzmann ratio exp(-hbar omega / kT) = (1 - lambda) / (1 + lambda).
inline double thermal_ratio(double lambda) { return (1.0 - lambda) / (1.0 + lambda); }

// ---------------------------------------------------------------------------
// Superpositions of (multi-mode) coherent states. Coherent, cat and pair
// states of one mode and the two-mode cats all reduce to this form.

template <std::size_t Modes>
struct CoherentTerm {
  Complex coeff;
  std::array<Complex, Modes> amp;
};

template <std::size_t Modes>
using CoherentSuperposition = std::vector<CoherentTerm<Modes>>;

/// <A|B> for multi-mode coherent states.
template <std::size_t Modes>
Complex coherent_overlap(const std::array<Complex, Modes>& a, const std::array<Complex, Modes>& b) {
  Complex e = 0.0;
  for (std::size_t j = 0; j < Modes; ++j) {
    e += -0.5 * std::norm(a[j]) - 0.5 * std::norm(b[j]) + std::conj(a[j]) * b[j];
  }
  return std::exp(e);
}

template <std::size_t Modes>
double norm_squared(const CoherentSuperposition<Modes>& s) {
  Complex total = 0.0;
  for (const auto& k : s) {
    for (const auto& l : s) total += std::conj(l.coeff) * k.coeff * coherent_overlap(l.amp, k.amp);
  }
  return total.real();
}

/// Wigner function of a superposition, before taking the real part. The
/// cross term for |A><B| is 2 exp[-2|a|^2 + 2 A a* + 2 B* a - A B* - |A|^2/2 - |B|^2/2]
/// per mode, with a = (q + i p)/sqrt(2).
template <std::size_t Modes>
Complex superposition_wigner(const CoherentSuperposition<Modes>& s, const std::array<double, Modes>& q,
                             const std::array<double, Modes>& p) {
  Complex total = 0.0;
  for (const auto& k : s) {
    for (const auto& l : s) {
      Complex e = 0.0;
      double pref = 1.0;
      for (std::size_t j = 0; j < Modes; ++j) {
        const Complex a(q[j] / kSqrt2, p[j] / kSqrt2);
        const Complex A = k.amp[j];
        const Complex B = l.amp[j];
        e += -2.0 * std::norm(a) + 2.0 * A * std::conj(a) + 2.0 * std::conj(B) * a - A * std::conj(B) -
             0.5 * std::norm(A) - 0.5 * std::norm(B);
        pref *= 2.0;
      }
      total += k.coeff * std::conj(l.coeff) * pref * std::exp(e);
    }
  }
  return total / norm_squared(s);
}

/// Position-representation wavefunction <x|beta> of a one-mode coherent state.
inline Complex coherent_wavefunction(Complex beta, double x) {
  static const double norm = std::pow(kPi, -0.25);
  return norm * std::exp(-0.5 * x * x + kSqrt2 * beta * x - 0.5 * beta * beta - 0.5 * std::norm(beta));
}

inline CoherentSuperposition<1> pair_superposition(Complex g1, Complex g2) {
  return {{Complex(1.0), {g1}}, {Complex(1.0), {g2}}};
}

/// The coherent-superposition form of a state, if it has one.
inline std::optional<CoherentSuperposition<1>> as_superposition(const OneModeState& state) {
  if (std::holds_alternative<Vacuum>(state)) return CoherentSuperposition<1>{{Complex(1.0), {Complex(0.0)}}};
  if (const auto* c = std::get_if<Coherent>(&state)) return CoherentSuperposition<1>{{Complex(1.0), {c->alpha}}};
  if (const auto* c = std::get_if<EvenCat>(&state)) {
    return pair_superposition(Complex(c->a, c->b), Complex(c->a, -c->b));
  }
  if (const auto* c = std::get_if<CoherentPair>(&state)) return pair_superposition(c->gamma1, c->gamma2);
  return std::nullopt;
}

/// EvenCat normalization {2[1 + cos(2ab) exp(-2b^2)]}^{-1/2}.
inline double even_cat_normalization(double a, double b) {
  return 1.0 / std::sqrt(2.0 * (1.0 + std::cos(2.0 * a * b) * std::exp(-2.0 * b * b)));
}

// ---------------------------------------------------------------------------
// Density matrices

inline FockDensityMatrix density_matrix(const OneModeState& state, std::size_t dim = kDefaultFockDim) {
  if (dim == 0) throw Error(ErrorKind::InvalidParameter, "dim must be >= 1");
  validate(state);
  const auto n = static_cast<Eigen::Index>(dim);
  ComplexMatrix rho = ComplexMatrix::Zero(n, n);

  if (const auto* s = std::get_if<NumberState>(&state)) {
    if (s->n >= dim) throw Error(ErrorKind::TruncationTooSmall, "number state exceeds truncation");
    rho(s->n, s->n) = 1.0;
    return FockDensityMatrix(rho);
  }
  if (const auto* t = std::get_if<Thermal>(&state)) {
    const double r = thermal_ratio(t->lambda);
    double pop = 1.0 - r;
    for (Eigen::Index k = 0; k < n; ++k) {
      rho(k, k) = pop;
      pop *= r;
    }
    return FockDensityMatrix(rho);
  }
  if (const auto* c = std::get_if<Custom>(&state)) {
    const auto m = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(c->rho.dim()));
    rho.topLeftCorner(m, m) = c->rho.matrix().topLeftCorner(m, m);
    return FockDensityMatrix(rho);
  }

  const auto sup = as_superposition(state);
  ComplexVector psi = ComplexVector::Zero(n);
  for (const auto& term : *sup) psi += term.coeff * coherent_coefficients(term.amp[0], dim);
  psi /= std::sqrt(norm_squared(*sup));
  const double captured = psi.squaredNorm();
  if (captured < 1.0 - kDefaultTraceTolerance) {
    throw Error(ErrorKind::TruncationTooSmall,
                "truncated trace " + format_double(captured) + " at dim " + std::to_string(dim));
  }
  rho = psi * psi.adjoint();
  return FockDensityMatrix(rho);
}

// ---------------------------------------------------------------------------
// Wigner functions

inline double wigner(const OneModeState& state, double q, double p) {
  validate(state);
  const double r2 = q * q + p * p;
  if (std::holds_alternative<Vacuum>(state)) return 2.0 * std::exp(-r2);
  if (const auto* t = std::get_if<Thermal>(&state)) return 2.0 * t->lambda * std::exp(-t->lambda * r2);
  if (const auto* s = std::get_if<NumberState>(&state)) {
    const double sign = (s->n % 2) ? -1.0 : 1.0;
    return 2.0 * sign * std::exp(-r2) * laguerre(s->n, 0.0, 2.0 * r2);
  }
  if (std::holds_alternative<Custom>(state)) {
    throw Error(ErrorKind::UnsupportedVariant, "Wigner evaluation of a custom density matrix");
  }
  return superposition_wigner<1>(*as_superposition(state), {q}, {p}).real();
}

// ---------------------------------------------------------------------------
// Two-mode states. Phase-space ordering is (q1, q2, p1, p2).

using Vector4 = Eigen::Vector4d;
using Matrix4 = Eigen::Matrix4d;

/// Real symmetric positive definite 4x4 dispersion matrix.
class CovarianceMatrix {
 public:
  CovarianceMatrix() : m_(0.5 * Matrix4::Identity()) {}

  explicit CovarianceMatrix(const Matrix4& m) : m_(m) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw Error(ErrorKind::InvalidParameter, "covariance matrix must be symmetric");
    }
    m_ = 0.5 * (m + m.transpose());
    Eigen::LLT<Matrix4> llt(m_);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::InvalidParameter, "covariance matrix must be positive definite");
    }
  }

  /// Builds from the 10 independent upper-triangle entries, row by row.
  static CovarianceMatrix from_upper(const std::array<double, 10>& u) {
    Matrix4 m;
    std::size_t k = 0;
    for (int i = 0; i < 4; ++i) {
      for (int j = i; j < 4; ++j) {
        m(i, j) = u[k];
        m(j, i) = u[k];
        ++k;
      }
    }
    return CovarianceMatrix(m);
  }

  const Matrix4& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Matrix4 m_;
};

struct Gaussian2 {
  CovarianceMatrix cov;
  Vector4 means = Vector4::Zero();
};

enum class Parity { Plus, Minus };

/// N(|A> + parity |-A>) with A = (A1, A2).
struct TwoModeCat {
  std::array<Complex, 2> amp;
  Parity parity = Parity::Plus;
};

struct Product {
  OneModeState mode1;
  OneModeState mode2;
};

using TwoModeState = std::variant<Gaussian2, TwoModeCat, Product>;

/// N_+ = e^{|A|^2/2} / (2 sqrt(cosh|A|^2)), N_- likewise with sinh.
inline double two_mode_cat_normalization(const TwoModeCat& cat) {
  const double a2 = std::norm(cat.amp[0]) + std::norm(cat.amp[1]);
  if (cat.parity == Parity::Minus) {
    if (a2 == 0.0) throw Error(ErrorKind::InvalidParameter, "odd two-mode cat needs |A| > 0");
    return std::exp(0.5 * a2) / (2.0 * std::sqrt(std::sinh(a2)));
  }
  return std::exp(0.5 * a2) / (2.0 * std::sqrt(std::cosh(a2)));
}

inline CoherentSuperposition<2> as_superposition(const TwoModeCat& cat) {
  two_mode_cat_normalization(cat);
  const double sign = cat.parity == Parity::Plus ? 1.0 : -1.0;
  return {{Complex(1.0), cat.amp}, {Complex(sign), {-cat.amp[0], -cat.amp[1]}}};
}

inline std::string describe(const TwoModeState& state) {
  if (const auto* g = std::get_if<Gaussian2>(&state)) {
    std::string s = "gauss2:M=";
    for (int i = 0; i < 4; ++i) {
      for (int j = i; j < 4; ++j) s += (i || j ? ";" : "") + format_double(g->cov(i, j));
    }
    if (!g->means.isZero()) {
      s += ",means=";
      for (int i = 0; i < 4; ++i) s += (i ? ";" : "") + format_double(g->means(i));
    }
    return s;
  }
  if (const auto* c = std::get_if<TwoModeCat>(&state)) {
    return "cat2:re1=" + format_double(c->amp[0].real()) + ",im1=" + format_double(c->amp[0].imag()) +
           ",re2=" + format_double(c->amp[1].real()) + ",im2=" + format_double(c->amp[1].imag()) +
           ",parity=" + (c->parity == Parity::Plus ? "plus" : "minus");
  }
  const auto& p = std::get<Product>(state);
  return "product(" + describe(p.mode1) + "|" + describe(p.mode2) + ")";
}

inline double wigner_gaussian(const Gaussian2& g, const Vector4& z) {
  const Vector4 d = z - g.means;
  const Matrix4& m = g.cov.matrix();
  return std::exp(-0.5 * d.dot(m.ldlt().solve(d))) / std::sqrt(m.determinant());
}

/// Two-mode Wigner function, normalized to (2 pi)^2.
inline double wigner_two_mode(const TwoModeState& state, const std::array<double, 2>& q,
                              const std::array<double, 2>& p) {
  if (const auto* g = std::get_if<Gaussian2>(&state)) {
    return wigner_gaussian(*g, Vector4(q[0], q[1], p[0], p[1]));
  }
  if (const auto* c = std::get_if<TwoModeCat>(&state)) {
    return superposition_wigner<2>(as_superposition(*c), q, p).real();
  }
  const auto& prod = std::get<Product>(state);
  return wigner(prod.mode1, q[0], p[0]) * wigner(prod.mode2, q[1], p[1]);
}

/// Two-mode number-basis density matrix, index n1 * d2 + n2.
inline FockDensityMatrix density_matrix_two_mode(const TwoModeState& state, std::size_t d1, std::size_t d2) {
  if (const auto* prod = std::get_if<Product>(&state)) {
    const auto r1 = density_matrix(prod->mode1, d1).matrix();
    const auto r2 = density_matrix(prod->mode2, d2).matrix();
    ComplexMatrix out(r1.rows() * r2.rows(), r1.cols() * r2.cols());
    for (Eigen::Index i = 0; i < r1.rows(); ++i) {
      for (Eigen::Index j = 0; j < r1.cols(); ++j) {
        out.block(i * r2.rows(), j * r2.cols(), r2.rows(), r2.cols()) = r1(i, j) * r2;
      }
    }
    return FockDensityMatrix(out, {d1, d2});
  }
  if (const auto* cat = std::get_if<TwoModeCat>(&state)) {
    const auto sup = as_superposition(*cat);
    ComplexVector psi = ComplexVector::Zero(static_cast<Eigen::Index>(d1 * d2));
    for (const auto& term : sup) {
      const auto c1 = coherent_coefficients(term.amp[0], d1);
      const auto c2 = coherent_coefficients(term.amp[1], d2);
      for (std::size_t i = 0; i < d1; ++i) {
        for (std::size_t j = 0; j < d2; ++j) {
          psi(static_cast<Eigen::Index>(i * d2 + j)) +=
              term.coeff * c1(static_cast<Eigen::Index>(i)) * c2(static_cast<Eigen::Index>(j));
        }
      }
    }
    psi /= std::sqrt(norm_squared(sup));
    if (psi.squaredNorm() < 1.0 - kDefaultTraceTolerance) {
      throw Error(ErrorKind::TruncationTooSmall, "two-mode cat truncated trace too small");
    }
    return FockDensityMatrix(psi * psi.adjoint(), {d1, d2});
  }
  throw Error(ErrorKind::UnsupportedVariant, "number-basis matrix of a two-mode Gaussian");
}

/// Traces out mode 2 (or mode 1) of a two-mode matrix flattened n1 * d2 + n2.
inline FockDensityMatrix partial_trace(const FockDensityMatrix& rho, int keep_mode) {
  if (rho.dims().size() != 2) throw Error(ErrorKind::DimMismatch, "partial trace needs a two-mode matrix");
  const auto d1 = static_cast<Eigen::Index>(rho.dims()[0]);
  const auto d2 = static_cast<Eigen::Index>(rho.dims()[1]);
  const auto& m = rho.matrix();
  if (keep_mode == 1) {
    ComplexMatrix out = ComplexMatrix::Zero(d1, d1);
    for (Eigen::Index i = 0; i < d1; ++i)
      for (Eigen::Index j = 0; j < d1; ++j)
        for (Eigen::Index k = 0; k < d2; ++k) out(i, j) += m(i * d2 + k, j * d2 + k);
    return FockDensityMatrix(out);
  }
  ComplexMatrix out = ComplexMatrix::Zero(d2, d2);
  for (Eigen::Index i = 0; i < d2; ++i)
    for (Eigen::Index j = 0; j < d2; ++j)
      for (Eigen::Index k = 0; k < d1; ++k) out(i, j) += m(k * d2 + i, k * d2 + j);
  return FockDensityMatrix(out);
}

}  // namespace symplectomo
