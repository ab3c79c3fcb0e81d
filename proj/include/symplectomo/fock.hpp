// fock.hpp
// Truncated number-basis objects: the density-matrix type, coherent-state
// amplitudes and displacement-operator matrix elements.

#pragma once

#include <Eigen/Dense>

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "symplectomo/core.hpp"

namespace symplectomo {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Complex dim x dim matrix in the number basis, row = bra index n, column =
/// ket index m. Hermiticity is enforced on construction by taking the
/// Hermitian part of the input. Two-mode matrices carry their per-mode
/// dimensions and are flattened mode-1-major: index = n1 * d2 + n2.
class FockDensityMatrix {
 public:
  FockDensityMatrix() = default;

  explicit FockDensityMatrix(const ComplexMatrix& m, std::vector<std::size_t> dims = {})
      : m_(0.5 * (m + m.adjoint())), dims_(std::move(dims)) {
    if (m.rows() != m.cols() || m.rows() == 0) {
      throw Error(ErrorKind::InvalidParameter, "density matrix must be square and non-empty");
    }
    if (dims_.empty()) dims_ = {static_cast<std::size_t>(m.rows())};
    std::size_t prod = 1;
    for (auto d : dims_) prod *= d;
    if (prod != static_cast<std::size_t>(m.rows())) {
      throw Error(ErrorKind::DimMismatch, "mode dimensions do not multiply to the matrix size");
    }
    for (Eigen::Index i = 0; i < m_.rows(); ++i) m_(i, i) = Complex(m_(i, i).real(), 0.0);
  }

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(std::size_t n, std::size_t m) const {
    return m_(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  }
  double trace() const { return m_.trace().real(); }

  Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }
  double min_eigenvalue() const { return eigenvalues().minCoeff(); }

 private:
  ComplexMatrix m_;
  std::vector<std::size_t> dims_;
};

/// Largest |A - A^dag| entry.
inline double hermiticity_residual(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Coherent-state amplitudes <n|alpha> for n < dim, computed in log domain.
inline ComplexVector coherent_coefficients(Complex alpha, std::size_t dim) {
  ComplexVector c(static_cast<Eigen::Index>(dim));
  const double r = std::abs(alpha);
  const double theta = std::arg(alpha);
  for (std::size_t n = 0; n < dim; ++n) {
    if (r == 0.0) {
      c(static_cast<Eigen::Index>(n)) = n == 0 ? Complex(1.0) : Complex(0.0);
      continue;
    }
    const double logmag =
        -0.5 * r * r + static_cast<double>(n) * std::log(r) - 0.5 * log_factorial(static_cast<unsigned>(n));
    c(static_cast<Eigen::Index>(n)) = std::polar(std::exp(logmag), static_cast<double>(n) * theta);
  }
  return c;
}

/// <alpha| rho |beta> for a truncated number-basis matrix.
inline Complex coherent_element(const ComplexMatrix& rho, Complex alpha, Complex beta) {
  const auto ca = coherent_coefficients(alpha, static_cast<std::size_t>(rho.rows()));
  const auto cb = coherent_coefficients(beta, static_cast<std::size_t>(rho.rows()));
  return ca.dot(rho * cb);  // dot() conjugates the first argument
}

inline Complex coherent_element(const FockDensityMatrix& rho, Complex alpha, Complex beta) {
  return coherent_element(rho.matrix(), alpha, beta);
}

/// <n| D(xi) |m> with D(xi) = exp(xi a^dag - conj(xi) a).
///
/// For n >= m: sqrt(m!/n!) xi^{n-m} e^{-|xi|^2/2} L_m^{(n-m)}(|xi|^2); the
/// n < m case follows from <n|D(xi)|m> = conj(<m|D(-xi)|n>).
inline Complex displacement_element(unsigned n, unsigned m, Complex xi) {
  if (n < m) return std::conj(displacement_element(m, n, -xi));
  const unsigned d = n - m;
  const double t = std::norm(xi);
  const double lag = laguerre(m, static_cast<double>(d), t);
  if (d == 0) return Complex(std::exp(-0.5 * t) * lag);
  if (t == 0.0) return Complex(0.0);
  const double logmag = 0.5 * (log_factorial(m) - log_factorial(n)) + 0.5 * d * std::log(t) - 0.5 * t;
  return std::polar(std::exp(logmag) * lag, static_cast<double>(d) * std::arg(xi));
}

/// Full dim x dim matrix of D(xi), one Laguerre sweep per diagonal.
inline ComplexMatrix displacement_matrix(Complex xi, std::size_t dim) {
  ComplexMatrix out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const double t = std::norm(xi);
  const double log_t = t > 0.0 ? std::log(t) : 0.0;
  const double theta = std::arg(xi);
  const double damp = -0.5 * t;
  std::vector<double> lag;
  for (std::size_t d = 0; d < dim; ++d) {
    const unsigned m_max = static_cast<unsigned>(dim - 1 - d);
    laguerre_sequence(m_max, static_cast<double>(d), t, lag);
    const Complex phase_up = std::polar(1.0, static_cast<double>(d) * theta);
    // (-conj(xi))^d carries phase (-1)^d e^{-i d theta}
    const Complex phase_down = (d % 2 ? -1.0 : 1.0) * std::conj(phase_up);
    for (unsigned m = 0; m <= m_max; ++m) {
      const unsigned n = m + static_cast<unsigned>(d);
      double mag;
      if (d == 0) {
        mag = std::exp(damp) * lag[m];
      } else if (t == 0.0) {
        mag = 0.0;
      } else {
        mag = std::exp(0.5 * (log_factorial(m) - log_factorial(n)) + 0.5 * d * log_t + damp) * lag[m];
      }
      out(n, m) = mag * phase_up;
      if (d > 0) out(m, n) = mag * phase_down;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON: {"dim": d, ["dims": [d1, d2],] "re": [[...]], "im": [[...]]}, full
// row-major matrix, 17 significant digits.

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {
inline void write_matrix_part(std::ostringstream& os, const ComplexMatrix& m, bool imag) {
  os << '[';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) os << ',';
    os << '[';
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << format_double(imag ? m(r, c).imag() : m(r, c).real());
    }
    os << ']';
  }
  os << ']';
}
}  // namespace detail

/// Serialises the matrix members only (no enclosing braces), for embedding.
inline std::string density_json_fields(const FockDensityMatrix& rho) {
  std::ostringstream os;
  os << "\"dim\":" << rho.dim();
  if (rho.dims().size() > 1) {
    os << ",\"dims\":[";
    for (std::size_t i = 0; i < rho.dims().size(); ++i) os << (i ? "," : "") << rho.dims()[i];
    os << ']';
  }
  os << ",\"re\":";
  detail::write_matrix_part(os, rho.matrix(), false);
  os << ",\"im\":";
  detail::write_matrix_part(os, rho.matrix(), true);
  return os.str();
}

inline std::string to_json(const FockDensityMatrix& rho) { return "{" + density_json_fields(rho) + "}\n"; }

}  // namespace symplectomo
