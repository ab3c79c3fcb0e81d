// kernels.hpp
// Matrix elements of the reconstruction kernel
//   K(x, mu, nu) = (z^2 / 2pi) e^{-izx} exp[iz(mu q + nu p)]
// in the number, coherent and coordinate bases, and the rotated-quadrature
// (homodyne) kernel obtained by integrating over the radius.

#pragma once

#include <vector>

#include "symplectomo/core.hpp"
#include "symplectomo/fock.hpp"
#include "symplectomo/settings.hpp"

namespace symplectomo {

struct KernelScale {
  double z = 1.0;

  void validate() const {
    if (z == 0.0 || !std::isfinite(z)) throw Error(ErrorKind::InvalidParameter, "kernel scale z must be nonzero");
  }
};

/// exp[iz(mu q + nu p)] = D(xi) with xi = (iz/sqrt2)(mu + i nu).
inline Complex kernel_displacement(double mu, double nu, double z) {
  return Complex(-z * nu, z * mu) / kSqrt2;
}

inline Complex kernel_prefactor(double x, double z) { return z * z / kTwoPi * std::exp(Complex(0.0, -z * x)); }

/// <n_row| K |n_col>. Degenerate settings are allowed.
inline Complex kernel_number(unsigned n_row, unsigned n_col, double x, const QuadratureSetting& setting,
                             const KernelScale& scale) {
  scale.validate();
  return kernel_prefactor(x, scale.z) *
         displacement_element(n_row, n_col, kernel_displacement(setting.mu, setting.nu, scale.z));
}

/// Full dim x dim number-basis matrix of K.
inline ComplexMatrix kernel_matrix(double x, const QuadratureSetting& setting, const KernelScale& scale,
                                   std::size_t dim) {
  scale.validate();
  return kernel_prefactor(x, scale.z) * displacement_matrix(kernel_displacement(setting.mu, setting.nu, scale.z), dim);
}

/// <alpha| K |beta>, normal-ordered closed form.
inline Complex kernel_coherent(Complex alpha, Complex beta, double x, const QuadratureSetting& setting,
                               const KernelScale& scale) {
  scale.validate();
  const double z = scale.z;
  const double s2 = setting.mu * setting.mu + setting.nu * setting.nu;
  const Complex a = Complex(-setting.nu, setting.mu) * (z / kSqrt2);  // coefficient of a^dag
  const Complex b = Complex(setting.nu, setting.mu) * (z / kSqrt2);   // coefficient of a
  const Complex e = a * std::conj(alpha) + b * beta - z * z * s2 / 4.0 - 0.5 * std::norm(alpha) -
                    0.5 * std::norm(beta) + std::conj(alpha) * beta;
  return kernel_prefactor(x, z) * std::exp(e);
}

/// Coordinate-basis element <q_row| K |q_col> = phase * delta(residual).
struct CoordinateKernel {
  Complex phase;
  double residual = 0.0;
};

inline CoordinateKernel kernel_coordinate_phase(double q_row, double q_col, double x, const QuadratureSetting& setting,
                                                const KernelScale& scale) {
  scale.validate();
  const double z = scale.z;
  const Complex phase =
      kernel_prefactor(x, z) * std::exp(Complex(0.0, z * z * setting.mu * setting.nu / 2.0 + z * setting.mu * q_row));
  return {phase, q_col - z * setting.nu - q_row};
}

// ---------------------------------------------------------------------------
// Homodyne kernel

struct HomodyneSetting {
  double phi = 0.0;
  double x_phi = 0.0;
};

/// Radial integration of the homodyne kernel: trapezoid on [0, r_cutoff]
/// with Gaussian regulator exp(-eps r^2).
struct RadialRule {
  double r_cutoff = 12.0;
  double eps = 1e-4;
  std::size_t n = 4001;

  void validate() const {
    if (!(r_cutoff > 0.0) || !(eps >= 0.0) || n < 3) {
      throw Error(ErrorKind::InvalidParameter, "radial rule needs r_cutoff > 0, eps >= 0, n >= 3");
    }
  }

  /// Index where the tail used for the cutoff check begins (last 10%).
  std::size_t tail_start() const { return (n - 1) - (n - 1) / 10; }
};

inline constexpr double kCutoffTailTolerance = 1e-3;

/// exp(-i r x_phi) = D(xi) with xi = -i r e^{i phi} / sqrt2.
inline Complex homodyne_displacement(double r, double phi) { return Complex(0.0, -r / kSqrt2) * std::polar(1.0, phi); }

/// <n_row| K_phi(x_phi) |n_col> with the symmetric radial form
///   K_phi(x) = (1/4pi) int_0^R r e^{-eps r^2} [e^{irx} D(xi) + e^{-irx} D(-xi)] dr,
/// which is Hermitian and averages to the density operator over phi in [0, 2pi).
inline Complex kernel_homodyne_number(unsigned n_row, unsigned n_col, const HomodyneSetting& h, double r_cutoff,
                                      double eps, std::size_t n_points = 4001) {
  const RadialRule rule{r_cutoff, eps, n_points};
  rule.validate();
  const double dr = rule.r_cutoff / static_cast<double>(rule.n - 1);
  const std::size_t tail = rule.tail_start();
  Complex sum = 0.0;
  double total_abs = 0.0, tail_abs = 0.0;
  for (std::size_t i = 0; i < rule.n; ++i) {
    const double r = dr * static_cast<double>(i);
    const double wt = (i == 0 || i + 1 == rule.n) ? 0.5 : 1.0;
    const Complex xi = homodyne_displacement(r, h.phi);
    const Complex e = std::exp(Complex(0.0, r * h.x_phi));
    const Complex f = r * std::exp(-rule.eps * r * r) *
                      (e * displacement_element(n_row, n_col, xi) + std::conj(e) * displacement_element(n_row, n_col, -xi));
    sum += wt * f;
    total_abs += wt * std::abs(f);
    if (i >= tail) tail_abs += wt * std::abs(f);
  }
  if (total_abs > 0.0 && tail_abs > kCutoffTailTolerance * total_abs) {
    throw Error(ErrorKind::CutoffTooSmall, "radial tail carries " + format_double(tail_abs / total_abs) +
                                               " of the homodyne kernel integrand");
  }
  return sum * dr / (4.0 * kPi);
}

}  // namespace symplectomo
