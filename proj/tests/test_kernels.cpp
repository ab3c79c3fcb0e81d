#include <gtest/gtest.h>

#include "oracles.hpp"
#include "symplectomo/kernels.hpp"

using namespace symplectomo;

namespace {
/// (z^2/2pi) e^{-izx} exp[iz(mu q + nu p)] from dense q and p matrices.
oracle::CMat dense_kernel(double x, double mu, double nu, double z, std::size_t dim) {
  const std::size_t big = dim + 60;
  const auto a = oracle::annihilation(big);
  const oracle::CMat q = (a + a.adjoint()) / std::sqrt(2.0);
  const oracle::CMat p = (a - a.adjoint()) / Complex(0.0, std::sqrt(2.0));
  const oracle::CMat gen = Complex(0.0, z) * (mu * q + nu * p);
  const oracle::CMat e = gen.exp();
  return (z * z / (2.0 * oracle::pi)) * std::exp(Complex(0.0, -z * x)) *
         e.topLeftCorner(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}
}  // namespace

TEST(KernelNumber, VacuumElement) {
  oracle::Gen gen(41);
  for (int trial = 0; trial < 20; ++trial) {
    const auto [mu, nu] = gen.setting();
    const double x = gen.uniform(-3, 3), z = gen.uniform(0.3, 2.5);
    const Complex ref = z * z / kTwoPi * std::exp(Complex(0.0, -z * x)) * std::exp(-z * z * (mu * mu + nu * nu) / 4.0);
    EXPECT_NEAR(std::abs(kernel_number(0, 0, x, {mu, nu, 0}, {z}) - ref), 0.0, 1e-14);
  }
}

TEST(KernelNumber, FirstOffDiagonalExample) {
  const Complex ref = 1.0 / kTwoPi * std::exp(-0.25) * Complex(0.0, 1.0 / kSqrt2);
  EXPECT_NEAR(std::abs(kernel_number(1, 0, 0.0, {1.0, 0.0, 0.0}, {1.0}) - ref), 0.0, 1e-15);
}

TEST(KernelNumber, MatchesOperatorExponential) {
  oracle::Gen gen(42);
  for (int trial = 0; trial < 10; ++trial) {
    const auto [mu, nu] = gen.setting();
    const double x = gen.uniform(-2, 2), z = gen.uniform(0.4, 1.6);
    const auto dense = dense_kernel(x, mu, nu, z, 12);
    for (unsigned n = 0; n < 12; ++n)
      for (unsigned m = 0; m < 12; ++m)
        EXPECT_NEAR(std::abs(kernel_number(n, m, x, {mu, nu, 0}, {z}) - dense(n, m)), 0.0, 1e-10) << n << "," << m;
  }
}

TEST(KernelNumber, UnitScaleIsHomodyneExponential) {
  // z = 1: e^{-ix} e^{i mu q + i nu p} / 2pi
  const double mu = 0.8, nu = -1.1, x = 0.4;
  const auto dense = dense_kernel(x, mu, nu, 1.0, 10);
  const auto mat = kernel_matrix(x, {mu, nu, 0}, {1.0}, 10);
  EXPECT_NEAR((mat - dense).cwiseAbs().maxCoeff(), 0.0, 1e-10);
}

TEST(KernelNumber, DegenerateSettingAllowed) {
  EXPECT_NEAR(std::abs(kernel_number(3, 3, 0.0, {0.0, 0.0, 0.0}, {1.0}) - 1.0 / kTwoPi), 0.0, 1e-15);
  EXPECT_EQ(kernel_number(3, 1, 0.0, {0.0, 0.0, 0.0}, {1.0}), Complex(0.0));
  EXPECT_THROW(kernel_number(0, 0, 0.0, {1, 0, 0}, {0.0}), Error);
}

TEST(KernelProperties, ConjugationSymmetry) {
  oracle::Gen gen(43);
  for (int trial = 0; trial < 150; ++trial) {
    const unsigned n = static_cast<unsigned>(gen.integer(0, 25)), m = static_cast<unsigned>(gen.integer(0, 25));
    const auto [mu, nu] = gen.setting();
    const double x = gen.uniform(-3, 3), z = gen.uniform(0.3, 2.0);
    const Complex a = kernel_number(n, m, x, {mu, nu, 0}, {z});
    const Complex b = std::conj(kernel_number(m, n, -x, {-mu, -nu, 0}, {z}));
    EXPECT_NEAR(std::abs(a - b), 0.0, 1e-12);
  }
}

// Beyond 4/z for n + m <= 4; higher levels first pass the Laguerre envelope
// peak near |xi|^2 ~ n + m, so the onset moves out to 2 sqrt(n + m + 2) / z.
TEST(KernelProperties, DecaysBeyondRadius) {
  oracle::Gen gen(44);
  for (int trial = 0; trial < 150; ++trial) {
    const bool low = trial % 2 == 0;
    const unsigned n = static_cast<unsigned>(gen.integer(0, low ? 2 : 6)), m = static_cast<unsigned>(gen.integer(0, low ? 2 : 6));
    const double z = gen.uniform(0.5, 2.0), phi = gen.uniform(0, kTwoPi);
    const double r0 = n + m <= 4 ? 4.0 : 2.0 * std::sqrt(double(n + m + 2));
    double prev = 1e300;
    for (double r = r0 / z; r < (r0 + 6.0) / z; r += 0.25 / z) {
      const double v = std::abs(kernel_number(n, m, 0.0, {r * std::cos(phi), r * std::sin(phi), 0}, {z}));
      EXPECT_LE(v, prev * (1.0 + 1e-12)) << n << "," << m << " r=" << r;
      prev = v;
    }
    EXPECT_LT(prev, 1e-3);
  }
}

TEST(KernelCoherent, OriginValues) {
  EXPECT_NEAR(std::abs(kernel_coherent(0.0, 0.0, 0.7, {0.0, 0.0, 0.0}, {1.3}) -
                       1.69 / kTwoPi * std::exp(Complex(0.0, -0.91))),
              0.0, 1e-15);
  const Complex ref = 1.0 / kTwoPi * std::exp(Complex(0, -0.2)) * std::exp(-(0.25 + 0.36) / 4.0);
  EXPECT_NEAR(std::abs(kernel_coherent(0.0, 0.0, 0.2, {0.5, 0.6, 0.0}, {1.0}) - ref), 0.0, 1e-15);
}

TEST(KernelCoherent, MatchesNumberResummation) {
  oracle::Gen gen(45);
  for (int trial = 0; trial < 100; ++trial) {
    const Complex alpha = gen.complex(1.05), beta = gen.complex(1.05);
    const auto [mu, nu] = gen.setting();
    const double x = gen.uniform(-2, 2), z = gen.uniform(0.5, 1.5);
    const auto k = kernel_matrix(x, {mu, nu, 0}, {z}, 60);
    const Complex sum = oracle::coherent_vector(alpha, 60).dot(k * oracle::coherent_vector(beta, 60));
    EXPECT_NEAR(std::abs(kernel_coherent(alpha, beta, x, {mu, nu, 0}, {z}) - sum), 0.0, 1e-8);
  }
}

TEST(KernelCoordinate, SupportAndPhase) {
  const double z = 1.4, mu = 0.3, nu = -0.8, x = 0.5;
  const auto k = kernel_coordinate_phase(0.0, z * nu, x, {mu, nu, 0}, {z});
  EXPECT_EQ(k.residual, 0.0);
  const Complex ref = z * z / kTwoPi * std::exp(Complex(0.0, -z * x)) * std::exp(Complex(0.0, z * z * mu * nu / 2.0));
  EXPECT_NEAR(std::abs(k.phase - ref), 0.0, 1e-15);
  EXPECT_NE(kernel_coordinate_phase(0.0, 1.0, x, {mu, nu, 0}, {z}).residual, 0.0);
  const auto id = kernel_coordinate_phase(0.2, 0.9, 0.0, {0.0, 0.0, 0.0}, {1.0});
  EXPECT_NEAR(std::abs(id.phase - 1.0 / kTwoPi), 0.0, 1e-15);
  EXPECT_NEAR(id.residual, 0.7, 1e-15);
}

TEST(KernelHomodyne, VacuumElementIsReal) {
  const Complex v = kernel_homodyne_number(0, 0, {0.0, 0.0}, 12.0, 1e-4);
  EXPECT_NEAR(v.imag(), 0.0, 1e-12);
  EXPECT_GT(v.real(), 0.0);
}

TEST(KernelHomodyne, DiagonalIsPhaseIndependent) {
  for (unsigned n = 0; n < 5; ++n) {
    const Complex a = kernel_homodyne_number(n, n, {0.0, 0.6}, 12.0, 1e-4);
    for (double phi : {0.5, 2.0, 4.5}) EXPECT_NEAR(std::abs(kernel_homodyne_number(n, n, {phi, 0.6}, 12.0, 1e-4) - a), 0.0, 1e-10);
  }
}

TEST(KernelHomodyne, Hermitian) {
  oracle::Gen gen(46);
  for (int trial = 0; trial < 20; ++trial) {
    const unsigned n = static_cast<unsigned>(gen.integer(0, 6)), m = static_cast<unsigned>(gen.integer(0, 6));
    const HomodyneSetting h{gen.uniform(0, kTwoPi), gen.uniform(-3, 3)};
    EXPECT_NEAR(std::abs(std::conj(kernel_homodyne_number(n, m, h, 12.0, 1e-4)) - kernel_homodyne_number(m, n, h, 12.0, 1e-4)),
                0.0, 1e-10);
  }
}

TEST(KernelHomodyne, ShortCutoffIsReported) {
  try {
    kernel_homodyne_number(2, 1, {0.3, 0.5}, 2.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CutoffTooSmall);
  }
}
