#include <gtest/gtest.h>

#include "oracles.hpp"
#include "symplectomo/fock.hpp"

using namespace symplectomo;

TEST(Displacement, ElementsMatchDenseExponential) {
  oracle::Gen gen(11);
  for (int trial = 0; trial < 12; ++trial) {
    const Complex xi = gen.complex(1.5);
    const auto dense = oracle::displacement(xi, 16);
    for (unsigned n = 0; n < 16; ++n) {
      for (unsigned m = 0; m < 16; ++m) {
        EXPECT_NEAR(std::abs(displacement_element(n, m, xi) - dense(n, m)), 0.0, 1e-10) << n << "," << m;
      }
    }
  }
}

TEST(Displacement, MatrixAgreesWithElements) {
  const Complex xi(-0.7, 1.1);
  const auto mat = displacement_matrix(xi, 25);
  for (unsigned n = 0; n < 25; ++n)
    for (unsigned m = 0; m < 25; ++m) EXPECT_NEAR(std::abs(mat(n, m) - displacement_element(n, m, xi)), 0.0, 1e-12);
}

TEST(Displacement, ZeroArgumentIsIdentity) {
  const auto mat = displacement_matrix(Complex(0.0), 10);
  EXPECT_NEAR((mat - ComplexMatrix::Identity(10, 10)).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Displacement, StableAtLargeIndex) {
  const auto v = displacement_element(80, 75, Complex(2.0, 1.0));
  EXPECT_TRUE(std::isfinite(v.real()) && std::isfinite(v.imag()));
  EXPECT_LE(std::abs(v), 1.0);
}

TEST(Coherent, CoefficientsMatchRecurrence) {
  const Complex alpha(0.8, -0.4);
  const auto c = coherent_coefficients(alpha, 30);
  const auto o = oracle::coherent_vector(alpha, 30);
  EXPECT_NEAR((c - o).cwiseAbs().maxCoeff(), 0.0, 1e-14);
}

TEST(Coherent, ElementOfProjectorIsOverlapProduct) {
  const Complex g(0.5, 0.2);
  const auto v = oracle::coherent_vector(g, 40);
  const ComplexMatrix rho = v * v.adjoint();
  const Complex a(0.1, -0.3), b(-0.4, 0.6);
  EXPECT_NEAR(std::abs(coherent_element(rho, a, b) - oracle::overlap(a, g) * oracle::overlap(g, b)), 0.0, 1e-12);
}

TEST(Density, StoresHermitianPartWithRealDiagonal) {
  ComplexMatrix m(2, 2);
  m << Complex(0.6, 0.1), Complex(0.2, 0.3), Complex(0.0, 0.0), Complex(0.4, -0.2);
  const FockDensityMatrix rho(m);
  EXPECT_NEAR(hermiticity_residual(rho.matrix()), 0.0, 1e-15);
  EXPECT_EQ(rho(0, 0).imag(), 0.0);
  EXPECT_NEAR(rho.trace(), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(rho(0, 1) - Complex(0.1, 0.15)), 0.0, 1e-15);
}

TEST(Density, RejectsInconsistentDims) {
  EXPECT_THROW(FockDensityMatrix(ComplexMatrix::Identity(6, 6), {2, 2}), Error);
  EXPECT_NO_THROW(FockDensityMatrix(ComplexMatrix::Identity(6, 6), {2, 3}));
}

TEST(Density, JsonListsDimsForTwoModes) {
  const FockDensityMatrix rho(ComplexMatrix::Identity(4, 4) / 4.0, {2, 2});
  const auto js = to_json(rho);
  EXPECT_NE(js.find("\"dims\":[2,2]"), std::string::npos);
  EXPECT_NE(js.find("\"re\":[[0.25,0,0,0]"), std::string::npos);
  const FockDensityMatrix one(ComplexMatrix::Identity(1, 1));
  EXPECT_EQ(to_json(one).find("dims"), std::string::npos);
}

TEST(Density, FormatRoundTripsDoubles) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678901234567}) EXPECT_EQ(std::stod(format_double(v)), v);
}
