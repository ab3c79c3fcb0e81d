#include <gtest/gtest.h>

#include "oracles.hpp"
#include "symplectomo/marginals.hpp"

#include <sstream>

using namespace symplectomo;

namespace {
std::vector<OneModeState> analytic_states() {
  return {Vacuum{}, Thermal{0.5}, Thermal{0.3}, Coherent{{0.7, -0.4}}, EvenCat{1.0, 1.0}, EvenCat{-0.6, 1.3},
          NumberState{2}, CoherentPair{{0.5, 0.5}, {-1.0, 0.2}}};
}

std::function<double(double, double)> oracle_wigner(const OneModeState& s) {
  if (const auto* c = std::get_if<EvenCat>(&s)) {
    return [a = c->a, b = c->b](double q, double p) {
      return oracle::superposition_wigner({1.0, 1.0}, {{a, b}, {a, -b}}, q, p);
    };
  }
  if (const auto* c = std::get_if<Coherent>(&s)) {
    return [g = c->alpha](double q, double p) { return oracle::superposition_wigner({1.0}, {g}, q, p); };
  }
  if (const auto* c = std::get_if<CoherentPair>(&s)) {
    return [g1 = c->gamma1, g2 = c->gamma2](double q, double p) {
      return oracle::superposition_wigner({1.0, 1.0}, {g1, g2}, q, p);
    };
  }
  if (const auto* t = std::get_if<Thermal>(&s)) {
    return [l = t->lambda](double q, double p) { return 2.0 * l * std::exp(-l * (q * q + p * p)); };
  }
  return [s](double q, double p) { return wigner(s, q, p); };
}
}  // namespace

TEST(MarginalAnalytic, VacuumOrigin) {
  EXPECT_NEAR(marginal_analytic(Vacuum{}, 0.0, {1.0, 0.0, 0.0}), 1.0 / std::sqrt(kPi), 1e-15);
}

TEST(MarginalAnalytic, ThermalOrigin) {
  for (double lam : {0.2, 0.5, 1.0}) EXPECT_NEAR(marginal_analytic(Thermal{lam}, 0.0, {1, 0, 0}), std::sqrt(lam / kPi), 1e-15);
}

TEST(MarginalAnalytic, ThermalClosedFormAtDiagonalSetting) {
  EXPECT_NEAR(marginal_numeric(Thermal{0.5}, 1.0, {1, 1, 0}), std::sqrt(0.5 / kTwoPi) * std::exp(-0.25), 1e-10);
  EXPECT_NEAR(marginal_analytic(Thermal{0.5}, 1.0, {1, 1, 0}), std::sqrt(0.5 / kTwoPi) * std::exp(-0.25), 1e-15);
}

TEST(MarginalAnalytic, CatOnMomentumAxisFollowsPrintedFormula) {
  // printed closed form evaluated in the present quadrature convention (components of variance 1/2)
  const double a = 1.0, b = 1.0;
  const double ref = detail::cat_closed_form(a, b, 0.0, 0.0, kSqrt2);
  EXPECT_NEAR(marginal_analytic(EvenCat{a, b}, 0.0, {0.0, 1.0, 0.0}), ref, 1e-14);
  EXPECT_NEAR(marginal_numeric(EvenCat{a, b}, 0.0, {0.0, 1.0, 0.0}), ref, 1e-8);
}

TEST(MarginalAnalytic, CatMatchesIndependentLineIntegral) {
  oracle::Gen gen(21);
  for (int trial = 0; trial < 30; ++trial) {
    const double a = gen.uniform(-1.5, 1.5), b = gen.uniform(-1.5, 1.5);
    const auto [mu, nu] = gen.setting();
    const double x = gen.uniform(-2.5, 2.5);
    const auto w = oracle_wigner(EvenCat{a, b});
    EXPECT_NEAR(marginal_analytic(EvenCat{a, b}, x, {mu, nu, 0.0}), oracle::line_marginal(w, x, mu, nu), 1e-8);
  }
}

TEST(MarginalNumeric, AgreesWithAnalyticForAllVariants) {
  oracle::Gen gen(22);
  for (const auto& s : analytic_states()) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto [mu, nu] = gen.setting();
      const double x = gen.uniform(-2.0, 2.0);
      const QuadratureSetting st{mu, nu, 0.0};
      EXPECT_NEAR(marginal_numeric(s, x, st), marginal_analytic(s, x, st), 1e-6) << describe(s);
      EXPECT_NEAR(marginal_analytic(s, x, st), oracle::line_marginal(oracle_wigner(s), x, mu, nu), 1e-7) << describe(s);
    }
  }
}

TEST(MarginalNumeric, VacuumTight) {
  oracle::Gen gen(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto [mu, nu] = gen.setting();
    const double x = gen.uniform(-2, 2);
    EXPECT_NEAR(marginal_numeric(Vacuum{}, x, {mu, nu, 0}), marginal_analytic(Vacuum{}, x, {mu, nu, 0}), 1e-8);
  }
}

TEST(Marginal, UnitSettingIsRotatedQuadrature) {
  // x_phi = q cos phi + p sin phi; for a coherent state its mean is sqrt2 Re(alpha e^{-i phi})
  const Complex alpha(0.9, -0.5);
  for (double phi : {0.0, 0.4, 1.3, 2.9}) {
    const double mean = kSqrt2 * (alpha * std::polar(1.0, -phi)).real();
    const double x = 0.3;
    EXPECT_NEAR(marginal(Coherent{alpha}, x, {std::cos(phi), std::sin(phi), 0}),
                std::exp(-(x - mean) * (x - mean)) / std::sqrt(kPi), 1e-13);
  }
}

TEST(Marginal, Errors) {
  EXPECT_THROW(marginal(Vacuum{}, 0.0, {0.0, 0.0, 0.0}), Error);
  try {
    marginal(Custom{density_matrix(Vacuum{}, 2)}, 0.0, {1, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedVariant);
  }
}

TEST(MarginalProperties, ScalingHomogeneity) {
  oracle::Gen gen(31);
  const auto states = analytic_states();
  for (int trial = 0; trial < 120; ++trial) {
    const auto& s = states[static_cast<std::size_t>(trial) % states.size()];
    const auto [mu, nu] = gen.setting();
    const double x = gen.uniform(-2, 2);
    double lam = gen.uniform(0.2, 3.0) * (gen.integer(0, 1) ? 1.0 : -1.0);
    EXPECT_NEAR(std::abs(lam) * marginal(s, lam * x, {lam * mu, lam * nu, 0}), marginal(s, x, {mu, nu, 0}), 1e-8)
        << describe(s);
  }
}

TEST(MarginalProperties, Parity) {
  oracle::Gen gen(32);
  const auto states = analytic_states();
  for (int trial = 0; trial < 120; ++trial) {
    const auto& s = states[static_cast<std::size_t>(trial) % states.size()];
    const auto [mu, nu] = gen.setting();
    const double x = gen.uniform(-2, 2);
    EXPECT_NEAR(marginal(s, -x, {-mu, -nu, 0}), marginal(s, x, {mu, nu, 0}), 1e-10) << describe(s);
  }
}

TEST(MarginalProperties, ShiftIsTranslation) {
  oracle::Gen gen(33);
  const auto states = analytic_states();
  for (int trial = 0; trial < 120; ++trial) {
    const auto& s = states[static_cast<std::size_t>(trial) % states.size()];
    const auto [mu, nu] = gen.setting();
    const double x = gen.uniform(-2, 2), delta = gen.uniform(-3, 3);
    EXPECT_EQ(marginal(s, x, {mu, nu, delta}), marginal(s, x - delta, {mu, nu, 0}));
  }
}

TEST(MarginalProperties, Normalization) {
  oracle::Gen gen(34);
  const auto states = analytic_states();
  for (int trial = 0; trial < 100; ++trial) {
    const auto& s = states[static_cast<std::size_t>(trial) % states.size()];
    const auto [mu, nu] = gen.setting();
    const QuadratureSetting st{mu, nu, gen.uniform(-1, 1)};
    const auto g = default_x_grid(s, st);
    const auto h = trapezoid_weights(g);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) acc += h[i] * marginal(s, g.at(i), st);
    EXPECT_NEAR(acc, 1.0, 1e-3) << describe(s);
  }
}

TEST(Tomogram, VacuumRowsIntegrateToOne) {
  const auto t = tabulate_tomogram(Vacuum{}, unit_circle_settings(8), UniformGrid{-6.0, 6.0, 601});
  ASSERT_EQ(t.values.rows(), 8);
  ASSERT_EQ(t.values.cols(), 601);
  for (double v : t.row_integrals()) EXPECT_NEAR(v, 1.0, 1e-6);
  EXPECT_GE(t.values.minCoeff(), 0.0);
}

TEST(Tomogram, ThermalRowVariance) {
  const auto t = tabulate_tomogram(Thermal{0.5}, {{1.0, 0.0, 0.0}});
  const auto h = trapezoid_weights(t.x_grid);
  double m2 = 0.0;
  for (std::size_t i = 0; i < t.x_grid.n; ++i) m2 += h[i] * t.x_grid.at(i) * t.x_grid.at(i) * t.values(0, static_cast<Eigen::Index>(i));
  EXPECT_NEAR(m2, 1.0, 1e-4);
}

TEST(Tomogram, CatRowMatchesPrintedFormula) {
  const auto t = tabulate_tomogram(EvenCat{1.0, 1.0}, {{0.0, 1.0, 0.0}});
  for (std::size_t i = 0; i < t.x_grid.n; i += 7) {
    EXPECT_NEAR(t.values(0, static_cast<Eigen::Index>(i)), even_cat_marginal(1.0, 1.0, t.x_grid.at(i), 0.0, 1.0), 1e-8);
  }
}

TEST(Tomogram, NarrowGridIsRejected) {
  try {
    tabulate_tomogram(Thermal{0.2}, {{1.0, 0.0, 0.0}}, UniformGrid{-1.0, 1.0, 201});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridTooNarrow);
  }
}

TEST(Tomogram, CsvRoundTrip) {
  const std::vector<QuadratureSetting> settings{{1.0, 0.0, 0.5}, {0.3, -0.8, 0.0}};
  const auto t = tabulate_tomogram(EvenCat{0.5, 0.7}, settings, UniformGrid{-8, 8, 321});
  const auto csv = tomogram_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "mu,nu,delta,x,w");
  std::istringstream is(csv);
  const auto back = tomogram_from_table(parse_csv(is));
  EXPECT_EQ(back.settings, t.settings);
  EXPECT_EQ(back.x_grid.n, t.x_grid.n);
  EXPECT_NEAR(back.x_grid.lo, t.x_grid.lo, 1e-12);
  EXPECT_NEAR((back.values - t.values).cwiseAbs().maxCoeff(), 0.0, 0.0);
}

TEST(Tomogram, CsvRejectsBadInput) {
  std::istringstream wrong("mu,nu,x,w\n1,0,0,0.5\n");
  EXPECT_THROW(tomogram_from_table(parse_csv(wrong)), Error);
  std::istringstream junk("mu,nu,delta,x,w\n1,0,0,abc,0.5\n");
  EXPECT_THROW(parse_csv(junk), Error);
}
