#include <gtest/gtest.h>

#include "oracles.hpp"
#include "symplectomo/measure_sim.hpp"

#include <numeric>
#include <sstream>

using namespace symplectomo;

namespace {
std::pair<double, double> moments(const std::vector<double>& xs) {
  const double n = double(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, var / (n - 1.0)};
}

double normal_cdf(double x, double var) { return 0.5 * std::erfc(-x / std::sqrt(2.0 * var)); }
}  // namespace

TEST(Squeezer, Examples) {
  auto s = squeezer_to_setting({0.0, 0.0});
  EXPECT_DOUBLE_EQ(s.mu, 1.0);
  EXPECT_DOUBLE_EQ(s.nu, 0.0);
  s = squeezer_to_setting({0.0, kPi});
  EXPECT_NEAR(s.mu, 0.0, 1e-16);
  EXPECT_NEAR(s.nu, 1.0, 1e-16);
  s = squeezer_to_setting({std::log(2.0), 0.0});
  EXPECT_NEAR(s.mu, 0.5, 1e-15);
  EXPECT_EQ(s.nu, 0.0);
  EXPECT_EQ(s.delta, 0.0);
}

TEST(Squeezer, Errors) {
  try {
    squeezer_to_setting({0.3, 0.2, false});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PhaseLockRequired);
  }
  EXPECT_THROW(squeezer_to_setting({-0.1, 0.0}), Error);
}

TEST(Squeezer, ImageIsAttenuatingRay) {
  oracle::Gen gen(91);
  for (int trial = 0; trial < 200; ++trial) {
    const double s = gen.uniform(0.0, 4.0), theta = gen.uniform(-10.0, 10.0);
    const auto q = squeezer_to_setting({s, theta});
    const double r = std::hypot(q.mu, q.nu);
    EXPECT_NEAR(r, std::exp(-s), 1e-13);
    EXPECT_LE(r, 1.0 + 1e-15);
  }
}

TEST(Heterodyne, Examples) {
  auto s = heterodyne_to_setting({1, 0, 0, 0, 0});
  EXPECT_EQ(s.mu, (Vec2{1.0, 0.0}));
  EXPECT_EQ(s.nu, (Vec2{0.0, 0.0}));
  s = heterodyne_to_setting({1, 1, kPi / 2, 0, 0});
  EXPECT_NEAR(s.mu[0], 0.0, 1e-16);
  EXPECT_NEAR(s.mu[1], 0.0, 1e-16);
  EXPECT_NEAR(s.nu[0], 1.0, 1e-16);
  EXPECT_NEAR(s.nu[1], 1.0, 1e-16);
  try {
    heterodyne_to_setting({0, 0, 0, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateSetting);
  }
}

TEST(Heterodyne, AmplitudesAreRowNorms) {
  oracle::Gen gen(92);
  for (int trial = 0; trial < 100; ++trial) {
    const HeterodyneSettingTwoMode h{gen.uniform(0, 2), gen.uniform(0, 2), gen.uniform(-4, 4), gen.uniform(-4, 4),
                                     gen.uniform(-4, 4)};
    const auto s = heterodyne_to_setting(h);
    EXPECT_NEAR(std::hypot(s.mu[0], s.nu[0]), h.e1, 1e-14);
    EXPECT_NEAR(std::hypot(s.mu[1], s.nu[1]), h.e2, 1e-14);
  }
}

TEST(Heterodyne, JacobianHasFullRank) {
  oracle::Gen gen(93);
  for (int trial = 0; trial < 20; ++trial) {
    std::array<double, 5> p{gen.uniform(0.3, 2), gen.uniform(0.3, 2), gen.uniform(-3, 3), gen.uniform(-3, 3), gen.uniform(-3, 3)};
    auto eval = [](const std::array<double, 5>& v) {
      const auto s = heterodyne_to_setting({v[0], v[1], v[2], v[3], v[4]});
      return Eigen::Vector4d(s.mu[0], s.mu[1], s.nu[0], s.nu[1]);
    };
    Eigen::Matrix<double, 4, 5> jac;
    for (int k = 0; k < 5; ++k) {
      auto a = p, b = p;
      a[std::size_t(k)] += 1e-6;
      b[std::size_t(k)] -= 1e-6;
      jac.col(k) = (eval(a) - eval(b)) / 2e-6;
    }
    const Eigen::JacobiSVD<Eigen::Matrix<double, 4, 5>> svd(jac);
    EXPECT_GT(svd.singularValues()(3), 1e-3);
  }
}

TEST(Heterodyne, MatchesGaussianPushforward) {
  oracle::Gen gen(94);
  for (int trial = 0; trial < 30; ++trial) {
    const HeterodyneSettingTwoMode h{gen.uniform(0.2, 1.5), gen.uniform(0.2, 1.5), gen.uniform(-3, 3), gen.uniform(-3, 3),
                                     gen.uniform(-3, 3)};
    // (E_j / sqrt2) [e^{i(phi + theta_j)} a_j^dag + h.c.] rewritten in q_j, p_j
    oracle::Vec4 r;
    for (int j = 0; j < 2; ++j) {
      const Complex c = (j ? h.e2 : h.e1) / std::sqrt(2.0) * std::polar(1.0, h.phi + (j ? h.theta2 : h.theta1));
      r(j) = 2.0 * c.real() / std::sqrt(2.0);
      r(2 + j) = 2.0 * c.imag() / std::sqrt(2.0);
    }
    const Matrix4 m = gen.covariance();
    const double var = r.dot(m * r);
    const double x = gen.uniform(-2, 2);
    const double ref = std::exp(-x * x / (2 * var)) / std::sqrt(kTwoPi * var);
    EXPECT_NEAR(tilde_marginal(Gaussian2{CovarianceMatrix(m), Vector4::Zero()}, x, heterodyne_to_setting(h)), ref, 1e-6);
  }
}

TEST(Seeds, SplitmixReference) {
  // first output of the reference splitmix64 generator seeded with 0
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
}

TEST(Sampling, VacuumMoments) {
  const auto b = sample_marginal(Vacuum{}, {1.0, 0.0, 0.0}, 100000, 7);
  const auto [mean, var] = moments(b.outcomes);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 0.5, 0.02);
  EXPECT_EQ(b.seed, 7u);
  EXPECT_EQ(b.generator, std::string(kGeneratorName));
}

TEST(Sampling, ThermalMoments) {
  const auto b = sample_marginal(Thermal{0.5}, {1.0, 0.0, 0.0}, 100000, 11);
  EXPECT_NEAR(moments(b.outcomes).second, 1.0, 0.03);
}

TEST(Sampling, Deterministic) {
  const auto a = sample_marginal(EvenCat{1, 1}, {0.6, 0.8, 0.0}, 1000, 99);
  const auto b = sample_marginal(EvenCat{1, 1}, {0.6, 0.8, 0.0}, 1000, 99);
  EXPECT_EQ(a.outcomes, b.outcomes);
  const auto c = sample_marginal(EvenCat{1, 1}, {0.6, 0.8, 0.0}, 1000, 100);
  EXPECT_NE(a.outcomes, c.outcomes);
}

TEST(Sampling, DeltaIsPostShift) {
  const auto a = sample_marginal(Thermal{0.8}, {0.6, 0.8, 0.0}, 500, 3);
  const auto b = sample_marginal(Thermal{0.8}, {0.6, 0.8, 1.25}, 500, 3);
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) EXPECT_EQ(b.outcomes[i], a.outcomes[i] + 1.25);
}

TEST(Sampling, KolmogorovSmirnov) {
  const auto vac = sample_marginal(Vacuum{}, {0.7, -0.4, 0.0}, 100000, 21);
  EXPECT_LT(oracle::ks_statistic(vac.outcomes, [](double x) { return normal_cdf(x, 0.5 * 0.65); }), 0.01);
  const auto th = sample_marginal(Thermal{0.5}, {1.0, 0.0, 0.0}, 100000, 22);
  EXPECT_LT(oracle::ks_statistic(th.outcomes, [](double x) { return normal_cdf(x, 1.0); }), 0.01);

  const QuadratureSetting s{0.0, 1.0, 0.0};
  const auto cat = sample_marginal(EvenCat{1, 1}, s, 100000, 23);
  const auto tab = marginal_cdf(EvenCat{1, 1}, s);
  EXPECT_LT(oracle::ks_statistic(cat.outcomes, [&](double x) { return tab(x); }), 0.01);
  // the tabulated CDF itself against direct quadrature of the oracle Wigner function
  const auto w = [](double q, double p) { return oracle::superposition_wigner({1.0, 1.0}, {{1, 1}, {1, -1}}, q, p); };
  for (double x : {-2.0, -0.7, 0.0, 0.4, 1.9}) {
    const double ref = oracle::trapezoid([&](double t) { return oracle::line_marginal(w, t, 0.0, 1.0, 10.0, 801); }, -9.0, x, 1201);
    EXPECT_NEAR(tab(x), ref, 2e-4);
  }
}

TEST(Sampling, TwoModeTilde) {
  const auto s = heterodyne_to_setting({1, 1, 0, 0, 1.57});
  const auto b = sample_marginal(Gaussian2{}, s, 100000, 5);
  EXPECT_NEAR(moments(b.outcomes).second, 0.5 * s.norm2(), 0.03);
  EXPECT_LT(oracle::ks_statistic(b.outcomes, [&](double x) { return normal_cdf(x, 0.5 * s.norm2()); }), 0.01);
  auto shifted = s;
  shifted.delta = {0.5, 0.0};
  const auto c = sample_marginal(Gaussian2{}, shifted, 100000, 5);
  EXPECT_EQ(c.outcomes[17], b.outcomes[17] + 0.5);
}

TEST(Sampling, Errors) {
  EXPECT_THROW(sample_marginal(Vacuum{}, {0.0, 0.0, 0.0}, 10, 1), Error);
  EXPECT_THROW(sample_marginal(Vacuum{}, {1.0, 0.0, 0.0}, 0, 1), Error);
  try {
    sample_campaign(Vacuum{}, std::vector<QuadratureSetting>{}, 10, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptySchedule);
  }
  try {
    TabulatedCdf(UniformGrid{-0.5, 0.5, 101}, [](double x) { return std::exp(-x * x) / std::sqrt(kPi); });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridTooNarrow);
  }
}

TEST(Campaign, SeedsAndDeterminism) {
  const auto a = sample_campaign(Vacuum{}, CircleSchedule{32}, 3125, 42);
  ASSERT_EQ(a.size(), 32u);
  std::size_t total = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].seed, derive_seed(42, k));
    EXPECT_DOUBLE_EQ(a[k].weight, 1.0 / kPi);
    total += a[k].outcomes.size();
  }
  EXPECT_EQ(total, 100000u);
  const auto b = sample_campaign(Vacuum{}, CircleSchedule{32}, 3125, 42);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].outcomes, b[k].outcomes);

  const auto one = sample_campaign(Vacuum{}, std::vector<QuadratureSetting>{{1, 0, 0}}, 10, 1);
  EXPECT_EQ(one.size(), 1u);

  const auto r1 = expand_schedule(RandomSchedule{16}, 8), r2 = expand_schedule(RandomSchedule{16}, 8);
  EXPECT_EQ(r1, r2);
  for (const auto& s : r1) EXPECT_NEAR(s.norm2(), 1.0, 1e-14);
}

TEST(Campaign, CsvRoundTrip) {
  const auto a = sample_campaign(Thermal{0.5}, CircleSchedule{3}, 4, 9);
  std::istringstream is(samples_csv(a));
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "mu,nu,delta,x");
  is.seekg(0);
  const auto back = samples_from_table(parse_csv(is));
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(back[k].outcomes, a[k].outcomes);
    EXPECT_EQ(std::get<QuadratureSetting>(back[k].setting), std::get<QuadratureSetting>(a[k].setting));
  }

  const auto t = sample_campaign(Gaussian2{}, tilde_hopf_settings({1, 2}), 5, 4);
  const auto csv = samples_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "mu1,mu2,nu1,nu2,mup1,mup2,nup1,nup2,x1");
  std::istringstream ts(csv);
  const auto tb = samples_from_table(parse_csv(ts));
  ASSERT_EQ(tb.size(), 4u);
  EXPECT_EQ(tb[2].outcomes, t[2].outcomes);
  EXPECT_EQ(std::get<TwoModeSetting>(tb[2].setting), std::get<TwoModeSetting>(t[2].setting));
}
