// measure_sim.hpp
// Instrument-parameter maps (squeezing pre-amplified homodyne, two-mode
// heterodyne) and seeded sampling of quadrature outcomes.

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "symplectomo/core.hpp"
#include "symplectomo/csv.hpp"
#include "symplectomo/marginals.hpp"
#include "symplectomo/settings.hpp"
#include "symplectomo/states.hpp"
#include "symplectomo/twomode.hpp"

namespace symplectomo {

inline constexpr const char* kGeneratorName = "mt19937_64+splitmix64";
inline constexpr std::size_t kCdfPoints = 4096;

struct SqueezerSetting {
  double s = 0.0;
  double theta = 0.0;
  bool phase_lock = true;
};

/// (mu, nu) = e^{-s} (cos(theta/2), sin(theta/2)).
inline QuadratureSetting squeezer_to_setting(const SqueezerSetting& sq) {
  if (!sq.phase_lock) throw Error(ErrorKind::PhaseLockRequired, "squeezer map needs phi = theta / 2");
  if (!(sq.s >= 0.0) || !std::isfinite(sq.s)) throw Error(ErrorKind::InvalidParameter, "squeeze magnitude must be >= 0");
  const double r = std::cosh(sq.s) - std::sinh(sq.s);
  return {r * std::cos(sq.theta / 2.0), r * std::sin(sq.theta / 2.0), 0.0};
}

struct HeterodyneSettingTwoMode {
  double e1 = 1.0;
  double e2 = 0.0;
  double phi = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
};

/// mu_j = E_j cos(phi + theta_j), nu_j = E_j sin(phi + theta_j).
inline TwoModeSetting heterodyne_to_setting(const HeterodyneSettingTwoMode& h) {
  if (h.e1 < 0.0 || h.e2 < 0.0) throw Error(ErrorKind::InvalidParameter, "oscillator amplitudes must be >= 0");
  if (!(h.e1 * h.e1 + h.e2 * h.e2 > 0.0)) throw Error(ErrorKind::DegenerateSetting, "E1^2 + E2^2 must be > 0");
  TwoModeSetting s;
  s.mu = {h.e1 * std::cos(h.phi + h.theta1), h.e2 * std::cos(h.phi + h.theta2)};
  s.nu = {h.e1 * std::sin(h.phi + h.theta1), h.e2 * std::sin(h.phi + h.theta2)};
  return s;
}

// ---------------------------------------------------------------------------
// Seeds and sampling

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the stream for one setting of a campaign.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Piecewise-linear CDF tabulated on a uniform grid.
class TabulatedCdf {
 public:
  template <class Density>
  TabulatedCdf(const UniformGrid& grid, Density&& density) : grid_(grid), cdf_(grid.n, 0.0) {
    grid_.validate();
    std::vector<double> f(grid_.n);
    for (std::size_t i = 0; i < grid_.n; ++i) f[i] = std::max(0.0, density(grid_.at(i)));
    const double h = grid_.step();
    for (std::size_t i = 1; i < grid_.n; ++i) cdf_[i] = cdf_[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    total_ = cdf_.back();
    if (std::abs(total_ - 1.0) > kTomogramNormTolerance) {
      throw Error(ErrorKind::GridTooNarrow, "sampling grid captures " + format_double(total_) + " of the density");
    }
    for (double& c : cdf_) c /= total_;
  }

  double total() const { return total_; }

  double operator()(double x) const {
    if (x <= grid_.lo) return 0.0;
    if (x >= grid_.hi) return 1.0;
    const double t = (x - grid_.lo) / grid_.step();
    const auto i = std::min(static_cast<std::size_t>(t), grid_.n - 2);
    const double f = t - static_cast<double>(i);
    return cdf_[i] + f * (cdf_[i + 1] - cdf_[i]);
  }

  double inverse(double u) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return grid_.lo;
    if (it == cdf_.end()) return grid_.hi;
    const auto i = static_cast<std::size_t>(it - cdf_.begin()) - 1;
    const double span = cdf_[i + 1] - cdf_[i];
    const double f = span > 0.0 ? (u - cdf_[i]) / span : 0.0;
    return grid_.at(i) + f * grid_.step();
  }

 private:
  UniformGrid grid_;
  std::vector<double> cdf_;
  double total_ = 0.0;
};

inline TabulatedCdf marginal_cdf(const OneModeState& state, const QuadratureSetting& setting) {
  const QuadratureSetting centered{setting.mu, setting.nu, 0.0};
  UniformGrid g = default_x_grid(state, centered);
  g.n = kCdfPoints;
  return TabulatedCdf(g, [&](double x) { return marginal(state, x, centered); });
}

inline TabulatedCdf marginal_cdf(const TwoModeState& state, const TwoModeSetting& setting) {
  TwoModeSetting centered = setting;
  centered.delta = {0.0, 0.0};
  const UniformGrid g = default_tilde_grid(state, {centered}, kCdfPoints);
  return TabulatedCdf(g, [&](double x) { return tilde_marginal(state, x, centered); });
}

namespace detail {
inline std::vector<double> draw(const TabulatedCdf& cdf, std::size_t n, std::uint64_t seed, double shift) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) x = cdf.inverse(unif(rng)) + shift;
  return out;
}
}  // namespace detail

/// n draws of X = mu q + nu p + delta; delta is applied as a shift.
inline SampleBatch sample_marginal(const OneModeState& state, const QuadratureSetting& setting, std::size_t n,
                                   std::uint64_t seed) {
  setting.validate();
  if (n == 0) throw Error(ErrorKind::InvalidParameter, "sample count must be >= 1");
  SampleBatch b;
  b.setting = setting;
  b.seed = seed;
  b.generator = kGeneratorName;
  b.outcomes = detail::draw(marginal_cdf(state, setting), n, seed, setting.delta);
  return b;
}

/// n draws of X1 for a two-mode tilde setting.
inline SampleBatch sample_marginal(const TwoModeState& state, const TwoModeSetting& setting, std::size_t n,
                                   std::uint64_t seed) {
  setting.validate_tilde();
  if (n == 0) throw Error(ErrorKind::InvalidParameter, "sample count must be >= 1");
  SampleBatch b;
  b.setting = setting;
  b.seed = seed;
  b.generator = kGeneratorName;
  b.outcomes = detail::draw(marginal_cdf(state, setting), n, seed, setting.delta[0]);
  return b;
}

// ---------------------------------------------------------------------------
// Campaigns

/// Evenly spaced unit settings over [0, pi), uniformly random unit settings,
/// or an explicit list (treated as evenly spread).
struct CircleSchedule {
  std::size_t n = 32;
};
struct RandomSchedule {
  std::size_t n = 32;
};
using Schedule = std::variant<CircleSchedule, RandomSchedule, std::vector<QuadratureSetting>>;

inline std::vector<QuadratureSetting> expand_schedule(const Schedule& schedule, std::uint64_t master_seed) {
  if (const auto* c = std::get_if<CircleSchedule>(&schedule)) return unit_circle_settings(c->n);
  if (const auto* r = std::get_if<RandomSchedule>(&schedule)) {
    std::mt19937_64 rng(derive_seed(master_seed, ~0ULL));
    std::uniform_real_distribution<double> angle(0.0, kPi);
    std::vector<QuadratureSetting> out(r->n);
    for (auto& s : out) {
      const double phi = angle(rng);
      s = {std::cos(phi), std::sin(phi), 0.0};
    }
    return out;
  }
  return std::get<std::vector<QuadratureSetting>>(schedule);
}

inline std::vector<SampleBatch> sample_campaign(const OneModeState& state, const Schedule& schedule,
                                                std::size_t n_per_setting, std::uint64_t master_seed) {
  const auto settings = expand_schedule(schedule, master_seed);
  if (settings.empty()) throw Error(ErrorKind::EmptySchedule, "no settings to sample");
  return parallel_map(settings.size(), [&](std::size_t k) {
    auto b = sample_marginal(state, settings[k], n_per_setting, derive_seed(master_seed, k));
    b.weight = 1.0 / kPi;
    return b;
  });
}

inline std::vector<SampleBatch> sample_campaign(const TwoModeState& state, const std::vector<TwoModeSetting>& settings,
                                                std::size_t n_per_setting, std::uint64_t master_seed) {
  if (settings.empty()) throw Error(ErrorKind::EmptySchedule, "no settings to sample");
  return parallel_map(settings.size(), [&](std::size_t k) {
    return sample_marginal(state, settings[k], n_per_setting, derive_seed(master_seed, k));
  });
}

// ---------------------------------------------------------------------------
// Samples CSV: mu,nu,delta,x or mu1,mu2,nu1,nu2,mup1,mup2,nup1,nup2,x1

inline std::string samples_csv(const std::vector<SampleBatch>& batches) {
  if (batches.empty()) throw Error(ErrorKind::EmptyBatches, "no batches");
  const bool two = std::holds_alternative<TwoModeSetting>(batches.front().setting);
  std::ostringstream os;
  if (two) {
    for (const auto& c : two_mode_setting_columns()) os << c << ',';
    os << "x1\n";
  } else {
    os << "mu,nu,delta,x\n";
  }
  for (const auto& b : batches) {
    if (std::holds_alternative<TwoModeSetting>(b.setting) != two) {
      throw Error(ErrorKind::UnsupportedVariant, "batches mix one- and two-mode settings");
    }
    std::string prefix;
    if (two) {
      const auto& s = std::get<TwoModeSetting>(b.setting);
      if (s.delta[0] != 0.0 || s.delta[1] != 0.0) {
        throw Error(ErrorKind::UnsupportedVariant, "two-mode CSV has no shift columns");
      }
      prefix = setting_csv_prefix(s);
    } else {
      const auto& s = std::get<QuadratureSetting>(b.setting);
      prefix = format_double(s.mu) + "," + format_double(s.nu) + "," + format_double(s.delta) + ",";
    }
    for (double x : b.outcomes) os << prefix << format_double(x) << '\n';
  }
  return os.str();
}

/// Consecutive rows with equal settings form one batch of weight 1/pi.
inline std::vector<SampleBatch> samples_from_table(const NumericTable& table) {
  std::vector<SampleBatch> out;
  if (table.header.size() == 4) {
    require_header(table, {"mu", "nu", "delta", "x"});
    for (const auto& r : table.rows) {
      const QuadratureSetting s{r[0], r[1], r[2]};
      if (out.empty() || std::get<QuadratureSetting>(out.back().setting) != s) {
        s.validate();
        out.push_back(SampleBatch{s, {}});
      }
      out.back().outcomes.push_back(r[3]);
    }
  } else {
    auto cols = two_mode_setting_columns();
    cols.push_back("x1");
    require_header(table, cols);
    for (const auto& r : table.rows) {
      TwoModeSetting s;
      s.mu = {r[0], r[1]};
      s.nu = {r[2], r[3]};
      s.mu_p = {r[4], r[5]};
      s.nu_p = {r[6], r[7]};
      if (out.empty() || std::get<TwoModeSetting>(out.back().setting) != s) {
        s.validate_tilde();
        out.push_back(SampleBatch{s, {}});
      }
      out.back().outcomes.push_back(r[8]);
    }
  }
  if (out.empty()) throw Error(ErrorKind::EmptyBatches, "samples file has no rows");
  for (auto& b : out) b.validate();
  return out;
}

inline std::vector<SampleBatch> read_samples_csv(const std::string& path) { return samples_from_table(read_csv(path)); }

}  // namespace symplectomo
