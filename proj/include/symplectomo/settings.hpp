// settings.hpp
// Measurement settings shared by the one- and two-mode code, and the sample
// batch type produced by the simulator and consumed by the estimators.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "symplectomo/core.hpp"

namespace symplectomo {

/// X = mu q + nu p + delta.
struct QuadratureSetting {
  double mu = 1.0;
  double nu = 0.0;
  double delta = 0.0;

  double norm2() const { return mu * mu + nu * nu; }

  void validate() const {
    if (!(norm2() > 0.0) || !std::isfinite(norm2()) || !std::isfinite(delta)) {
      throw Error(ErrorKind::DegenerateSetting, "quadrature setting needs mu^2 + nu^2 > 0");
    }
  }

  bool operator==(const QuadratureSetting&) const = default;
};

/// n settings (cos phi, sin phi) at phi = pi k / n, k = 0..n-1.
inline std::vector<QuadratureSetting> unit_circle_settings(std::size_t n, double radius = 1.0) {
  std::vector<QuadratureSetting> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double phi = kPi * static_cast<double>(k) / static_cast<double>(n);
    out.push_back({radius * std::cos(phi), radius * std::sin(phi), 0.0});
  }
  return out;
}

using Vec2 = std::array<double, 2>;

/// X1 = mu.q + nu.p + delta1, X2 = mu_p.q + nu_p.p + delta2. Tilde
/// (single-quadrature) settings leave mu_p and nu_p at zero.
struct TwoModeSetting {
  Vec2 mu{0.0, 0.0};
  Vec2 nu{0.0, 0.0};
  Vec2 mu_p{0.0, 0.0};
  Vec2 nu_p{0.0, 0.0};
  Vec2 delta{0.0, 0.0};

  double norm2() const { return mu[0] * mu[0] + mu[1] * mu[1] + nu[0] * nu[0] + nu[1] * nu[1]; }
  bool has_second_row() const { return mu_p[0] != 0.0 || mu_p[1] != 0.0 || nu_p[0] != 0.0 || nu_p[1] != 0.0; }

  void validate_tilde() const {
    if (!(norm2() > 0.0) || !std::isfinite(norm2())) {
      throw Error(ErrorKind::DegenerateSetting, "two-mode setting needs |mu|^2 + |nu|^2 > 0");
    }
  }

  bool operator==(const TwoModeSetting&) const = default;
};

/// Outcomes of repeated measurement of one setting. `weight` is the density
/// (per radian, over [0, pi)) with which the setting's direction was drawn;
/// 1/pi for uniformly spread or evenly spaced schedules.
struct SampleBatch {
  std::variant<QuadratureSetting, TwoModeSetting> setting;
  std::vector<double> outcomes;
  std::uint64_t seed = 0;
  double weight = 1.0 / kPi;
  std::string generator = "mt19937_64+splitmix64";

  void validate() const {
    if (!(weight > 0.0) || !std::isfinite(weight)) throw Error(ErrorKind::InvalidParameter, "batch weight must be > 0");
    for (double x : outcomes) {
      if (!std::isfinite(x)) throw Error(ErrorKind::InvalidParameter, "non-finite outcome");
    }
  }
};

}  // namespace symplectomo
