// core.hpp
// Shared numeric primitives: error type, grids, quadrature rules, special
// functions and a deterministic chunked parallel map.
//
// Conventions used throughout the library:
//   hbar = 1, q = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2)),
//   alpha = (q + i p)/sqrt(2).
//   Wigner functions integrate to 2*pi per mode, so the marginal
//   w(x, mu, nu) = (1/2pi) \int delta(x - mu q - nu p) W(q, p) dq dp
//   is a normalized probability density.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace symplectomo {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr Complex kI{0.0, 1.0};

inline constexpr const char* kVersion = "0.3.0";

enum class ErrorKind {
  InvalidParameter,
  TruncationTooSmall,
  UnsupportedVariant,
  DegenerateSetting,
  GridTooNarrow,
  CutoffTooSmall,
  GridUnderresolved,
  DegenerateConfig,
  EmptyBatches,
  EmptySchedule,
  DimMismatch,
  NonzeroMeansUnsupported,
  NotSymplectic,
  PhaseLockRequired,
  Parse,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorKind::UnsupportedVariant: return "UnsupportedVariant";
    case ErrorKind::DegenerateSetting: return "DegenerateSetting";
    case ErrorKind::GridTooNarrow: return "GridTooNarrow";
    case ErrorKind::CutoffTooSmall: return "CutoffTooSmall";
    case ErrorKind::GridUnderresolved: return "GridUnderresolved";
    case ErrorKind::DegenerateConfig: return "DegenerateConfig";
    case ErrorKind::EmptyBatches: return "EmptyBatches";
    case ErrorKind::EmptySchedule: return "EmptySchedule";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::NonzeroMeansUnsupported: return "NonzeroMeansUnsupported";
    case ErrorKind::NotSymplectic: return "NotSymplectic";
    case ErrorKind::PhaseLockRequired: return "PhaseLockRequired";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Uniform grid lo, lo+h, ..., hi with n >= 2 points.
struct UniformGrid {
  double lo = -8.0;
  double hi = 8.0;
  std::size_t n = 1201;

  double step() const { return (hi - lo) / static_cast<double>(n - 1); }
  double at(std::size_t i) const { return lo + static_cast<double>(i) * step(); }

  void validate() const {
    if (n < 2 || !(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
      throw Error(ErrorKind::InvalidParameter, "uniform grid needs n >= 2 and hi > lo");
    }
  }
};

/// Composite trapezoid rule weights for a uniform grid.
inline std::vector<double> trapezoid_weights(const UniformGrid& g) {
  std::vector<double> w(g.n, g.step());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre nodes and weights on [a, b] (Newton iteration on P_n).
inline QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
  if (n == 0) throw Error(ErrorKind::InvalidParameter, "Gauss-Legendre needs n >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * x * p2 - (j - 1.0) * p3) / static_cast<double>(j);
      }
      dp = static_cast<double>(n) * (x * p1 - p2) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

inline double log_factorial(unsigned n) { return std::lgamma(static_cast<double>(n) + 1.0); }

/// Generalized Laguerre polynomials L_k^{(alpha)}(x) for k = 0..n_max via the
/// forward three-term recurrence.
inline void laguerre_sequence(unsigned n_max, double alpha, double x, std::vector<double>& out) {
  out.resize(n_max + 1);
  out[0] = 1.0;
  if (n_max == 0) return;
  out[1] = 1.0 + alpha - x;
  for (unsigned k = 1; k < n_max; ++k) {
    out[k + 1] = ((2.0 * k + 1.0 + alpha - x) * out[k] - (k + alpha) * out[k - 1]) / (k + 1.0);
  }
}

inline double laguerre(unsigned n, double alpha, double x) {
  std::vector<double> seq;
  laguerre_sequence(n, alpha, x, seq);
  return seq[n];
}

/// Phase angle folded into [0, 2*pi).
inline double wrap_angle(double phi) {
  double r = std::fmod(phi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Threading. The worker count is a process-wide cap, initialised from the
// SYMPLECTOMO_THREADS environment variable. Work is always split into the same
// task list regardless of the cap and results are reduced in task order, so
// outputs are bitwise identical for any thread count.

namespace detail {
inline std::atomic<unsigned>& thread_cap() {
  static std::atomic<unsigned> cap = [] {
    if (const char* env = std::getenv("SYMPLECTOMO_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v > 0) return static_cast<unsigned>(v);
    }
    return 1u;
  }();
  return cap;
}
}  // namespace detail

inline void set_thread_count(unsigned n) { detail::thread_cap() = std::max(1u, n); }
inline unsigned thread_count() { return detail::thread_cap(); }

/// Evaluates fn(i) for i in [0, n) and returns the results in index order.
template <class Fn>
auto parallel_map(std::size_t n, Fn&& fn) -> std::vector<decltype(fn(std::size_t{0}))> {
  using R = decltype(fn(std::size_t{0}));
  std::vector<R> results(n);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) results[i] = fn(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) results[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

/// Sums fn(i) for i in [0, n) as a fixed number of contiguous chunks whose
/// partial sums are added in chunk order. `zero` seeds every partial sum.
template <class T, class Fn>
T chunked_sum(std::size_t n, const T& zero, Fn&& fn, std::size_t chunks = 32) {
  chunks = std::max<std::size_t>(1, std::min(chunks, n));
  const auto partial = parallel_map(chunks, [&](std::size_t c) {
    T acc = zero;
    const std::size_t lo = n * c / chunks;
    const std::size_t hi = n * (c + 1) / chunks;
    for (std::size_t i = lo; i < hi; ++i) acc += fn(i);
    return acc;
  });
  T total = zero;
  for (const auto& p : partial) total += p;
  return total;
}

}  // namespace symplectomo
