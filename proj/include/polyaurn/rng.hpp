// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "polyaurn/errors.hpp"

namespace polyaurn {

namespace detail {

// splitmix64 finalizer; used only to decorrelate (seed, stream) pairs
// before seeding the engine.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Identifies one independent random stream. Replicate k of a run with
/// base seed s uses {s, k}; the mapping to engine state is fixed, so
/// results do not depend on how replicates are scheduled over threads.
struct RngStreamSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Deterministic random stream: a mersenne-twister engine plus the
/// handful of variate generators the samplers need. Gaussians use the
/// polar method and gammas Marsaglia-Tsang, both chosen over the
/// std::distributions because their draw sequences are pinned down
/// here, not by the standard library vendor.
class RngStream {
 public:
  explicit RngStream(RngStreamSpec spec)
      : engine_(detail::splitmix64(detail::splitmix64(spec.seed) ^
                                   detail::splitmix64(~spec.stream))) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1): top 53 bits scaled, so every value is exactly
  /// representable and 0 can occur but 1 cannot.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1): rejects exact zeros (needed under logs).
  double uniform01_open() {
    double u;
    do u = uniform01();
    while (u == 0.0);
    return u;
  }

  /// Standard normal via the polar (Marsaglia) method; the spare
  /// variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double mult = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * mult;
    has_spare_ = true;
    return u * mult;
  }

  /// Gamma(shape, 1). Marsaglia-Tsang squeeze for shape >= 1; smaller
  /// shapes use Gamma(shape) = Gamma(shape+1) * U^(1/shape). Shapes
  /// 1/2 and 1 take exact shortcuts (half a squared normal; a standard
  /// exponential) because stick-breaking hits them in bulk; the
  /// shortcut is part of the pinned draw sequence, not an option.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw ParameterError("gamma shape must be positive");
    if (shape == 0.5) {
      double z = normal();
      return 0.5 * z * z;
    }
    if (shape == 1.0) return -std::log(uniform01_open());
    if (shape < 1.0) {
      double u = uniform01_open();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform01_open();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Beta(a, b) as X/(X+Y) for independent gammas; X is drawn first.
  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

  /// Index in [0, weights.size()) with probability proportional to
  /// weights[k]; weights must be nonnegative with a positive sum.
  std::size_t discrete(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw ParameterError("discrete weights must be nonnegative");
      total += w;
    }
    if (!(total > 0.0)) throw ParameterError("discrete weights must have positive sum");
    double u = uniform01() * total;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
      acc += weights[k];
      if (u < acc) return k;
    }
    return weights.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace polyaurn
