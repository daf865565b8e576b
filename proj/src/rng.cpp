#include "groupform/rng.hpp"

#include <cmath>

#include "groupform/errors.hpp"

namespace groupform {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw ConfigError("empty_range", "uniform_int requires lo <= hi");
  const auto width = static_cast<double>(hi - lo + 1);
  const auto offset = static_cast<std::int64_t>(uniform() * width);
  return lo + std::min(offset, hi - lo);
}

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  return u * scale;
}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(splitmix64(seed_ ^ splitmix64(stream)));
}

double sample_truncated_normal(double mu, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw NumericalError("invalid_sigma", "sigma must be nonnegative");
  if (sigma == 0.0) {
    if (mu < 0.0) {
      throw NumericalError("empty_support", "degenerate normal at negative mu has no mass on [0, inf)");
    }
    return mu;
  }
  if (mu >= -2.0 * sigma) {
    for (;;) {
      const double x = mu + sigma * rng.normal();
      if (x >= 0.0) return x;
    }
  }
  // Standardized lower bound a > 2: exponential proposal with the optimal rate.
  const double a = -mu / sigma;
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a - std::log1p(-rng.uniform()) / rate;
    const double d = z - rate;
    if (rng.uniform() <= std::exp(-0.5 * d * d)) return mu + sigma * z;
  }
}

Vector sample_bias(const BiasSpec& spec, std::size_t k_groups, Rng& rng) {
  if (spec.explicit_values) return *spec.explicit_values;
  Vector eps(k_groups);
  for (double& e : eps) e = sample_truncated_normal(spec.mu, spec.sigma, rng);
  return eps;
}

std::size_t categorical_index(std::span<const double> p, double u) {
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    cumulative += p[k];
    if (p[k] > 0.0) last_positive = k;
    if (u < cumulative) return k;
  }
  return last_positive;
}

}  // namespace groupform
