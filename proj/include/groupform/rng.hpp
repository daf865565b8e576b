#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>

#include "groupform/model.hpp"

namespace groupform {

/// Seedable 64-bit random stream with a fully specified output mapping.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniform doubles take the top 53 bits; normals use Marsaglia's
/// polar method with the spare value cached. No std::*_distribution is used,
/// so a given seed yields the same draws with any conforming standard library.
class Rng {
 public:
  static constexpr std::string_view algorithm = "mt19937_64+u53+marsaglia-polar";

  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  double normal();

  /// Independent stream derived from this stream's seed and `stream`
  /// via SplitMix64 finalization.
  Rng split(std::uint64_t stream) const;

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.engine_ == b.engine_ && a.spare_ == b.spare_;
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::optional<double> spare_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Draw from N(mu, sigma^2) conditioned on [0, inf).
///
/// Plain rejection from the untruncated normal when mu >= -2 sigma; for
/// deeper truncation an exponential-proposal tail sampler (Robert, 1995).
/// Throws NumericalError("empty_support") when sigma == 0 and mu < 0.
double sample_truncated_normal(double mu, double sigma, Rng& rng);

/// Bias vector for one run or step: explicit values if present, otherwise
/// K independent truncated-normal draws.
Vector sample_bias(const BiasSpec& spec, std::size_t k_groups, Rng& rng);

/// Inverse-CDF selection: smallest k with u < p_0 + ... + p_k, scanning in
/// ascending order. Falls back to the last group with positive probability
/// when rounding leaves the cumulative sum below u.
std::size_t categorical_index(std::span<const double> p, double u);

}  // namespace groupform
