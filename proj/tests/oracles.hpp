#pragma once

// Reference computations used as independent checks. Written directly from
// the model definitions with plain loops; they share no code with the library.

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

/// Case-split mutual attraction without smoothing.
inline double mutual_attraction(double x, double y) {
  const double m = x > y ? x : y;
  if (m == 0.0) return 0.0;
  return (x * x + y * y - x * y) / m;
}

/// Entry probabilities of the full model (self term included in theta).
inline std::vector<double> full_probabilities(const std::vector<double>& pi, double beta,
                                              const std::vector<double>& eps) {
  const std::size_t k = pi.size();
  std::vector<double> w(k);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double theta = 0.0;
    for (std::size_t j = 0; j < k; ++j) theta += mutual_attraction(pi[i], pi[j]);
    w[i] = theta * std::pow(pi[i], -beta) + eps[i];
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

inline std::vector<double> reduced_probabilities(const std::vector<double>& pi, double theta, double beta,
                                                 const std::vector<double>& eps) {
  std::vector<double> w(pi.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    w[i] = theta * std::pow(pi[i], -beta) + eps[i];
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

/// Laplace expansion along the first row.
inline double cofactor_det(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  if (n == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  double det = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<double>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<double> row;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != c) row.push_back(a[r][j]);
      }
      minor.push_back(row);
    }
    det += (c % 2 == 0 ? 1.0 : -1.0) * a[0][c] * cofactor_det(minor);
  }
  return det;
}

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Mean of N(mu, sigma^2) conditioned on [0, inf).
inline double truncated_normal_mean(double mu, double sigma) {
  const double a = -mu / sigma;
  return mu + sigma * normal_pdf(a) / normal_sf(a);
}

/// Random point on the simplex with every entry >= lo.
inline std::vector<double> random_simplex(std::mt19937_64& gen, std::size_t k, double lo = 0.0) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> v(k);
  double total = 0.0;
  for (auto& x : v) {
    x = expo(gen);
    total += x;
  }
  const double scale = 1.0 - lo * static_cast<double>(k);
  for (auto& x : v) x = lo + scale * x / total;
  return v;
}

}  // namespace oracle
