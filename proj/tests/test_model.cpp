#include <doctest.h>

#include <cmath>
#include <random>

#include "groupform/errors.hpp"
#include "groupform/model.hpp"
#include "groupform/concentration.hpp"
#include "oracles.hpp"

using namespace groupform;

namespace {
constexpr double kSmooth = 1e-12;

ModelParams params_with(double beta, AttractionMode mode = AttractionMode::full) {
  ModelParams p;
  p.beta = beta;
  p.attraction_mode = mode;
  return p;
}
}  // namespace

TEST_CASE("proportions of counts") {
  auto s = proportions(GroupCounts::from({3, 1}));
  CHECK(s[0] == 0.75);
  CHECK(s[1] == 0.25);
  std::vector<double> sizes{2.0, 2.0, 4.0};
  auto t = proportions(sizes);
  CHECK(t[2] == 0.5);
}

TEST_CASE("empty population is an error") {
  try {
    proportions(GroupCounts::from({0, 0}));
    FAIL("no throw");
  } catch (const NumericalError& e) {
    CHECK(e.code() == "empty_population");
  }
  CHECK_THROWS_AS(GroupCounts::from({1}), ConfigError);
  CHECK_THROWS_AS(GroupCounts::from({1, -1}), ConfigError);
}

TEST_CASE("mutual attraction examples") {
  CHECK(mutual_attraction(0.2, 0.4, kSmooth) == doctest::Approx(0.3).epsilon(1e-11));
  CHECK(mutual_attraction(0.4, 0.2, kSmooth) == doctest::Approx(0.3).epsilon(1e-11));
  CHECK(std::abs(mutual_attraction(0.0, 0.0, kSmooth)) < 1e-15);
  CHECK(mutual_attraction(0.5, 0.5, kSmooth) == doctest::Approx(0.5).epsilon(1e-11));
}

TEST_CASE("attraction matrix, theta and p for (0.75, 0.25)") {
  SimplexState s{{0.75, 0.25}};
  auto m = attraction_matrix(s, kSmooth);
  CHECK(std::abs(m.m(0, 1) - 7.0 / 12.0) < 10 * kSmooth);
  CHECK(std::abs(m.m(0, 0) - 0.75) < 10 * kSmooth);
  auto theta = cumulative_attraction(m);
  CHECK(std::abs(theta[0] - 4.0 / 3.0) < 10 * kSmooth);
  CHECK(std::abs(theta[1] - 5.0 / 6.0) < 10 * kSmooth);
  auto a = attraction_potential(theta, s, 1.0, 1e-9);
  CHECK(std::abs(a[0] - 16.0 / 9.0) < 1e-10);
  CHECK(std::abs(a[1] - 10.0 / 3.0) < 1e-10);
  std::vector<double> eps{0.0, 0.0};
  auto p = choice_probabilities(a, eps);
  CHECK(std::abs(p[0] - 8.0 / 23.0) < 1e-10);
  CHECK(std::abs(p[1] - 15.0 / 23.0) < 1e-10);
}

TEST_CASE("beta = 0 potential equals theta exactly") {
  SimplexState s{{0.1, 0.3, 0.6}};
  auto theta = cumulative_attraction(attraction_matrix(s, kSmooth));
  auto a = attraction_potential(theta, s, 0.0, 1e-9);
  for (std::size_t k = 0; k < 3; ++k) CHECK(a[k] == theta[k]);
}

TEST_CASE("reduced model example") {
  SimplexState s{{0.8, 0.2}};
  std::vector<double> eps{1.0, 1.0};
  auto p = reduced_choice_probabilities(s, 1.0, 1.0, eps, 1e-9);
  CHECK(std::abs(p[0] - 3.0 / 11.0) < 1e-12);
  CHECK(std::abs(p[1] - 8.0 / 11.0) < 1e-12);
}

TEST_CASE("empty group with beta = 0 gets finite probability") {
  SimplexState s{{1.0, 0.0}};
  std::vector<double> eps{0.0, 0.0};
  auto p = choice_map(s, params_with(0.0), eps);
  CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("degenerate attraction is an error") {
  std::vector<double> a{0.0, 0.0};
  std::vector<double> eps{0.0, 0.0};
  try {
    choice_probabilities(a, eps);
    FAIL("no throw");
  } catch (const NumericalError& e) {
    CHECK(e.code() == "degenerate_attraction");
  }
}

TEST_CASE("gradient and Hessian examples") {
  auto g = gradient_of_M(0.1, 0.4);
  CHECK(g[0] == doctest::Approx(-0.5));
  CHECK(g[1] == doctest::Approx(0.9375));
  auto h = hessian_of_M(0.25, 0.5);
  CHECK(h(0, 0) == doctest::Approx(4.0));
  CHECK(h(0, 1) == doctest::Approx(-2.0));
  CHECK(h(1, 0) == doctest::Approx(-2.0));
  CHECK(h(1, 1) == doctest::Approx(1.0));
  CHECK(std::abs(h.determinant()) < 1e-12);
  auto d = hessian_of_M(0.5, 0.5);
  CHECK(d(0, 0) == doctest::Approx(4.0));
  CHECK(d(0, 1) == doctest::Approx(-4.0));
  CHECK(d(1, 1) == doctest::Approx(4.0));
  CHECK_THROWS_AS(gradient_of_M(0.1, 0.0), Error);
  CHECK_THROWS_AS(hessian_of_M(0.1, -1.0), Error);
}

TEST_CASE("property: p matches the loop oracle and sums to one") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> beta_d(-2.0, 2.0), eps_d(0.0, 0.5);
  std::uniform_int_distribution<int> k_d(2, 12);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto k = static_cast<std::size_t>(k_d(gen));
    auto pi = oracle::random_simplex(gen, k, 1e-4);
    std::vector<double> eps(k);
    for (auto& e : eps) e = eps_d(gen);
    const double beta = beta_d(gen);
    auto p = choice_map(SimplexState{pi}, params_with(beta), eps);
    auto ref = oracle::full_probabilities(pi, beta, eps);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(p[i] > 0.0);
      CHECK(std::abs(p[i] - ref[i]) < 1e-9);
      total += p[i];
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    auto r = choice_map(SimplexState{pi}, params_with(beta, AttractionMode::reduced), eps);
    auto rref = oracle::reduced_probabilities(pi, 1.0, beta, eps);
    for (std::size_t i = 0; i < k; ++i) CHECK(std::abs(r[i] - rref[i]) < 1e-9);
  }
}

TEST_CASE("property: M is symmetric and homogeneous of degree one") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.001, 1.0), c(0.1, 5.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = u(gen), y = u(gen), s = c(gen);
    CHECK(mutual_attraction(x, y, 0.0) == mutual_attraction(y, x, 0.0));
    CHECK(mutual_attraction(s * x, s * y, 0.0) ==
          doctest::Approx(s * mutual_attraction(x, y, 0.0)).epsilon(1e-12));
    CHECK(mutual_attraction(x, y, 0.0) == doctest::Approx(oracle::mutual_attraction(x, y)).epsilon(1e-14));
  }
}

TEST_CASE("property: gradient agrees with finite differences") {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const double h = 1e-5;
  for (int i = 0; i < 500; ++i) {
    double y = u(gen);
    double x = u(gen) * y * 0.95;
    if (y - h <= x + h) continue;
    auto g = gradient_of_M(x, y);
    const double gx = (reduced_attraction(x + h, y) - reduced_attraction(x - h, y)) / (2 * h);
    const double gy = (reduced_attraction(x, y + h) - reduced_attraction(x, y - h)) / (2 * h);
    CHECK(std::abs(g[0] - gx) < 1e-6);
    CHECK(std::abs(g[1] - gy) < 1e-6);
  }
}

TEST_CASE("property: Hessian is singular and PSD on the grid") {
  std::mt19937_64 gen(14);
  std::normal_distribution<double> n(0.0, 1.0);
  const int grid = 99;
  for (int j = 1; j <= grid; ++j) {
    const double y = static_cast<double>(j) / (grid + 1);
    for (int i = 0; i < grid; ++i) {
      const double x = static_cast<double>(i) / grid * y;
      auto h = hessian_of_M(x, y);
      const double norm2 = h.squaredNorm();
      const double det = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
      REQUIRE(std::abs(det) <= 1e-9 * norm2);
      for (int r = 0; r < 10; ++r) {
        Eigen::Vector2d v(n(gen), n(gen));
        REQUIRE(v.dot(h * v) >= -1e-12 * norm2 * v.squaredNorm());
      }
    }
  }
}

TEST_CASE("params validation") {
  ModelParams p;
  CHECK_NOTHROW(p.validate(3));
  p.bias.sigma = -1.0;
  CHECK_THROWS_AS(p.validate(3), ConfigError);
  ModelParams q;
  q.bias.explicit_values = Vector{0.1, 0.2};
  CHECK_THROWS_AS(q.validate(3), ConfigError);
  ModelParams r;
  r.attraction_mode = AttractionMode::reduced;
  r.theta_scalar = 0.0;
  CHECK_THROWS_AS(r.validate(3), ConfigError);
}

TEST_CASE("concentration statistics") {
  std::vector<double> a{5561.0, 626.0};
  auto s = concentration_stats(a);
  CHECK(s.max_min_ratio == doctest::Approx(5561.0 / 626.0));
  CHECK(s.max_share == doctest::Approx(5561.0 / 6187.0));
  std::vector<double> b{1537.0, 1451.0};
  CHECK(concentration_stats(b).max_min_ratio == doctest::Approx(1.05927).epsilon(1e-5));
  std::vector<double> eq{4.0, 4.0, 4.0};
  CHECK(concentration_stats(eq).gini == 0.0);
  std::vector<double> one{0.0, 0.0, 9.0};
  auto c = concentration_stats(one);
  CHECK(c.max_min_ratio == 9.0);
  CHECK(c.gini == doctest::Approx(2.0 / 3.0));
}
