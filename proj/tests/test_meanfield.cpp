#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "groupform/errors.hpp"
#include "groupform/meanfield.hpp"
#include "oracles.hpp"

using namespace groupform;

namespace {

ModelParams reduced(double beta, double theta = 1.0) {
  ModelParams p;
  p.beta = beta;
  p.attraction_mode = AttractionMode::reduced;
  p.theta_scalar = theta;
  return p;
}

ModelParams full(double beta) {
  ModelParams p;
  p.beta = beta;
  return p;
}

double max_dev(const Vector& pi) {
  const double u = 1.0 / static_cast<double>(pi.size());
  double m = 0.0;
  for (double v : pi) m = std::max(m, std::abs(v - u));
  return m;
}

}  // namespace

TEST_CASE("drift examples") {
  std::vector<double> eps{1.0, 1.0};
  auto f = drift(SimplexState{{0.8, 0.2}}, reduced(1.0), eps);
  CHECK(f[0] == doctest::Approx(-29.0 / 55.0).epsilon(1e-12));
  CHECK(f[1] == doctest::Approx(29.0 / 55.0).epsilon(1e-12));
  auto z = drift(SimplexState{Vector(5, 0.2)}, full(0.7), Vector(5, 0.3));
  for (double v : z) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("property: drift sums to zero") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> eps_d(0.0, 1.0), beta_d(-1.5, 2.0);
  for (int i = 0; i < 500; ++i) {
    auto pi = oracle::random_simplex(gen, 2 + i % 9, 1e-3);
    std::vector<double> eps(pi.size());
    for (auto& e : eps) e = eps_d(gen);
    for (auto params : {full(beta_d(gen)), reduced(beta_d(gen))}) {
      auto f = drift(SimplexState{pi}, params, eps);
      double s = 0.0;
      for (double v : f) s += v;
      CHECK(std::abs(s) < 1e-14);
    }
  }
}

TEST_CASE("property: drift points toward uniform (K = 2, and the extreme groups)") {
  std::mt19937_64 gen(22);
  std::uniform_real_distribution<double> u(0.001, 0.999), beta_d(0.05, 2.0), eps_d(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(gen);
    if (std::abs(x - 0.5) < 1e-6) continue;
    const double e = eps_d(gen);
    auto f = drift(SimplexState{{x, 1.0 - x}}, reduced(beta_d(gen)), std::vector<double>{e, e});
    CHECK((x > 0.5 ? f[0] < 0.0 : f[0] > 0.0));
  }
  // Intermediate groups can move away from 1/K; the largest and smallest never do.
  for (int i = 0; i < 500; ++i) {
    const std::size_t k = 3 + static_cast<std::size_t>(i % 8);
    auto pi = oracle::random_simplex(gen, k, 1e-3);
    const double e = eps_d(gen);
    auto f = drift(SimplexState{pi}, reduced(beta_d(gen)), Vector(k, e));
    const auto hi = static_cast<std::size_t>(std::max_element(pi.begin(), pi.end()) - pi.begin());
    const auto lo = static_cast<std::size_t>(std::min_element(pi.begin(), pi.end()) - pi.begin());
    CHECK(f[hi] < 0.0);
    CHECK(f[lo] > 0.0);
  }
  auto witness = drift(SimplexState{{0.3, 0.69, 0.01}}, reduced(1.0), Vector(3, 0.01));
  CHECK(witness[0] < 0.0);
}

TEST_CASE("renormalize clamps and rescales") {
  auto r = renormalize(std::vector<double>{0.5, -0.1, 0.6});
  CHECK(r.state[1] == 0.0);
  CHECK(r.state[0] + r.state[2] == doctest::Approx(1.0));
  CHECK(r.correction > 0.0);
}

TEST_CASE("ODE: uniform start is constant") {
  auto traj = integrate_ode(SimplexState{Vector(4, 0.25)}, full(0.5), Vector(4, 0.1), 0.01, 5.0, 50);
  for (const auto& pi : traj.pi_series) {
    for (double v : pi) CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
  }
  CHECK(traj.times.back() == 5.0);
  CHECK(traj.process == ProcessKind::mean_field);
}

TEST_CASE("ODE: K = 2 reduced converges monotonically") {
  auto traj = integrate_ode(SimplexState{{0.8, 0.2}}, reduced(1.0), std::vector<double>{1.0, 1.0}, 0.01, 10.0);
  for (std::size_t r = 1; r < traj.size(); ++r) {
    CHECK(std::abs(traj.pi_series[r][0] - 0.5) < std::abs(traj.pi_series[r - 1][0] - 0.5));
  }
  CHECK(std::abs(traj.pi_series.back()[0] - 0.5) < 1e-6);
}

TEST_CASE("property: max deviation from uniform never increases along the flow") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> beta_d(0.1, 2.0), eps_d(0.0, 0.5);
  for (int i = 0; i < 30; ++i) {
    const std::size_t k = 2 + static_cast<std::size_t>(i % 6);
    auto pi = oracle::random_simplex(gen, k, 0.01);
    const double e = eps_d(gen);
    auto traj = integrate_ode(SimplexState{pi}, reduced(beta_d(gen)), Vector(k, e), 0.01, 5.0);
    for (std::size_t r = 1; r < traj.size(); ++r) {
      REQUIRE(max_dev(traj.pi_series[r]) <= max_dev(traj.pi_series[r - 1]) + 1e-12);
    }
  }
}

TEST_CASE("ODE: RK4 is fourth order") {
  auto params = reduced(0.8);
  std::vector<double> eps{0.3, 0.1, 0.6};
  SimplexState s0{{0.6, 0.3, 0.1}};
  auto end = [&](double dt) { return integrate_ode(s0, params, eps, dt, 2.0, 1000000).pi_series.back(); };
  auto a = end(0.2), b = end(0.1), c = end(0.05);
  double d1 = 0.0, d2 = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    d1 = std::max(d1, std::abs(a[k] - b[k]));
    d2 = std::max(d2, std::abs(b[k] - c[k]));
  }
  const double ratio = d1 / d2;
  CHECK(ratio > 13.0);
  CHECK(ratio < 19.0);
}

TEST_CASE("ODE: invalid arguments") {
  CHECK_THROWS_AS(integrate_ode(SimplexState{{0.5, 0.5}}, full(0.5), std::vector<double>{0.1, 0.1}, 0.0, 1.0),
                  ConfigError);
}

TEST_CASE("fixed point: symmetric equilibrium") {
  for (std::size_t k : {2u, 5u, 15u}) {
    for (double beta : {0.1, 0.5, 1.0, 2.0}) {
      for (auto params : {full(beta), reduced(beta)}) {
        Vector start(k);
        for (std::size_t i = 0; i < k; ++i) start[i] = 1.0 + 0.3 * static_cast<double>(i % 3);
        double s = 0.0;
        for (double v : start) s += v;
        for (auto& v : start) v /= s;
        auto res = solve_fixed_point(params, Vector(k, 0.1), SimplexState{start});
        REQUIRE(res.converged);
        for (double v : res.pi_star.pi) CHECK(std::abs(v - 1.0 / static_cast<double>(k)) < 1e-10);
      }
    }
  }
}

TEST_CASE("fixed point: larger bias gives larger share, independent of start") {
  std::vector<double> eps{1.1, 0.9};
  auto params = reduced(1.0);
  std::mt19937_64 gen(24);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::optional<double> first;
  for (int i = 0; i < 10; ++i) {
    const double x = u(gen);
    auto res = solve_fixed_point(params, eps, SimplexState{{x, 1.0 - x}});
    REQUIRE(res.converged);
    CHECK(res.pi_star[0] > 0.5);
    CHECK(res.pi_star[1] < 0.5);
    if (!first) first = res.pi_star[0];
    CHECK(std::abs(res.pi_star[0] - *first) < 1e-10);
    // pi_k S = theta pi_k^(-beta) + eps_k with S the normalizer at pi*
    double total = 0.0;
    for (std::size_t k = 0; k < 2; ++k) total += std::pow(res.pi_star[k], -1.0) + eps[k];
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(std::abs(res.pi_star[k] * total - (std::pow(res.pi_star[k], -1.0) + eps[k])) < 1e-9 * total);
    }
  }
}

TEST_CASE("fixed point: non-convergence is reported") {
  FixedPointOptions opts;
  opts.max_iter = 2;
  auto res = solve_fixed_point(reduced(1.0), std::vector<double>{1.0, 1.0}, SimplexState{{0.9, 0.1}}, opts);
  CHECK_FALSE(res.converged);
  CHECK(res.residual_norm > opts.tol);
  FixedPointOptions bad;
  bad.relax = 0.0;
  CHECK_THROWS_AS(solve_fixed_point(reduced(1.0), std::vector<double>{1.0, 1.0}, SimplexState{{0.9, 0.1}}, bad),
                  ConfigError);
}

TEST_CASE("first-order equilibrium") {
  PerturbationInput in;
  in.theta = 1.0;
  in.beta = 1.0;
  in.eps_base = 1.0;
  in.k_groups = 2;
  in.eta_perturb = {0.1, -0.1};
  auto pi = first_order_equilibrium(in);
  CHECK(pi[0] == doctest::Approx(0.51));
  CHECK(pi[1] == doctest::Approx(0.49));

  PerturbationInput zero = in;
  zero.eta_perturb = {0.0, 0.0};
  CHECK(first_order_equilibrium(zero)[0] == 0.5);

  PerturbationInput five;
  five.k_groups = 5;
  five.eta_perturb = {0.1, -0.1, 0.05, -0.05, 0.0};
  auto base = first_order_equilibrium(five);
  for (double s : {0.5, 2.0, 3.0}) {
    PerturbationInput scaled = five;
    for (auto& v : scaled.eta_perturb) v *= s;
    auto p = first_order_equilibrium(scaled);
    for (std::size_t k = 0; k < 5; ++k) CHECK((p[k] - 0.2) == doctest::Approx(s * (base[k] - 0.2)).epsilon(1e-12));
  }

  auto params = perturbation_params(in);
  CHECK(params.attraction_mode == AttractionMode::reduced);
  CHECK(perturbation_bias(in) == Vector{1.1, 0.9});

  PerturbationInput off = in;
  off.eta_perturb = {0.1, 0.0};
  try {
    first_order_equilibrium(off);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == "eta_not_centered");
  }
  PerturbationInput degenerate = in;
  degenerate.beta = -1.0;
  degenerate.eps_base = 0.0;
  try {
    first_order_equilibrium(degenerate);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == "degenerate_expansion");
  }
}

TEST_CASE("first-order equilibrium agrees with the solver for small eta") {
  PerturbationInput in;
  in.k_groups = 2;
  in.eta_perturb = {0.01, -0.01};
  auto approx = first_order_equilibrium(in);
  auto res = solve_fixed_point(perturbation_params(in), perturbation_bias(in), SimplexState{{0.5, 0.5}});
  REQUIRE(res.converged);
  CHECK(std::abs(approx[0] - res.pi_star[0]) < 1e-4);
}
