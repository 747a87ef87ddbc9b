#include <cmath>
#include <vector>

#include "doctest.h"
#include "execlab/market.hpp"
#include "execlab/rng.hpp"

using namespace execlab;
using market::ImpactTrajectory;
using market::MarketParams;

namespace {

MarketParams paper_params() {
  MarketParams p;
  p.s0 = 10.0;
  p.sigma = 1e-5;
  p.q0 = 20;
  p.n = 10;
  p.tau = 1.0;
  return p;
}

}  // namespace

TEST_CASE("constant trajectory repeats the coefficients") {
  const ImpactTrajectory traj = market::constant_trajectory(0.001, 0.002, 10);
  REQUIRE(traj.steps() == 10);
  for (int t = 0; t < 10; ++t) {
    CHECK(traj.kappa[static_cast<std::size_t>(t)] == 0.001);
    CHECK(traj.alpha[static_cast<std::size_t>(t)] == 0.002);
  }
  CHECK_THROWS(market::constant_trajectory(0.0, 0.002, 10));
  CHECK_THROWS(market::constant_trajectory(0.001, 0.002, 0));
}

TEST_CASE("linear trajectory follows kappa0 + beta*t and rejects sign flips") {
  market::LinearImpactSpec inc{0.0001, 0.0002, 0.0001, 0.0004};
  const ImpactTrajectory traj = market::linear_trajectory(inc, 10);
  CHECK(traj.kappa[0] == doctest::Approx(0.0001).epsilon(1e-12));
  CHECK(traj.kappa[9] == doctest::Approx(0.0001 + 9 * 0.0002).epsilon(1e-12));
  CHECK(traj.alpha[5] == doctest::Approx(0.0001 + 5 * 0.0004).epsilon(1e-12));

  market::LinearImpactSpec dec{0.002, -0.0002, 0.004, -0.0004};
  const ImpactTrajectory dtraj = market::linear_trajectory(dec, 10);
  CHECK(dtraj.kappa[9] == doctest::Approx(0.002 - 9 * 0.0002).epsilon(1e-12));
  // kappa hits zero at t = 10, so an 11-step horizon is rejected
  CHECK_THROWS(market::linear_trajectory(dec, 11));
}

TEST_CASE("one market step: fill price, reward, permanent impact") {
  MarketParams p = paper_params();
  p.sigma = 0.0;  // isolate the deterministic part
  const ImpactTrajectory traj = market::constant_trajectory(0.001, 0.002, 10);
  rng::Rng rng(1);

  market::EpisodeState s;
  s.q = 20;
  s.s = 10.0;
  const market::StepResult r = market::step_market(s, 2, traj, p, rng);
  CHECK(r.fill.exec_price == doctest::Approx(9.996).epsilon(1e-12));
  CHECK(r.reward == doctest::Approx(19.992).epsilon(1e-12));
  CHECK(r.next.s == doctest::Approx(9.998).epsilon(1e-12));
  CHECK(r.next.q == 18);
  CHECK(r.next.t == 1);
  CHECK(r.next.cash == doctest::Approx(19.992).epsilon(1e-12));

  CHECK_THROWS(market::step_market(s, -1, traj, p, rng));
  CHECK_THROWS(market::step_market(s, 21, traj, p, rng));
  market::EpisodeState done = s;
  done.t = 10;
  CHECK_THROWS(market::step_market(done, 1, traj, p, rng));
}

TEST_CASE("price noise is mean zero with scale sigma*sqrt(tau)") {
  MarketParams p = paper_params();
  p.sigma = 0.5;
  p.tau = 4.0;
  const ImpactTrajectory traj = market::constant_trajectory(0.001, 0.002, 10);
  rng::Rng rng(7);
  market::EpisodeState s;
  s.q = 20;
  s.s = 10.0;
  const int n = 20'000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ds = market::step_market(s, 0, traj, p, rng).next.s - s.s;
    sum += ds;
    sq += ds * ds;
  }
  const double scale = p.sigma * std::sqrt(p.tau);
  CHECK(std::abs(sum / n) < 3.0 * scale / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(sq / n - scale * scale) < 3.0 * scale * scale * std::sqrt(2.0 / n));
}

TEST_CASE("implementation shortfall of an immediate block sale") {
  // Selling everything at once only pays temporary impact: IS = alpha*q0^2.
  MarketParams p = paper_params();
  p.sigma = 0.0;
  const ImpactTrajectory traj = market::constant_trajectory(0.001, 0.002, 10);
  rng::Rng rng(1);
  market::EpisodeState s;
  s.q = 20;
  s.s = 10.0;
  const market::StepResult r = market::step_market(s, 20, traj, p, rng);
  std::vector<market::Fill> fills{r.fill};
  CHECK(market::implementation_shortfall(10.0, 20, fills) == doctest::Approx(0.8).epsilon(1e-12));

  fills[0].volume = 19;
  CHECK_THROWS(market::implementation_shortfall(10.0, 20, fills));
}

TEST_CASE("expected cost of TWAP under constant impacts") {
  const ImpactTrajectory traj = market::constant_trajectory(0.001, 0.002, 10);
  const std::vector<double> twap(10, 2.0);
  // temporary: 10 * 0.002*4 = 0.08; permanent: sum_t 2 * 0.001*2*t = 0.18
  CHECK(market::expected_cost(twap, traj) == doctest::Approx(0.26).epsilon(1e-14));

  const std::vector<double> short_sched(9, 2.0);
  CHECK_THROWS(market::expected_cost(short_sched, traj));
  std::vector<double> negative(10, 2.0);
  negative[3] = -0.5;
  CHECK_THROWS(market::expected_cost(negative, traj));
}

TEST_CASE("expected cost matches a straight-line recomputation on ragged schedules") {
  market::LinearImpactSpec inc{0.0001, 0.0002, 0.0001, 0.0004};
  const ImpactTrajectory traj = market::linear_trajectory(inc, 10);
  const std::vector<double> v{5, 0, 3, 2, 0, 4, 1, 2, 2, 1};
  double want = 0.0;
  for (int t = 0; t < 10; ++t) {
    want += traj.alpha[static_cast<std::size_t>(t)] * v[static_cast<std::size_t>(t)] * v[static_cast<std::size_t>(t)];
    for (int s = 0; s < t; ++s)
      want += v[static_cast<std::size_t>(t)] * traj.kappa[static_cast<std::size_t>(s)] * v[static_cast<std::size_t>(s)];
  }
  CHECK(market::expected_cost(v, traj) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("episodes conserve inventory and cash") {
  const MarketParams p = paper_params();
  const ImpactTrajectory traj = market::constant_trajectory(0.001, 0.002, 10);
  rng::Rng action_rng(11);
  for (int ep = 0; ep < 10'000; ++ep) {
    rng::Rng price = rng::Rng::stream(5, static_cast<std::uint64_t>(ep));
    const auto result = market::simulate_episode(
        [&action_rng](const market::EpisodeState& s) { return action_rng.uniform_int(s.q + 1); }, traj,
        p, price);
    long long sold = 0;
    for (const auto& f : result.fills) {
      REQUIRE(f.volume >= 0);
      sold += f.volume;
    }
    REQUIRE(sold == p.q0);
    // cash + shortfall identity: proceeds + IS = s0*q0
    REQUIRE(std::abs(result.cash + result.shortfall - p.s0 * p.q0) < 1e-9);
  }
}

TEST_CASE("Monte Carlo mean shortfall matches expected_cost for random schedules") {
  MarketParams p = paper_params();
  rng::Rng sched_rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    // random integer schedule summing to q0
    std::vector<int> sched(10, 0);
    int q = p.q0;
    for (int t = 0; t < 9; ++t) {
      const int v = sched_rng.uniform_int(q + 1);
      sched[static_cast<std::size_t>(t)] = v;
      q -= v;
    }
    sched[9] = q;
    std::vector<double> real(sched.begin(), sched.end());
    const ImpactTrajectory traj = market::constant_trajectory(0.001, 0.002, 10);
    const double expect = market::expected_cost(real, traj);

    const int episodes = 2'000;
    std::vector<double> is;
    is.reserve(episodes);
    for (int ep = 0; ep < episodes; ++ep) {
      rng::Rng price = rng::Rng::stream(200 + static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(ep));
      const auto result = market::simulate_episode(
          [&sched](const market::EpisodeState& s) { return sched[static_cast<std::size_t>(s.t)]; },
          traj, p, price);
      is.push_back(result.shortfall);
    }
    double mean = 0.0;
    for (double x : is) mean += x;
    mean /= episodes;
    double var = 0.0;
    for (double x : is) var += (x - mean) * (x - mean);
    var /= episodes - 1;
    const double se = std::sqrt(var / episodes);
    CHECK(std::abs(mean - expect) < 3.0 * se + 1e-12);
  }
}

TEST_CASE("correlated normal pairs hit the target correlation") {
  rng::Rng rng(21);
  const double omega = 0.9;
  const int n = 100'000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const auto [x, y] = market::correlated_normals(omega, rng);
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double mx = sx / n, my = sy / n;
  const double corr = (sxy / n - mx * my) /
                      std::sqrt((sxx / n - mx * mx) * (syy / n - my * my));
  CHECK(std::abs(corr - omega) < 0.05);
}

TEST_CASE("CIR impact paths stay positive and reproduce by seed") {
  market::CIRImpactSpec spec;  // defaults: lambda 1, theta 0.001/0.002, sigma 0.002, omega 0.9
  spec.validate();
  for (int ep = 0; ep < 2'000; ++ep) {
    rng::Rng rng = rng::Rng::stream(31, static_cast<std::uint64_t>(ep));
    const ImpactTrajectory traj = market::cir_trajectory(spec, 10, 10, rng);
    REQUIRE(traj.steps() == 10);
    for (int t = 0; t < 10; ++t) {
      REQUIRE(traj.kappa[static_cast<std::size_t>(t)] > 0.0);
      REQUIRE(traj.alpha[static_cast<std::size_t>(t)] > 0.0);
    }
    CHECK(traj.kappa[0] == spec.theta_kappa);
    CHECK(traj.alpha[0] == spec.theta_alpha);
  }
  rng::Rng a = rng::Rng::stream(31, 7), b = rng::Rng::stream(31, 7);
  const ImpactTrajectory ta = market::cir_trajectory(spec, 10, 10, a);
  const ImpactTrajectory tb = market::cir_trajectory(spec, 10, 10, b);
  CHECK(ta.kappa == tb.kappa);
  CHECK(ta.alpha == tb.alpha);
}

TEST_CASE("CIR paths mean-revert around theta") {
  market::CIRImpactSpec spec;
  spec.lambda_kappa = 5.0;
  spec.lambda_alpha = 5.0;
  const int episodes = 4'000;
  double sum_k = 0.0, sum_a = 0.0;
  int count = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    rng::Rng rng = rng::Rng::stream(77, static_cast<std::uint64_t>(ep));
    const ImpactTrajectory traj = market::cir_trajectory(spec, 10, 10, rng);
    for (int t = 0; t < 10; ++t) {
      sum_k += traj.kappa[static_cast<std::size_t>(t)];
      sum_a += traj.alpha[static_cast<std::size_t>(t)];
      ++count;
    }
  }
  CHECK(sum_k / count == doctest::Approx(spec.theta_kappa).epsilon(0.05));
  CHECK(sum_a / count == doctest::Approx(spec.theta_alpha).epsilon(0.05));
}

TEST_CASE("Feller-violating CIR parameters are rejected") {
  market::CIRImpactSpec spec;
  spec.sigma_kappa = 0.1;  // 2*1*0.001 = 0.002 < 0.01
  CHECK_THROWS(spec.validate());
  market::CIRImpactSpec spec2;
  spec2.sigma_alpha = 0.1;
  CHECK_THROWS(spec2.validate());
  market::CIRImpactSpec ok;
  CHECK_NOTHROW(ok.validate());
  // boundary: 2*lambda*theta == sigma^2 passes
  market::CIRImpactSpec edge;
  edge.lambda_kappa = 1.0;
  edge.theta_kappa = 0.002;
  edge.sigma_kappa = std::sqrt(2.0 * 1.0 * 0.002);
  CHECK_NOTHROW(edge.validate());
  market::CIRImpactSpec bad_corr;
  bad_corr.omega = 1.5;
  CHECK_THROWS(bad_corr.validate());
}

TEST_CASE("simulate_episode forces terminal liquidation") {
  const MarketParams p = paper_params();
  const ImpactTrajectory traj = market::constant_trajectory(0.001, 0.002, 10);
  rng::Rng rng(3);
  // a policy that never wants to sell still ends flat
  const auto result =
      market::simulate_episode([](const market::EpisodeState&) { return 0; }, traj, p, rng);
  long long sold = 0;
  for (const auto& f : result.fills) sold += f.volume;
  CHECK(sold == p.q0);
  CHECK(result.fills.back().volume == p.q0);
}
