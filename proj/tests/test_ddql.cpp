#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "execlab/ddql.hpp"
#include "execlab/market.hpp"
#include "execlab/strategies.hpp"

using namespace execlab;
using ddql::FeatureMode;
using ddql::FeatureSpec;

namespace {

FeatureSpec qt_spec() {
  FeatureSpec spec;
  spec.mode = FeatureMode::QT;
  return spec;
}

FeatureSpec qts_spec(double lo, double hi) {
  FeatureSpec spec;
  spec.mode = FeatureMode::QTS;
  spec.bounds.update(lo);
  spec.bounds.update(hi);
  return spec;
}

// Tiny Q-network over (q̄, t̄, v̄) whose value peaks exactly at v = peak:
// two opposed ramps fold |v̄ - v̄*| into a negative score away from the peak.
net::QNetwork peaked_net(const FeatureSpec& spec, int peak) {
  net::NetConfig cfg;
  cfg.input_dim = 3;
  cfg.hidden_layers = 1;
  cfg.hidden_width = 2;
  net::QNetwork q;
  q.config = cfg;
  const double a = spec.action_feature(peak);
  q.weights = {{0.0, 0.0, 1.0, 0.0, 0.0, -1.0}, {-1.0, -1.0}};
  q.biases = {{-a, a}, {0.0}};
  return q;
}

net::QNetwork flat_net(int input_dim) {
  net::NetConfig cfg;
  cfg.input_dim = input_dim;
  cfg.hidden_layers = 1;
  cfg.hidden_width = 2;
  net::QNetwork q;
  q.config = cfg;
  q.weights = {std::vector<double>(static_cast<std::size_t>(2 * input_dim), 0.0), {0.0, 0.0}};
  q.biases = {{0.0, 0.0}, {0.0}};
  return q;
}

market::MarketParams default_market() { return market::MarketParams{}; }

ddql::TrajectoryGen constant_gen(const market::MarketParams& p, double kappa, double alpha) {
  market::ImpactTrajectory traj = market::constant_trajectory(kappa, alpha, p.n);
  return [traj](int) { return traj; };
}

}  // namespace

TEST_CASE("feature names round trip and reject junk") {
  CHECK(ddql::feature_mode_name(FeatureMode::QT) == "qt");
  CHECK(ddql::feature_mode_name(FeatureMode::QTS) == "qts");
  CHECK(ddql::parse_feature_mode("qt") == FeatureMode::QT);
  CHECK(ddql::parse_feature_mode("QTS") == FeatureMode::QTS);
  CHECK_THROWS(ddql::parse_feature_mode("price"));
  CHECK(ddql::net_input_dim(FeatureMode::QT) == 3);
  CHECK(ddql::net_input_dim(FeatureMode::QTS) == 4);
}

TEST_CASE("feature normalisation maps the corners of the state space") {
  const FeatureSpec spec = qt_spec();
  const auto start = ddql::normalize_features(20, 0, 10.0, 0, spec);
  REQUIRE(start.size() == 3);
  CHECK(start[0] == 1.0);    // full inventory
  CHECK(start[1] == -1.0);   // first step
  CHECK(start[2] == -1.0);   // zero volume
  const auto mid = ddql::normalize_features(10, 0, 10.0, 10, spec);
  CHECK(mid[0] == 0.0);
  CHECK(mid[2] == 0.0);
  const auto last = ddql::normalize_features(5, 9, 10.0, 5, spec);
  CHECK(last[1] == 1.0);

  const FeatureSpec ps = qts_spec(9.0, 11.0);
  const auto top = ddql::normalize_features(20, 0, 11.0, 0, ps);
  REQUIRE(top.size() == 4);
  CHECK(top[2] == 1.0);
  CHECK(ddql::normalize_features(20, 0, 9.0, 0, ps)[2] == -1.0);
  CHECK(ddql::normalize_features(20, 0, 10.0, 0, ps)[2] == 0.0);
  CHECK(ddql::normalize_features(20, 0, 42.0, 0, ps)[2] == 1.0);  // clamped

  // unseen or collapsed bounds neutralise the price feature
  FeatureSpec blank;
  blank.mode = FeatureMode::QTS;
  CHECK(ddql::normalize_features(20, 0, 10.0, 0, blank)[2] == 0.0);

  CHECK_THROWS(ddql::normalize_features(-1, 0, 10.0, 0, spec));
  CHECK_THROWS(ddql::normalize_features(21, 0, 10.0, 0, spec));
  CHECK_THROWS(ddql::normalize_features(20, 10, 10.0, 0, spec));
  CHECK_THROWS(ddql::normalize_features(20, 0, 10.0, 21, spec));
  CHECK_THROWS(ddql::normalize_features(5, 0, 10.0, 6, spec));
}

TEST_CASE("state features clamp at the post-terminal step") {
  const FeatureSpec spec = qt_spec();
  double out[3];
  CHECK(spec.write_state(0, 10, 10.0, out) == 2);
  CHECK(out[0] == -1.0);
  CHECK(out[1] == 1.0);
}

TEST_CASE("greedy action finds the engineered peak and breaks ties low") {
  const FeatureSpec spec = qt_spec();
  const net::QNetwork peaked = peaked_net(spec, 3);
  net::Workspace ws;
  CHECK(ddql::greedy_action(peaked, spec, 20, 0, 10.0, ws) == 3);
  CHECK(ddql::greedy_action(peaked, spec, 5, 4, 10.0, ws) == 3);
  // peak out of reach: nearest feasible volume wins
  CHECK(ddql::greedy_action(peaked, spec, 2, 4, 10.0, ws) == 2);

  const net::QNetwork flat = flat_net(3);
  CHECK(ddql::greedy_action(flat, spec, 20, 0, 10.0, ws) == 0);
}

TEST_CASE("action selection: forced liquidation, exploration law, greedy path") {
  const FeatureSpec spec = qt_spec();
  const net::QNetwork peaked = peaked_net(spec, 3);
  net::Workspace ws;

  market::EpisodeState last;
  last.t = 9;
  last.q = 7;
  last.s = 10.0;
  rng::Rng rng(1), untouched(1);
  CHECK(ddql::select_action(last, 1.0, peaked, spec, rng, ws) == 7);
  CHECK(rng.next_u64() == untouched.next_u64());  // no randomness consumed

  market::EpisodeState first;
  first.t = 0;
  first.q = 20;
  first.s = 10.0;
  rng::Rng explore(2);
  double sum = 0.0;
  const int draws = 20'000;
  for (int i = 0; i < draws; ++i)
    sum += ddql::select_action(first, 1.0, peaked, spec, explore, ws);
  const double mean = sum / draws;
  const double se = std::sqrt(20 * 0.1 * 0.9 / draws);
  CHECK(std::abs(mean - 2.0) <= 3.0 * se);

  rng::Rng greedy_rng(3), greedy_ref(3);
  CHECK(ddql::select_action(first, 0.0, peaked, spec, greedy_rng, ws) == 3);
  CHECK(greedy_rng.next_u64() == greedy_ref.next_u64());  // epsilon=0 draws nothing

  CHECK_THROWS(ddql::select_action(first, 1.5, peaked, spec, greedy_rng, ws));
  CHECK_THROWS(ddql::select_action(first, -0.1, peaked, spec, greedy_rng, ws));
}

TEST_CASE("replay memory keeps the newest half on overflow") {
  ddql::ReplayMemory mem(10);
  for (int i = 0; i < 9; ++i) {
    ddql::Transition tr;
    tr.action = i;
    mem.push(tr);
  }
  CHECK(mem.size() == 9);
  ddql::Transition tr;
  tr.action = 9;
  mem.push(tr);  // hits capacity, oldest half evicted
  CHECK(mem.size() == 5);
  CHECK(mem[0].action == 5);
  CHECK(mem[4].action == 9);

  rng::Rng rng(4);
  std::vector<std::size_t> idx;
  mem.sample_indices(64, rng, idx);
  CHECK(idx.size() == 64);
  for (std::size_t i : idx) CHECK(i < mem.size());

  CHECK_THROWS(ddql::ReplayMemory(1));
  ddql::ReplayMemory empty(10);
  CHECK_THROWS(empty.sample_indices(1, rng, idx));
}

TEST_CASE("double-Q targets: terminal rows pass the reward through") {
  const FeatureSpec spec = qt_spec();
  ddql::ReplayMemory mem(100);
  ddql::Transition tr;
  spec.write_state(20, 0, 10.0, tr.state.data());
  spec.write_state(15, 1, 10.0, tr.next_state.data());
  tr.action = 5;
  tr.reward = 49.99;
  tr.next_q = 15;
  tr.next_t = 1;
  tr.terminal = true;
  mem.push(tr);
  tr.terminal = false;
  tr.reward = 30.0;
  mem.push(tr);

  const net::QNetwork peaked = peaked_net(spec, 3);
  const std::vector<std::size_t> idx{0, 1, 0};
  const auto zero_gamma = ddql::compute_targets(mem, idx, 0.0, peaked, peaked, spec);
  REQUIRE(zero_gamma.size() == 3);
  CHECK(zero_gamma[0] == 49.99);
  CHECK(zero_gamma[1] == 30.0);  // gamma = 0 strips the bootstrap
  CHECK(zero_gamma[2] == 49.99);

  // straight-line recomputation with main == tgt
  net::Workspace ws;
  const int best = ddql::greedy_action(peaked, spec, 15, 1, 10.0, ws);
  std::vector<double> feats{tr.next_state[0], tr.next_state[1], spec.action_feature(best)};
  const double want = 30.0 + 1.0 * net::forward(peaked, feats, ws);
  const auto full = ddql::compute_targets(mem, {1}, 1.0, peaked, peaked, spec);
  CHECK(full[0] == doctest::Approx(want).epsilon(1e-12));

  CHECK_THROWS(ddql::compute_targets(mem, {}, 1.0, peaked, peaked, spec));
}

TEST_CASE("double-Q targets use the main net to pick and the target net to score") {
  const FeatureSpec spec = qt_spec();
  ddql::ReplayMemory mem(100);
  ddql::Transition tr;
  spec.write_state(20, 0, 10.0, tr.state.data());
  spec.write_state(10, 1, 10.0, tr.next_state.data());
  tr.action = 10;
  tr.reward = 0.0;
  tr.next_q = 10;
  tr.next_t = 1;
  tr.terminal = false;
  mem.push(tr);

  const net::QNetwork main = peaked_net(spec, 3);  // argmax at v = 3
  const net::QNetwork tgt = peaked_net(spec, 8);   // scores v = 3 poorly
  const auto y = ddql::compute_targets(mem, {0}, 1.0, main, tgt, spec);

  net::Workspace ws;
  std::vector<double> feats{tr.next_state[0], tr.next_state[1], spec.action_feature(3)};
  const double want = net::forward(tgt, feats, ws);
  CHECK(y[0] == doctest::Approx(want).epsilon(1e-12));
  CHECK(y[0] < -0.4);  // visibly not the target net's own maximum (0)
}

TEST_CASE("double-Q targets honour the forced trade one step from the end") {
  const FeatureSpec spec = qt_spec();
  ddql::ReplayMemory mem(100);
  ddql::Transition tr;
  spec.write_state(20, 8, 10.0, tr.state.data());
  spec.write_state(5, 9, 10.0, tr.next_state.data());
  tr.action = 15;
  tr.reward = 120.0;
  tr.next_q = 5;
  tr.next_t = 9;
  tr.terminal = false;
  mem.push(tr);

  // The main net prefers v = 0, but at t = n-1 the policy must sell the
  // remaining 5, so the bootstrap must score exactly that action.
  const net::QNetwork main = peaked_net(spec, 0);
  const net::QNetwork tgt = peaked_net(spec, 8);
  const auto y = ddql::compute_targets(mem, {0}, 1.0, main, tgt, spec);

  net::Workspace ws;
  std::vector<double> forced{tr.next_state[0], tr.next_state[1], spec.action_feature(5)};
  std::vector<double> fantasy{tr.next_state[0], tr.next_state[1], spec.action_feature(0)};
  CHECK(y[0] == doctest::Approx(120.0 + net::forward(tgt, forced, ws)).epsilon(1e-12));
  CHECK(y[0] != doctest::Approx(120.0 + net::forward(tgt, fantasy, ws)).epsilon(1e-12));

  // One step earlier the same reading would be wrong: the argmax applies.
  tr.next_t = 8;
  mem.push(tr);
  const auto interior = ddql::compute_targets(mem, {1}, 1.0, main, tgt, spec);
  CHECK(interior[0] == doctest::Approx(120.0 + net::forward(tgt, fantasy, ws)).epsilon(1e-12));
}

TEST_CASE("training config validation") {
  ddql::TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.batch_size = 200'000;
  CHECK_THROWS(cfg.validate());
  cfg = ddql::TrainConfig{};
  cfg.epsilon_decay = 1.0;
  CHECK_THROWS(cfg.validate());
  cfg = ddql::TrainConfig{};
  cfg.discount = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = ddql::TrainConfig{};
  cfg.train_episodes = 0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("a short training run is deterministic, decays epsilon on schedule, and liquidates") {
  const market::MarketParams params = default_market();
  ddql::TrainConfig cfg;
  cfg.train_episodes = 20;
  cfg.seed = 11;
  const auto gen = constant_gen(params, 0.001, 0.002);

  const ddql::TrainResult a = ddql::train(cfg, params, gen);
  const ddql::TrainResult b = ddql::train(cfg, params, gen);

  REQUIRE(a.log.size() == 20);
  // 20 episodes x 10 actions = 200 actions -> exactly two decay/sync events
  CHECK(a.log.back().epsilon == std::pow(0.995, 2.0));
  CHECK(a.log.front().epsilon == 1.0);  // first decay lands after episode 10
  for (const auto& row : a.log) CHECK(std::isfinite(row.shortfall));
  // the batch threshold (32 transitions) is only crossed during episode 3,
  // so the first rows log NaN loss and later rows a finite mean
  CHECK(std::isnan(a.log.front().mean_loss));
  CHECK(std::isnan(a.log[2].mean_loss));
  CHECK(std::isfinite(a.log[3].mean_loss));
  CHECK(std::isfinite(a.log.back().mean_loss));

  CHECK(a.policy.q_main.weights == b.policy.q_main.weights);
  CHECK(a.policy.q_main.biases == b.policy.q_main.biases);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].shortfall == b.log[i].shortfall);
    CHECK(a.log[i].epsilon == b.log[i].epsilon);
  }

  ddql::TrainConfig other = cfg;
  other.seed = 12;
  const ddql::TrainResult c = ddql::train(other, params, gen);
  CHECK(a.policy.q_main.weights != c.policy.q_main.weights);

  // the policy always empties the book
  market::EpisodeState state;
  state.t = params.n - 1;
  state.q = 13;
  state.s = params.s0;
  CHECK(a.policy.action(state) == 13);

  ddql::TrainConfig bad = cfg;
  const auto short_gen = [&](int) { return market::constant_trajectory(0.001, 0.002, 5); };
  CHECK_THROWS(ddql::train(bad, params, short_gen));
}

TEST_CASE("price-aware training freezes observed bounds into the policy") {
  const market::MarketParams params = default_market();
  ddql::TrainConfig cfg;
  cfg.train_episodes = 10;
  cfg.mode = FeatureMode::QTS;
  cfg.seed = 21;
  const ddql::TrainResult r = ddql::train(cfg, params, constant_gen(params, 0.001, 0.002));
  CHECK(r.policy.spec.mode == FeatureMode::QTS);
  CHECK(r.policy.spec.bounds.seen);
  CHECK(r.policy.spec.bounds.lo < params.s0);
  CHECK(r.policy.spec.bounds.hi >= r.policy.spec.bounds.lo);
  CHECK(r.policy.q_main.config.input_dim == 4);
  CHECK(r.policy.q_main.config.parameter_count() == 3901);
}

TEST_CASE("evaluation pairs paths by seed and matches the analytic cost law") {
  const market::MarketParams params = default_market();
  const auto gen = constant_gen(params, 0.001, 0.002);
  const std::vector<int> schedule = strategies::twap(params.q0, params.n);
  const ddql::EpisodeActionFn twap_fn = [&](const market::EpisodeState& s,
                                            const market::ImpactTrajectory&) {
    return schedule[static_cast<std::size_t>(s.t)];
  };

  const ddql::EvalResult empty = ddql::evaluate(twap_fn, 0, gen, params, 7);
  CHECK(empty.shortfall.empty());

  const int episodes = 500;
  const ddql::EvalResult r = ddql::evaluate(twap_fn, episodes, gen, params, 7);
  REQUIRE(r.shortfall.size() == episodes);
  double mean = 0.0;
  for (double is : r.shortfall) mean += is;
  mean /= episodes;
  double var = 0.0;
  for (double is : r.shortfall) var += (is - mean) * (is - mean);
  var /= (episodes - 1);
  const double expected = market::expected_cost(std::vector<double>(10, 2.0), gen(0));
  CHECK(expected == doctest::Approx(0.26).epsilon(1e-12));
  CHECK(std::abs(mean - expected) <= 3.0 * std::sqrt(var / episodes) + 1e-12);

  // cash + shortfall identity holds episode by episode
  for (std::size_t i = 0; i < r.shortfall.size(); ++i)
    CHECK(r.cash[i] + r.shortfall[i] == doctest::Approx(params.s0 * params.q0).epsilon(1e-9));

  const ddql::EvalResult again = ddql::evaluate(twap_fn, episodes, gen, params, 7);
  CHECK(r.shortfall == again.shortfall);
  const ddql::EvalResult other = ddql::evaluate(twap_fn, episodes, gen, params, 8);
  CHECK(r.shortfall != other.shortfall);
}

TEST_CASE("policy heatmap covers the lattice and honours the terminal rule") {
  const market::MarketParams params = default_market();
  ddql::Policy policy;
  policy.q_main = peaked_net(qt_spec(), 3);
  policy.spec = qt_spec();

  const auto rows = ddql::policy_heatmap(policy, {});
  REQUIRE(rows.size() == 10u * 21u);
  CHECK(std::isnan(rows.front().s_level));
  for (const auto& row : rows) {
    CHECK(row.action >= 0);
    CHECK(row.action <= row.q);
    if (row.t == params.n - 1) CHECK(row.action == row.q);
    if (row.t < params.n - 1 && row.q >= 3) CHECK(row.action == 3);
  }

  ddql::Policy price_policy;
  price_policy.spec = qts_spec(9.0, 11.0);
  net::NetConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden_layers = 1;
  cfg.hidden_width = 2;
  price_policy.q_main.config = cfg;
  price_policy.q_main.weights = {std::vector<double>(8, 0.0), {0.0, 0.0}};
  price_policy.q_main.biases = {{0.0, 0.0}, {0.0}};
  const auto price_rows = ddql::policy_heatmap(price_policy, {});
  CHECK(price_rows.size() == 5u * 10u * 21u);
  CHECK(price_rows.front().s_level == -1.0);
  CHECK(price_rows.back().s_level == 1.0);
}

TEST_CASE("policy checkpoints survive a bit-exact round trip") {
  const market::MarketParams params = default_market();
  ddql::TrainConfig cfg;
  cfg.train_episodes = 5;
  cfg.mode = FeatureMode::QTS;
  cfg.seed = 31;
  const ddql::TrainResult r = ddql::train(cfg, params, constant_gen(params, 0.001, 0.002));

  const auto path = std::filesystem::temp_directory_path() / "execlab_policy_roundtrip.bin";
  ddql::save_policy(path.string(), r.policy);
  const ddql::Policy loaded = ddql::load_policy(path.string());
  CHECK(loaded.spec.mode == FeatureMode::QTS);
  CHECK(loaded.spec.q0 == r.policy.spec.q0);
  CHECK(loaded.spec.n == r.policy.spec.n);
  CHECK(loaded.spec.bounds.seen == r.policy.spec.bounds.seen);
  CHECK(loaded.spec.bounds.lo == r.policy.spec.bounds.lo);
  CHECK(loaded.spec.bounds.hi == r.policy.spec.bounds.hi);
  CHECK(loaded.q_main.weights == r.policy.q_main.weights);
  CHECK(loaded.q_main.biases == r.policy.q_main.biases);
  CHECK(std::filesystem::exists(path.string() + ".meta"));
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".meta");

  CHECK_THROWS(ddql::load_policy("/nonexistent/policy.bin"));
}

TEST_CASE("training log format") {
  std::vector<ddql::TrainLogRow> log(2);
  log[0].episode = 0;
  log[0].epsilon = 1.0;
  log[0].shortfall = 0.26;
  log[0].mean_loss = std::numeric_limits<double>::quiet_NaN();
  log[1].episode = 1;
  log[1].epsilon = 0.995;
  log[1].shortfall = 0.1234567890123;
  log[1].mean_loss = 42.0;

  const auto path = std::filesystem::temp_directory_path() / "execlab_training_log.csv";
  ddql::write_training_log(path.string(), log);
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  CHECK(line == "# execlab-csv training-log-v1");
  std::getline(is, line);
  CHECK(line == "episode,epsilon,shortfall,mean_loss");
  std::getline(is, line);
  CHECK(line.substr(0, 4) == "0,1,");
  CHECK(line.find("nan") != std::string::npos);
  std::getline(is, line);
  CHECK(line.substr(0, 8) == "1,0.995,");
  CHECK(line.find("0.123456789012") != std::string::npos);
  std::filesystem::remove(path);
}
