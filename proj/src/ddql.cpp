#include "execlab/ddql.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "execlab/binio.hpp"

namespace execlab::ddql {

namespace {

constexpr char kPolicyMagic[8] = {'E', 'X', 'L', 'Q', 'P', 'O', 'L', '1'};

// Purpose tags for RNG substreams: stream id = tag + episode index. Distinct
// tags keep training paths, exploration, evaluation paths and batch sampling
// independent, while making paired evaluations reproducible per episode.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kSampleStream = 2;
constexpr std::uint64_t kTrainPriceBase = 0x100000000ULL;
constexpr std::uint64_t kExploreBase = 0x200000000ULL;
constexpr std::uint64_t kEvalPriceBase = 0x300000000ULL;

double clamp1(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

std::string feature_mode_name(FeatureMode mode) {
  return mode == FeatureMode::QT ? "qt" : "qts";
}

FeatureMode parse_feature_mode(const std::string& name) {
  if (name == "qt" || name == "QT") return FeatureMode::QT;
  if (name == "qts" || name == "QTS") return FeatureMode::QTS;
  throw std::invalid_argument("unknown feature mode: " + name);
}

void PriceBounds::update(double s) {
  if (!seen) {
    lo = hi = s;
    seen = true;
    return;
  }
  lo = std::min(lo, s);
  hi = std::max(hi, s);
}

int FeatureSpec::write_state(int q, int t, double s, double* out) const {
  out[0] = clamp1(2.0 * static_cast<double>(q) / q0 - 1.0);
  out[1] = n > 1 ? clamp1(2.0 * static_cast<double>(t) / (n - 1) - 1.0) : -1.0;
  if (mode == FeatureMode::QT) return 2;
  if (bounds.degenerate())
    out[2] = 0.0;
  else
    out[2] = clamp1(2.0 * (s - bounds.lo) / (bounds.hi - bounds.lo) - 1.0);
  return 3;
}

std::vector<double> normalize_features(int q, int t, double s, int v, const FeatureSpec& spec) {
  if (q < 0 || q > spec.q0) throw std::invalid_argument("normalize_features: q outside [0, q0]");
  if (t < 0 || t >= spec.n) throw std::invalid_argument("normalize_features: t outside [0, n)");
  if (v < 0 || v > q) throw std::invalid_argument("normalize_features: v outside [0, q]");
  std::vector<double> out(static_cast<std::size_t>(net_input_dim(spec.mode)));
  const int sd = spec.write_state(q, t, s, out.data());
  out[static_cast<std::size_t>(sd)] = spec.action_feature(v);
  return out;
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity < 2) throw std::invalid_argument("replay memory: capacity must be at least 2");
  buf_.reserve(capacity);
}

void ReplayMemory::push(const Transition& t) {
  buf_.push_back(t);
  if (buf_.size() >= capacity_) buf_.erase(buf_.begin(), buf_.begin() + static_cast<long>(buf_.size() / 2));
}

void ReplayMemory::sample_indices(std::size_t count, rng::Rng& rng, std::vector<std::size_t>& out) const {
  if (buf_.empty()) throw std::logic_error("replay memory: cannot sample from empty buffer");
  out.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(buf_.size())));
}

int greedy_action(const net::QNetwork& q_main, const FeatureSpec& spec, int q, int t, double s,
                  net::Workspace& ws) {
  double feats[4];
  const int sd = spec.write_state(q, t, s, feats);
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int v = 0; v <= q; ++v) {
    feats[sd] = spec.action_feature(v);
    const double val = net::forward(q_main, {feats, static_cast<std::size_t>(sd) + 1}, ws);
    if (val > best_val) {  // strict: ties stay with the smaller volume
      best_val = val;
      best = v;
    }
  }
  return best;
}

int select_action(const market::EpisodeState& state, double epsilon, const net::QNetwork& q_main,
                  const FeatureSpec& spec, rng::Rng& rng, net::Workspace& ws) {
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("select_action: epsilon outside [0,1]");
  if (state.q < 0) throw std::invalid_argument("select_action: negative inventory");
  if (state.t == spec.n - 1) return state.q;
  if (epsilon > 0.0 && rng.uniform01() <= epsilon)
    return rng.binomial(state.q, 1.0 / static_cast<double>(spec.n - state.t));
  return greedy_action(q_main, spec, state.q, state.t, state.s, ws);
}

void compute_targets(const ReplayMemory& memory, const std::vector<std::size_t>& idx, double gamma,
                     const net::QNetwork& main, const net::QNetwork& tgt, const FeatureSpec& spec,
                     std::vector<double>& out) {
  if (idx.empty()) throw std::invalid_argument("compute_targets: empty batch");
  out.resize(idx.size());
  net::Workspace ws;
  const int sd = state_dim(spec.mode);
  double feats[4];
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const Transition& tr = memory[idx[i]];
    if (tr.terminal) {
      out[i] = tr.reward;
      continue;
    }
    std::copy(tr.next_state.begin(), tr.next_state.begin() + sd, feats);
    // One step from the end the policy must dump the full inventory, so the
    // feasible set collapses to {next_q}; maxing over the untrained siblings
    // there would feed fantasy values into the bootstrap.
    int best = tr.next_q;
    if (tr.next_t < spec.n - 1) {
      double best_val = -std::numeric_limits<double>::infinity();
      for (int v = 0; v <= tr.next_q; ++v) {
        feats[sd] = spec.action_feature(v);
        const double val = net::forward(main, {feats, static_cast<std::size_t>(sd) + 1}, ws);
        if (val > best_val) {
          best_val = val;
          best = v;
        }
      }
    }
    feats[sd] = spec.action_feature(best);
    out[i] = tr.reward + gamma * net::forward(tgt, {feats, static_cast<std::size_t>(sd) + 1}, ws);
  }
}

std::vector<double> compute_targets(const ReplayMemory& memory, const std::vector<std::size_t>& idx,
                                    double gamma, const net::QNetwork& main, const net::QNetwork& tgt,
                                    const FeatureSpec& spec) {
  std::vector<double> out;
  compute_targets(memory, idx, gamma, main, tgt, spec, out);
  return out;
}

void TrainConfig::validate() const {
  if (train_episodes < 1) throw std::invalid_argument("train config: need at least one episode");
  if (test_episodes < 0) throw std::invalid_argument("train config: negative test episode count");
  if (batch_size < 1) throw std::invalid_argument("train config: batch size must be positive");
  if (sync_interval < 1) throw std::invalid_argument("train config: sync interval must be positive");
  if (!(epsilon_decay > 0.0 && epsilon_decay < 1.0))
    throw std::invalid_argument("train config: decay must lie in (0,1)");
  if (!(discount > 0.0 && discount <= 1.0)) throw std::invalid_argument("train config: discount must lie in (0,1]");
  if (batch_size > memory_capacity) throw std::invalid_argument("train config: batch size exceeds memory capacity");
}

int Policy::action(const market::EpisodeState& state) const {
  thread_local net::Workspace ws;
  if (state.t == spec.n - 1) return state.q;
  return greedy_action(q_main, spec, state.q, state.t, state.s, ws);
}

TrainResult train(const TrainConfig& config, const market::MarketParams& params, const TrajectoryGen& gen) {
  config.validate();
  params.validate();

  net::NetConfig ncfg;
  ncfg.input_dim = net_input_dim(config.mode);
  rng::Rng init_rng = rng::Rng::stream(config.seed, kInitStream);
  net::QNetwork main = net::init_network(ncfg, init_rng);
  net::QNetwork tgt = main;
  net::AdamState adam = net::adam_for(main, config.learning_rate);
  net::TrainScratch scratch;
  net::Workspace ws;

  ReplayMemory memory(static_cast<std::size_t>(config.memory_capacity));
  rng::Rng sample_rng = rng::Rng::stream(config.seed, kSampleStream);

  FeatureSpec spec;
  spec.mode = config.mode;
  spec.q0 = params.q0;
  spec.n = params.n;

  const bool price_feature = config.mode == FeatureMode::QTS;
  const auto batch = static_cast<std::size_t>(config.batch_size);
  std::vector<std::size_t> batch_idx;
  std::vector<double> inputs(batch * static_cast<std::size_t>(ncfg.input_dim));
  std::vector<double> targets;

  double epsilon = 1.0;
  long resets = 0;
  long actions = 0;

  TrainResult out;
  out.log.reserve(static_cast<std::size_t>(config.train_episodes));

  for (int ep = 0; ep < config.train_episodes; ++ep) {
    market::ImpactTrajectory traj = gen(ep);
    if (traj.steps() != params.n)
      throw std::invalid_argument("train: trajectory length must equal the horizon");
    rng::Rng price_rng = rng::Rng::stream(config.seed, kTrainPriceBase + static_cast<std::uint64_t>(ep));
    rng::Rng explore_rng = rng::Rng::stream(config.seed, kExploreBase + static_cast<std::uint64_t>(ep));

    market::EpisodeState state;
    state.q = params.q0;
    state.s = params.s0;
    if (price_feature) spec.bounds.update(state.s);

    double loss_sum = 0.0;
    int loss_count = 0;
    std::vector<market::Fill> fills;
    fills.reserve(static_cast<std::size_t>(params.n));

    for (int t = 0; t < params.n; ++t) {
      const int v = select_action(state, epsilon, main, spec, explore_rng, ws);
      const market::StepResult step = market::step_market(state, v, traj, params, price_rng);
      if (price_feature) spec.bounds.update(step.next.s);

      Transition tr;
      spec.write_state(state.q, state.t, state.s, tr.state.data());
      spec.write_state(step.next.q, step.next.t, step.next.s, tr.next_state.data());
      tr.action = v;
      tr.reward = step.reward;
      tr.next_q = step.next.q;
      tr.next_t = step.next.t;
      tr.terminal = t == params.n - 1;
      memory.push(tr);
      fills.push_back(step.fill);
      state = step.next;

      if (memory.size() >= batch) {
        memory.sample_indices(batch, sample_rng, batch_idx);
        compute_targets(memory, batch_idx, config.discount, main, tgt, spec, targets);
        const int sd = state_dim(config.mode);
        for (std::size_t i = 0; i < batch; ++i) {
          const Transition& sampled = memory[batch_idx[i]];
          double* row = inputs.data() + i * static_cast<std::size_t>(ncfg.input_dim);
          std::copy(sampled.state.begin(), sampled.state.begin() + sd, row);
          row[sd] = spec.action_feature(sampled.action);
        }
        double loss = 0.0;
        try {
          loss = net::train_batch(main, adam, inputs, targets, scratch);
        } catch (const std::runtime_error& e) {
          throw std::runtime_error(std::string(e.what()) + " in episode " + std::to_string(ep));
        }
        loss_sum += loss;
        ++loss_count;
      }

      ++actions;
      if (actions % config.sync_interval == 0) {
        ++resets;
        epsilon = std::pow(config.epsilon_decay, static_cast<double>(resets));
        net::copy_weights(main, tgt);
      }
    }

    TrainLogRow row;
    row.episode = ep;
    row.epsilon = epsilon;
    row.shortfall = market::implementation_shortfall(params.s0, params.q0, fills);
    row.mean_loss = loss_count > 0 ? loss_sum / loss_count : std::numeric_limits<double>::quiet_NaN();
    out.log.push_back(row);
  }

  out.policy.q_main = std::move(main);
  out.policy.spec = spec;  // bounds frozen from here on
  return out;
}

EvalResult evaluate(const EpisodeActionFn& act, int episodes, const TrajectoryGen& gen,
                    const market::MarketParams& params, std::uint64_t seed) {
  if (episodes < 0) throw std::invalid_argument("evaluate: negative episode count");
  params.validate();
  EvalResult res;
  res.shortfall.reserve(static_cast<std::size_t>(episodes));
  res.cash.reserve(static_cast<std::size_t>(episodes));
  for (int ep = 0; ep < episodes; ++ep) {
    const market::ImpactTrajectory traj = gen(ep);
    rng::Rng price_rng = rng::Rng::stream(seed, kEvalPriceBase + static_cast<std::uint64_t>(ep));
    const market::EpisodeResult r = market::simulate_episode(
        [&](const market::EpisodeState& s) { return act(s, traj); }, traj, params, price_rng);
    res.shortfall.push_back(r.shortfall);
    res.cash.push_back(r.cash);
  }
  return res;
}

std::vector<HeatmapRow> policy_heatmap(const Policy& policy, const std::vector<double>& s_levels) {
  const FeatureSpec& spec = policy.spec;
  std::vector<double> levels;
  if (spec.mode == FeatureMode::QT) {
    levels = {std::numeric_limits<double>::quiet_NaN()};
  } else if (s_levels.empty()) {
    levels = {-1.0, -0.5, 0.0, 0.5, 1.0};
  } else {
    levels = s_levels;
  }

  std::vector<HeatmapRow> rows;
  rows.reserve(levels.size() * static_cast<std::size_t>(spec.n) * static_cast<std::size_t>(spec.q0 + 1));
  for (const double level : levels) {
    // Map the normalised level back to a raw price for the feature builder.
    double s_raw = 0.0;
    if (spec.mode == FeatureMode::QTS && !spec.bounds.degenerate())
      s_raw = spec.bounds.lo + (level + 1.0) / 2.0 * (spec.bounds.hi - spec.bounds.lo);
    for (int t = 0; t < spec.n; ++t) {
      for (int q = 0; q <= spec.q0; ++q) {
        market::EpisodeState state;
        state.t = t;
        state.q = q;
        state.s = s_raw;
        rows.push_back(HeatmapRow{level, t, q, policy.action(state)});
      }
    }
  }
  return rows;
}

void save_policy(const std::string& path, const Policy& policy) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_policy: cannot open " + path);
  os.write(kPolicyMagic, sizeof(kPolicyMagic));
  binio::put_u8(os, policy.spec.mode == FeatureMode::QT ? 0 : 1);
  binio::put_u8(os, policy.spec.bounds.seen ? 1 : 0);
  binio::put_u32(os, static_cast<std::uint32_t>(policy.spec.q0));
  binio::put_u32(os, static_cast<std::uint32_t>(policy.spec.n));
  binio::put_f64(os, policy.spec.bounds.lo);
  binio::put_f64(os, policy.spec.bounds.hi);
  net::write_network(os, policy.q_main);
  if (!os) throw std::runtime_error("save_policy: write failed");
  os.close();

  std::ofstream meta(path + ".meta", std::ios::trunc);
  meta << "format: qpolicy-binary-v1\n"
       << "features: " << feature_mode_name(policy.spec.mode) << "\n"
       << "q0: " << policy.spec.q0 << "\n"
       << "horizon: " << policy.spec.n << "\n"
       << "price_lo: " << policy.spec.bounds.lo << "\n"
       << "price_hi: " << policy.spec.bounds.hi << "\n"
       << "parameters: " << policy.q_main.config.parameter_count() << "\n";
}

Policy load_policy(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_policy: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || !std::equal(magic, magic + 8, kPolicyMagic))
    throw std::runtime_error("load_policy: bad magic");

  Policy policy;
  const std::uint8_t mode = binio::get_u8(is);
  if (mode > 1) throw std::runtime_error("load_policy: unknown feature mode");
  policy.spec.mode = mode == 0 ? FeatureMode::QT : FeatureMode::QTS;
  policy.spec.bounds.seen = binio::get_u8(is) != 0;
  policy.spec.q0 = static_cast<int>(binio::get_u32(is));
  policy.spec.n = static_cast<int>(binio::get_u32(is));
  policy.spec.bounds.lo = binio::get_f64(is);
  policy.spec.bounds.hi = binio::get_f64(is);
  policy.q_main = net::read_network(is);
  if (policy.q_main.config.input_dim != net_input_dim(policy.spec.mode))
    throw std::runtime_error("load_policy: network input width does not match feature mode");
  return policy;
}

void write_training_log(const std::string& path, const std::vector<TrainLogRow>& log) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("write_training_log: cannot open " + path);
  os << "# execlab-csv training-log-v1\n";
  os << "episode,epsilon,shortfall,mean_loss\n";
  char buf[128];
  for (const TrainLogRow& row : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g\n", row.episode, row.epsilon, row.shortfall,
                  row.mean_loss);
    os << buf;
  }
}

}  // namespace execlab::ddql
