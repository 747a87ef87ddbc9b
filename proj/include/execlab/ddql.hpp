#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "execlab/market.hpp"
#include "execlab/net.hpp"
#include "execlab/rng.hpp"

namespace execlab::ddql {

/// Input layout of the Q-network: inventory/time/action, optionally with the
/// latest normalised mid-price as a third state feature.
enum class FeatureMode { QT, QTS };

inline int state_dim(FeatureMode mode) { return mode == FeatureMode::QT ? 2 : 3; }
inline int net_input_dim(FeatureMode mode) { return state_dim(mode) + 1; }

std::string feature_mode_name(FeatureMode mode);
FeatureMode parse_feature_mode(const std::string& name);

/// Running min/max of observed mid-prices; accumulated while training,
/// frozen for evaluation.
struct PriceBounds {
  double lo = 0.0;
  double hi = 0.0;
  bool seen = false;

  void update(double s);
  bool degenerate() const { return !seen || hi <= lo; }
};

/// Everything needed to map an (inventory, step, price, action) tuple onto
/// the network input cube [-1,1]^d.
struct FeatureSpec {
  FeatureMode mode = FeatureMode::QT;
  int q0 = 20;
  int n = 10;
  PriceBounds bounds;

  /// Writes the state block (q̄, t̄ [, S̄]) into out; returns state_dim.
  /// t may equal n (the state after the final trade); features clamp to 1.
  int write_state(int q, int t, double s, double* out) const;
  double action_feature(int v) const { return 2.0 * static_cast<double>(v) / q0 - 1.0; }
};

/// Full normalised feature vector (q̄, t̄ [, S̄], v̄). Validates 0 <= q <= q0,
/// 0 <= t < n, 0 <= v <= q.
std::vector<double> normalize_features(int q, int t, double s, int v, const FeatureSpec& spec);

/// One replay record. State blocks are stored normalised and without the
/// action feature; next_q and next_t bound the feasible actions at the next
/// state (at next_t = n-1 the only feasible action is next_q).
struct Transition {
  std::array<double, 3> state{};
  std::array<double, 3> next_state{};
  double reward = 0.0;
  int action = 0;
  int next_q = 0;
  int next_t = 0;
  bool terminal = false;
};

/// FIFO replay buffer; when `capacity` is reached the oldest half is
/// dropped, keeping the newest entries.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return buf_.size(); }
  const Transition& operator[](std::size_t i) const { return buf_[i]; }

  /// `count` indices uniform with replacement.
  void sample_indices(std::size_t count, rng::Rng& rng, std::vector<std::size_t>& out) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> buf_;
};

/// Epsilon-greedy action. At t = n-1 returns q without consuming RNG; with
/// probability epsilon explores Binomial(q, 1/(n-t)); otherwise greedy
/// argmax over v in {0..q}, ties toward the smallest v. epsilon = 0 skips
/// the threshold draw.
int select_action(const market::EpisodeState& state, double epsilon, const net::QNetwork& q_main,
                  const FeatureSpec& spec, rng::Rng& rng, net::Workspace& ws);

/// Greedy argmax over feasible actions for a (q, t, s) state.
int greedy_action(const net::QNetwork& q_main, const FeatureSpec& spec, int q, int t, double s,
                  net::Workspace& ws);

/// Double-Q regression targets for the sampled transitions: terminal y = r,
/// otherwise y = r + gamma * Q_tgt(s', v*) with v* chosen by Q_main over
/// the feasible actions of the next state. Feasibility includes the forced
/// final trade: when the next state sits one step from the end, v* = next_q
/// with no argmax (bootstrapping through actions the policy can never take
/// lets untrained Q-values leak into the targets and diverge).
void compute_targets(const ReplayMemory& memory, const std::vector<std::size_t>& idx, double gamma,
                     const net::QNetwork& main, const net::QNetwork& tgt, const FeatureSpec& spec,
                     std::vector<double>& out);
std::vector<double> compute_targets(const ReplayMemory& memory, const std::vector<std::size_t>& idx,
                                    double gamma, const net::QNetwork& main, const net::QNetwork& tgt,
                                    const FeatureSpec& spec);

struct TrainConfig {
  int train_episodes = 10'000;   // M
  int test_episodes = 5'000;     // B
  int batch_size = 32;           // b
  int sync_interval = 100;       // m, in actions
  double epsilon_decay = 0.995;  // c
  double discount = 1.0;         // gamma
  double learning_rate = 1e-4;
  int memory_capacity = 15'000;  // L
  FeatureMode mode = FeatureMode::QT;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Trained agent: greedy Q_main plus the feature map with frozen bounds.
struct Policy {
  net::QNetwork q_main;
  FeatureSpec spec;

  int action(const market::EpisodeState& state) const;
};

struct TrainLogRow {
  int episode = 0;
  double epsilon = 0.0;
  double shortfall = 0.0;
  double mean_loss = 0.0;  // NaN until the memory first fills to a batch
};

struct TrainResult {
  Policy policy;
  std::vector<TrainLogRow> log;
};

/// Yields the impact trajectory for a given episode index. Must be a pure
/// function of the index so paired strategies see identical paths.
using TrajectoryGen = std::function<market::ImpactTrajectory(int episode)>;

/// Runs M training episodes: epsilon-greedy rollouts into replay memory,
/// one batch per step once the memory holds b transitions, epsilon decay and
/// target sync every m actions. Price noise for episode i comes from a
/// dedicated stream of config.seed, as does exploration and batch sampling.
TrainResult train(const TrainConfig& config, const market::MarketParams& params, const TrajectoryGen& gen);

/// Strategy interface for evaluation: sees the public state; benchmark
/// policies that peek at the true impact path also get the trajectory.
using EpisodeActionFn = std::function<int(const market::EpisodeState&, const market::ImpactTrajectory&)>;

struct EvalResult {
  std::vector<double> shortfall;
  std::vector<double> cash;
};

/// `episodes` independent rollouts; episode i draws its trajectory from
/// gen(i) and its price noise from a stream of (seed, i), so any two
/// strategies evaluated with the same arguments trade on paired paths.
EvalResult evaluate(const EpisodeActionFn& act, int episodes, const TrajectoryGen& gen,
                    const market::MarketParams& params, std::uint64_t seed);

struct HeatmapRow {
  double s_level = 0.0;  // normalised price level; NaN in QT mode
  int t = 0;
  int q = 0;
  int action = 0;
};

/// Greedy action over the full (q, t) lattice, at each of `s_levels` for
/// price-aware policies (pass empty for QT mode).
std::vector<HeatmapRow> policy_heatmap(const Policy& policy, const std::vector<double>& s_levels);

/// Policy checkpoint: feature mode + normalisation bounds + the network
/// block. Round trip is bit-exact. Writes a `.meta` sidecar.
void save_policy(const std::string& path, const Policy& policy);
Policy load_policy(const std::string& path);

void write_training_log(const std::string& path, const std::vector<TrainLogRow>& log);

}  // namespace execlab::ddql
