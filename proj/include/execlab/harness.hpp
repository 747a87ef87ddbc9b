#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "execlab/ddql.hpp"
#include "execlab/market.hpp"
#include "execlab/strategies.hpp"

namespace execlab::harness {

/// Experiment families. The mixed_test_* scenarios train on alternating
/// increasing/decreasing episodes and evaluate on the named regime.
enum class Scenario {
  Constant,
  Increasing,
  Decreasing,
  MixedTestIncreasing,
  MixedTestDecreasing,
  StochasticLow,
  StochasticHigh,
};

std::string scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);
bool is_stochastic(Scenario s);
bool is_mixed(Scenario s);

struct ExperimentConfig {
  Scenario scenario = Scenario::Constant;
  ddql::TrainConfig train;  // carries feature mode and seed
  market::MarketParams market;

  double const_kappa = 0.001;
  double const_alpha = 0.002;
  market::LinearImpactSpec increasing{0.0001, 0.0002, 0.0001, 0.0004};
  market::LinearImpactSpec decreasing{0.002, -0.0002, 0.004, -0.0004};
  market::CIRImpactSpec cir;
  int cir_substeps = 10;

  std::string out_dir = ".";

  void validate() const;
};

/// Canonical parameterisation of each experiment family, feature mode and
/// seed filled in. Mixed scenarios double the training length (half per
/// regime); stochastic scenarios pin both mean-reversion speeds.
ExperimentConfig default_config(Scenario scenario, ddql::FeatureMode mode, std::uint64_t seed);

/// Flat key=value config file with a schema id; unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);
void save_config(const std::string& path, const ExperimentConfig& config);

/// "full" leaves the episode counts as configured; "smoke" shrinks them to
/// the CI-scale profile (2,000 train / 500 test, doubled for mixed).
void apply_profile(ExperimentConfig& config, const std::string& profile);

/// Relative cash difference in basis points: 1e4 * (agent - bench) / bench.
double delta_pnl(double cash_agent, double cash_bench);

/// Impact paths for training episodes (pure in the episode index).
ddql::TrajectoryGen train_trajectories(const ExperimentConfig& config);
/// Impact paths for evaluation; independent of the training draws.
ddql::TrajectoryGen test_trajectories(const ExperimentConfig& config);

/// Equal-paced seller.
ddql::EpisodeActionFn twap_strategy(const ExperimentConfig& config);
/// The family's closed-form opponent: TWAP (constant), the rounded QP
/// schedule on the true deterministic trajectory (increasing/decreasing/
/// mixed), or the impact-observing closed-form policy (stochastic).
ddql::EpisodeActionFn theoretical_strategy(const ExperimentConfig& config);
std::string theoretical_name(Scenario s);

/// Simulates a strategy over fresh test paths; same config + seed pairs the
/// episodes with every other strategy run through this entry point.
ddql::EvalResult run_benchmark(const ddql::EpisodeActionFn& strategy, const ExperimentConfig& config,
                               int episodes, std::uint64_t seed);

struct SeriesStats {
  double mean = 0.0;
  double stddev = 0.0;
  double median = 0.0;
};

SeriesStats series_stats(const std::vector<double>& xs);

struct BenchmarkReport {
  std::string name;
  std::vector<double> shortfall;
  std::vector<double> cash;
  SeriesStats is_stats;
  /// Episode-wise ΔP&L of the agent against this benchmark, basis points.
  std::vector<double> dpnl_bp;
  SeriesStats dpnl_stats;
};

struct ExperimentReport {
  std::string scenario;
  std::string features;
  int episodes = 0;
  std::vector<double> agent_is;
  std::vector<double> agent_cash;
  SeriesStats agent_stats;
  std::vector<BenchmarkReport> benchmarks;
};

/// Full protocol: train, checkpoint, evaluate B greedy episodes, run the
/// paired benchmarks, emit all CSV artifacts into config.out_dir.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Evaluation + benchmarks + artifacts for an already-trained policy.
ExperimentReport evaluate_policy(const ExperimentConfig& config, const ddql::Policy& policy,
                                 bool write_artifacts);

/// Plot-ready CSVs: average holdings per step (agent vs benchmarks) and the
/// greedy-action lattice (collapsed and, for price-aware policies, per
/// price level).
void export_figures(const ExperimentConfig& config, const ddql::Policy& policy,
                    const std::string& out_dir);

/// Just the greedy-action lattice CSVs for a stand-alone policy checkpoint.
void write_action_grids(const ddql::Policy& policy, const std::string& out_dir);

void write_report_csvs(const ExperimentConfig& config, const ExperimentReport& report,
                       const std::string& out_dir);

}  // namespace execlab::harness
