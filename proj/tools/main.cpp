#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "execlab/ddql.hpp"
#include "execlab/harness.hpp"

namespace {

using execlab::harness::ExperimentConfig;

struct CommonOpts {
  std::string config_path;
  std::string scenario;
  std::string features = "qt";
  std::string out_dir;
  std::string profile = "full";
  std::uint64_t seed = 1;
  bool seed_given = false;
  bool out_given = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool need_scenario) {
  auto* config = cmd->add_option("--config", opts.config_path, "experiment config file");
  auto* scenario = cmd->add_option("--scenario", opts.scenario,
                                   "scenario name (constant, increasing, decreasing, "
                                   "mixed_test_increasing, mixed_test_decreasing, stochastic_low, "
                                   "stochastic_high)");
  cmd->add_option("--features", opts.features, "feature mode: qt | qts (with --scenario)");
  cmd->add_option("--seed", opts.seed, "RNG seed override")->each([&opts](const std::string&) {
    opts.seed_given = true;
  });
  cmd->add_option("--out", opts.out_dir, "output directory")->each([&opts](const std::string&) {
    opts.out_given = true;
  });
  cmd->add_option("--profile", opts.profile, "episode-count profile: full | smoke")
      ->check(CLI::IsMember({"full", "smoke"}));
  if (need_scenario) {
    // exactly one of the two ways to name the experiment
    config->excludes(scenario);
    scenario->excludes(config);
  }
}

ExperimentConfig build_config(const CommonOpts& opts) {
  ExperimentConfig cfg;
  if (!opts.config_path.empty()) {
    cfg = execlab::harness::load_config(opts.config_path);
  } else if (!opts.scenario.empty()) {
    cfg = execlab::harness::default_config(execlab::harness::parse_scenario(opts.scenario),
                                           execlab::ddql::parse_feature_mode(opts.features), opts.seed);
    cfg.out_dir = "runs/" + opts.scenario + "_" + opts.features;
  } else {
    throw CLI::ValidationError("pass --config or --scenario");
  }
  if (opts.seed_given) cfg.train.seed = opts.seed;
  if (opts.out_given) cfg.out_dir = opts.out_dir;
  execlab::harness::apply_profile(cfg, opts.profile);
  cfg.validate();
  return cfg;
}

int cmd_train(const CommonOpts& opts) {
  ExperimentConfig cfg = build_config(opts);
  std::filesystem::create_directories(cfg.out_dir);
  const auto result =
      execlab::ddql::train(cfg.train, cfg.market, execlab::harness::train_trajectories(cfg));
  const auto policy_path = (std::filesystem::path(cfg.out_dir) / "policy.bin").string();
  execlab::ddql::save_policy(policy_path, result.policy);
  execlab::ddql::write_training_log(
      (std::filesystem::path(cfg.out_dir) / "training_log.csv").string(), result.log);
  execlab::harness::save_config((std::filesystem::path(cfg.out_dir) / "config.txt").string(), cfg);
  std::cout << "trained " << cfg.train.train_episodes << " episodes -> " << policy_path << "\n";
  return 0;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& checkpoint) {
  ExperimentConfig cfg = build_config(opts);
  const execlab::ddql::Policy policy = execlab::ddql::load_policy(checkpoint);
  const auto report = execlab::harness::evaluate_policy(cfg, policy, true);
  execlab::harness::export_figures(cfg, policy, cfg.out_dir);
  std::cout << "scenario " << report.scenario << " (" << report.features << "): mean IS "
            << report.agent_stats.mean << " over " << report.episodes << " episodes\n";
  for (const auto& b : report.benchmarks)
    std::cout << "  vs " << b.name << ": mean IS " << b.is_stats.mean << ", mean dP&L "
              << b.dpnl_stats.mean << " bp\n";
  return 0;
}

int cmd_benchmark(const CommonOpts& opts, const std::string& strategy) {
  ExperimentConfig cfg = build_config(opts);
  execlab::ddql::EpisodeActionFn fn;
  std::string name = strategy;
  if (strategy == "twap") {
    fn = execlab::harness::twap_strategy(cfg);
  } else if (strategy == "theoretical") {
    fn = execlab::harness::theoretical_strategy(cfg);
    name = execlab::harness::theoretical_name(cfg.scenario);
  } else {
    throw CLI::ValidationError("unknown strategy: " + strategy + " (expected twap|theoretical)");
  }
  const auto result =
      execlab::harness::run_benchmark(fn, cfg, cfg.train.test_episodes, cfg.train.seed);
  std::filesystem::create_directories(cfg.out_dir);
  const auto path = std::filesystem::path(cfg.out_dir) / ("benchmark_" + name + ".csv");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << "# execlab-csv benchmark-v1\n";
  os << "episode,shortfall,cash\n";
  char buf[96];
  for (std::size_t i = 0; i < result.shortfall.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g\n", i, result.shortfall[i], result.cash[i]);
    os << buf;
  }
  const auto stats = execlab::harness::series_stats(result.shortfall);
  std::cout << name << " on " << execlab::harness::scenario_name(cfg.scenario) << ": mean IS "
            << stats.mean << " (std " << stats.stddev << ") -> " << path.string() << "\n";
  return 0;
}

int cmd_export_policy(const std::string& checkpoint, const std::string& out_dir) {
  const execlab::ddql::Policy policy = execlab::ddql::load_policy(checkpoint);
  execlab::harness::write_action_grids(policy, out_dir);
  std::cout << "wrote action grids for " << execlab::ddql::feature_mode_name(policy.spec.mode)
            << " policy to " << out_dir << "\n";
  return 0;
}

struct TableSpec {
  std::string id;
  execlab::harness::Scenario scenario;
};

const std::vector<TableSpec>& table_specs() {
  using execlab::harness::Scenario;
  static const std::vector<TableSpec> specs = {
      {"constant", Scenario::Constant},
      {"increasing", Scenario::Increasing},
      {"decreasing", Scenario::Decreasing},
      {"mixed-increasing", Scenario::MixedTestIncreasing},
      {"mixed-decreasing", Scenario::MixedTestDecreasing},
      {"stochastic-low", Scenario::StochasticLow},
      {"stochastic-high", Scenario::StochasticHigh},
  };
  return specs;
}

int cmd_reproduce(const CommonOpts& opts, const std::string& table) {
  const TableSpec* spec = nullptr;
  for (const auto& s : table_specs())
    if (s.id == table) spec = &s;
  if (spec == nullptr) {
    std::string known;
    for (const auto& s : table_specs()) known += (known.empty() ? "" : ", ") + s.id;
    throw CLI::ValidationError("unknown table: " + table + " (known: " + known + ")");
  }

  const std::string base =
      opts.out_given ? opts.out_dir : std::string("runs/") + spec->id;
  std::filesystem::create_directories(base);

  std::ofstream os(std::filesystem::path(base) / "table.csv", std::ios::binary | std::ios::trunc);
  os << "# execlab-csv cost-table-v1\n";
  os << "scenario,features,strategy,mean_is,std_is,median_is,mean_dpnl_bp,std_dpnl_bp\n";
  char buf[256];
  for (const auto mode : {execlab::ddql::FeatureMode::QT, execlab::ddql::FeatureMode::QTS}) {
    ExperimentConfig cfg = execlab::harness::default_config(
        spec->scenario, mode, opts.seed_given ? opts.seed : 1);
    cfg.out_dir = (std::filesystem::path(base) /
                   (execlab::harness::scenario_name(spec->scenario) + "_" +
                    execlab::ddql::feature_mode_name(mode)))
                      .string();
    execlab::harness::apply_profile(cfg, opts.profile);
    std::cout << "running " << cfg.out_dir << " (" << cfg.train.train_episodes << " train episodes)"
              << std::endl;
    const auto report = execlab::harness::run_experiment(cfg);

    std::snprintf(buf, sizeof(buf), "%s,%s,ddql,%.6g,%.6g,%.6g,,\n", report.scenario.c_str(),
                  report.features.c_str(), report.agent_stats.mean, report.agent_stats.stddev,
                  report.agent_stats.median);
    os << buf;
    for (const auto& b : report.benchmarks) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.6g,%.6g,%.6g,%.6g,%.6g\n", report.scenario.c_str(),
                    report.features.c_str(), b.name.c_str(), b.is_stats.mean, b.is_stats.stddev,
                    b.is_stats.median, b.dpnl_stats.mean, b.dpnl_stats.stddev);
      os << buf;
    }
  }
  std::cout << "wrote " << (std::filesystem::path(base) / "table.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal-execution laboratory: train and benchmark a DDQL liquidation agent"};
  app.require_subcommand(1);

  CommonOpts train_opts, eval_opts, bench_opts, repro_opts;
  std::string eval_checkpoint, export_checkpoint, export_out = "policy_export";
  std::string bench_strategy = "theoretical", repro_table;

  auto* train = app.add_subcommand("train", "train an agent, write checkpoint + training log");
  add_common(train, train_opts, true);

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint against the benchmarks");
  add_common(evaluate, eval_opts, true);
  evaluate->add_option("--checkpoint", eval_checkpoint, "policy checkpoint")->required();

  auto* bench = app.add_subcommand("benchmark", "simulate a closed-form strategy, write IS CSV");
  add_common(bench, bench_opts, true);
  bench->add_option("--strategy", bench_strategy, "twap | theoretical");

  auto* exp = app.add_subcommand("export-policy", "write greedy-action grids for a checkpoint");
  exp->add_option("--checkpoint", export_checkpoint, "policy checkpoint")->required();
  exp->add_option("--out", export_out, "output directory");

  auto* repro = app.add_subcommand("reproduce", "run the full recipe for a named results table");
  repro->add_option("table", repro_table,
                    "constant|increasing|decreasing|mixed-increasing|mixed-decreasing|"
                    "stochastic-low|stochastic-high")
      ->required();
  add_common(repro, repro_opts, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(train_opts);
    if (evaluate->parsed()) return cmd_evaluate(eval_opts, eval_checkpoint);
    if (bench->parsed()) return cmd_benchmark(bench_opts, bench_strategy);
    if (exp->parsed()) return cmd_export_policy(export_checkpoint, export_out);
    if (repro->parsed()) return cmd_reproduce(repro_opts, repro_table);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
