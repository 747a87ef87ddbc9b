#include "execlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace execlab::harness {

namespace {

// Substream tags disjoint from the agent's internal ones (see ddql.cpp).
constexpr std::uint64_t kTrainTrajBase = 0x400000000ULL;
constexpr std::uint64_t kTestTrajBase = 0x500000000ULL;
constexpr std::uint64_t kFigureBase = 0x600000000ULL;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::filesystem::path out_path(const std::string& dir, const std::string& name) {
  return std::filesystem::path(dir) / name;
}

std::ofstream open_csv(const std::string& dir, const std::string& name, const std::string& schema) {
  std::ofstream os(out_path(dir, name), std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + (out_path(dir, name)).string());
  os << "# execlab-csv " << schema << "\n";
  return os;
}

std::vector<double> holdings_from_schedule(const std::vector<int>& schedule, int q0) {
  std::vector<double> hold(schedule.size() + 1);
  hold[0] = q0;
  for (std::size_t t = 0; t < schedule.size(); ++t) hold[t + 1] = hold[t] - schedule[t];
  return hold;
}

}  // namespace

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Constant: return "constant";
    case Scenario::Increasing: return "increasing";
    case Scenario::Decreasing: return "decreasing";
    case Scenario::MixedTestIncreasing: return "mixed_test_increasing";
    case Scenario::MixedTestDecreasing: return "mixed_test_decreasing";
    case Scenario::StochasticLow: return "stochastic_low";
    case Scenario::StochasticHigh: return "stochastic_high";
  }
  throw std::logic_error("scenario_name: unknown scenario");
}

Scenario parse_scenario(const std::string& name) {
  for (Scenario s : {Scenario::Constant, Scenario::Increasing, Scenario::Decreasing,
                     Scenario::MixedTestIncreasing, Scenario::MixedTestDecreasing,
                     Scenario::StochasticLow, Scenario::StochasticHigh})
    if (name == scenario_name(s)) return s;
  throw std::invalid_argument("unknown scenario: " + name);
}

bool is_stochastic(Scenario s) {
  return s == Scenario::StochasticLow || s == Scenario::StochasticHigh;
}

bool is_mixed(Scenario s) {
  return s == Scenario::MixedTestIncreasing || s == Scenario::MixedTestDecreasing;
}

void ExperimentConfig::validate() const {
  market.validate();
  train.validate();
  switch (scenario) {
    case Scenario::Constant:
      if (const_kappa <= 0.0 || const_alpha <= 0.0)
        throw std::invalid_argument("config: constant impacts must be positive");
      break;
    case Scenario::Increasing:
      market::linear_trajectory(increasing, market.n);
      break;
    case Scenario::Decreasing:
      market::linear_trajectory(decreasing, market.n);
      break;
    case Scenario::MixedTestIncreasing:
    case Scenario::MixedTestDecreasing:
      market::linear_trajectory(increasing, market.n);
      market::linear_trajectory(decreasing, market.n);
      break;
    case Scenario::StochasticLow:
    case Scenario::StochasticHigh:
      cir.validate();
      if (cir_substeps < 1) throw std::invalid_argument("config: cir_substeps must be positive");
      break;
  }
}

ExperimentConfig default_config(Scenario scenario, ddql::FeatureMode mode, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.scenario = scenario;
  cfg.train.mode = mode;
  cfg.train.seed = seed;
  if (is_mixed(scenario)) cfg.train.train_episodes = 20'000;  // half per regime
  if (scenario == Scenario::StochasticLow) {
    cfg.cir.lambda_kappa = 1.0;
    cfg.cir.lambda_alpha = 1.0;
  } else if (scenario == Scenario::StochasticHigh) {
    cfg.cir.lambda_kappa = 5.0;
    cfg.cir.lambda_alpha = 5.0;
  }
  return cfg;
}

void apply_profile(ExperimentConfig& config, const std::string& profile) {
  if (profile == "full") return;
  if (profile == "smoke") {
    config.train.train_episodes = is_mixed(config.scenario) ? 4'000 : 2'000;
    config.train.test_episodes = 500;
    return;
  }
  throw std::invalid_argument("unknown profile: " + profile + " (expected full|smoke)");
}

double delta_pnl(double cash_agent, double cash_bench) {
  if (!(cash_bench > 0.0)) throw std::invalid_argument("delta_pnl: benchmark cash must be positive");
  return 1e4 * (cash_agent - cash_bench) / cash_bench;
}

ddql::TrajectoryGen train_trajectories(const ExperimentConfig& config) {
  const int n = config.market.n;
  switch (config.scenario) {
    case Scenario::Constant: {
      market::ImpactTrajectory traj = market::constant_trajectory(config.const_kappa, config.const_alpha, n);
      return [traj](int) { return traj; };
    }
    case Scenario::Increasing: {
      market::ImpactTrajectory traj = market::linear_trajectory(config.increasing, n);
      return [traj](int) { return traj; };
    }
    case Scenario::Decreasing: {
      market::ImpactTrajectory traj = market::linear_trajectory(config.decreasing, n);
      return [traj](int) { return traj; };
    }
    case Scenario::MixedTestIncreasing:
    case Scenario::MixedTestDecreasing: {
      // Interleave the two regimes episode-by-episode.
      market::ImpactTrajectory inc = market::linear_trajectory(config.increasing, n);
      market::ImpactTrajectory dec = market::linear_trajectory(config.decreasing, n);
      return [inc, dec](int ep) { return ep % 2 == 0 ? inc : dec; };
    }
    case Scenario::StochasticLow:
    case Scenario::StochasticHigh: {
      const market::CIRImpactSpec spec = config.cir;
      const int substeps = config.cir_substeps;
      const std::uint64_t seed = config.train.seed;
      return [spec, substeps, seed, n](int ep) {
        rng::Rng rng = rng::Rng::stream(seed, kTrainTrajBase + static_cast<std::uint64_t>(ep));
        return market::cir_trajectory(spec, n, substeps, rng);
      };
    }
  }
  throw std::logic_error("train_trajectories: unknown scenario");
}

ddql::TrajectoryGen test_trajectories(const ExperimentConfig& config) {
  const int n = config.market.n;
  switch (config.scenario) {
    case Scenario::Constant: {
      market::ImpactTrajectory traj = market::constant_trajectory(config.const_kappa, config.const_alpha, n);
      return [traj](int) { return traj; };
    }
    case Scenario::Increasing:
    case Scenario::MixedTestIncreasing: {
      market::ImpactTrajectory traj = market::linear_trajectory(config.increasing, n);
      return [traj](int) { return traj; };
    }
    case Scenario::Decreasing:
    case Scenario::MixedTestDecreasing: {
      market::ImpactTrajectory traj = market::linear_trajectory(config.decreasing, n);
      return [traj](int) { return traj; };
    }
    case Scenario::StochasticLow:
    case Scenario::StochasticHigh: {
      const market::CIRImpactSpec spec = config.cir;
      const int substeps = config.cir_substeps;
      const std::uint64_t seed = config.train.seed;
      return [spec, substeps, seed, n](int ep) {
        rng::Rng rng = rng::Rng::stream(seed, kTestTrajBase + static_cast<std::uint64_t>(ep));
        return market::cir_trajectory(spec, n, substeps, rng);
      };
    }
  }
  throw std::logic_error("test_trajectories: unknown scenario");
}

namespace {

ddql::EpisodeActionFn schedule_strategy(std::vector<int> schedule) {
  return [schedule = std::move(schedule)](const market::EpisodeState& state,
                                          const market::ImpactTrajectory&) {
    return schedule[static_cast<std::size_t>(state.t)];
  };
}

}  // namespace

ddql::EpisodeActionFn twap_strategy(const ExperimentConfig& config) {
  return schedule_strategy(strategies::twap(config.market.q0, config.market.n));
}

std::string theoretical_name(Scenario s) {
  if (s == Scenario::Constant) return "twap";
  if (is_stochastic(s)) return "barger_lorig";
  return "qp";
}

ddql::EpisodeActionFn theoretical_strategy(const ExperimentConfig& config) {
  const int n = config.market.n;
  const int q0 = config.market.q0;
  switch (config.scenario) {
    case Scenario::Constant:
      return twap_strategy(config);
    case Scenario::Increasing:
    case Scenario::MixedTestIncreasing:
    case Scenario::Decreasing:
    case Scenario::MixedTestDecreasing: {
      const auto spec = config.scenario == Scenario::Increasing || config.scenario == Scenario::MixedTestIncreasing
                            ? config.increasing
                            : config.decreasing;
      const market::ImpactTrajectory traj = market::linear_trajectory(spec, n);
      const std::vector<double> real = strategies::optimal_deterministic_schedule(traj, q0);
      return schedule_strategy(strategies::round_schedule(real, q0));
    }
    case Scenario::StochasticLow:
    case Scenario::StochasticHigh: {
      const market::CIRImpactSpec spec = config.cir;
      return [spec, n](const market::EpisodeState& state, const market::ImpactTrajectory& traj) {
        const auto t = static_cast<std::size_t>(state.t);
        return strategies::barger_lorig_action(state.q, state.t, n, traj.alpha[t], traj.kappa[t], spec);
      };
    }
  }
  throw std::logic_error("theoretical_strategy: unknown scenario");
}

ddql::EvalResult run_benchmark(const ddql::EpisodeActionFn& strategy, const ExperimentConfig& config,
                               int episodes, std::uint64_t seed) {
  config.validate();
  return ddql::evaluate(strategy, episodes, test_trajectories(config), config.market, seed);
}

SeriesStats series_stats(const std::vector<double>& xs) {
  SeriesStats st;
  if (xs.empty()) {
    st.mean = st.stddev = st.median = std::numeric_limits<double>::quiet_NaN();
    return st;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  st.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - st.mean) * (x - st.mean);
    st.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  st.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return st;
}

ExperimentReport evaluate_policy(const ExperimentConfig& config, const ddql::Policy& policy,
                                 bool write_artifacts) {
  config.validate();
  const int b = config.train.test_episodes;
  const std::uint64_t seed = config.train.seed;
  const ddql::TrajectoryGen gen = test_trajectories(config);

  const ddql::EpisodeActionFn agent_fn = [&policy](const market::EpisodeState& state,
                                                   const market::ImpactTrajectory&) {
    return policy.action(state);
  };
  const ddql::EvalResult agent = ddql::evaluate(agent_fn, b, gen, config.market, seed);

  ExperimentReport report;
  report.scenario = scenario_name(config.scenario);
  report.features = ddql::feature_mode_name(config.train.mode);
  report.episodes = b;
  report.agent_is = agent.shortfall;
  report.agent_cash = agent.cash;
  report.agent_stats = series_stats(agent.shortfall);

  std::vector<std::pair<std::string, ddql::EpisodeActionFn>> benches;
  benches.emplace_back(theoretical_name(config.scenario), theoretical_strategy(config));
  if (theoretical_name(config.scenario) != "twap") benches.emplace_back("twap", twap_strategy(config));

  for (auto& [name, fn] : benches) {
    const ddql::EvalResult r = ddql::evaluate(fn, b, gen, config.market, seed);
    BenchmarkReport br;
    br.name = name;
    br.shortfall = r.shortfall;
    br.cash = r.cash;
    br.is_stats = series_stats(r.shortfall);
    br.dpnl_bp.reserve(r.cash.size());
    for (std::size_t i = 0; i < r.cash.size(); ++i)
      br.dpnl_bp.push_back(delta_pnl(agent.cash[i], r.cash[i]));
    br.dpnl_stats = series_stats(br.dpnl_bp);
    report.benchmarks.push_back(std::move(br));
  }

  if (write_artifacts) write_report_csvs(config, report, config.out_dir);
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::filesystem::create_directories(config.out_dir);

  const ddql::TrainResult trained = ddql::train(config.train, config.market, train_trajectories(config));
  ddql::save_policy(out_path(config.out_dir, "policy.bin").string(), trained.policy);
  ddql::write_training_log(out_path(config.out_dir, "training_log.csv").string(), trained.log);
  save_config(out_path(config.out_dir, "config.txt").string(), config);

  ExperimentReport report = evaluate_policy(config, trained.policy, true);
  export_figures(config, trained.policy, config.out_dir);
  return report;
}

void write_report_csvs(const ExperimentConfig& config, const ExperimentReport& report,
                       const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);

  {
    auto os = open_csv(out_dir, "episodes.csv", "episodes-v1");
    os << "episode,agent_is,agent_cash";
    for (const auto& b : report.benchmarks)
      os << "," << b.name << "_is," << b.name << "_cash,dpnl_" << b.name << "_bp";
    os << "\n";
    for (std::size_t i = 0; i < report.agent_is.size(); ++i) {
      os << i << "," << fmt(report.agent_is[i]) << "," << fmt(report.agent_cash[i]);
      for (const auto& b : report.benchmarks)
        os << "," << fmt(b.shortfall[i]) << "," << fmt(b.cash[i]) << "," << fmt(b.dpnl_bp[i]);
      os << "\n";
    }
  }

  {
    auto os = open_csv(out_dir, "summary.csv", "summary-v1");
    os << "scenario,features,strategy,episodes,mean_is,std_is,median_is,"
          "mean_dpnl_bp,std_dpnl_bp,median_dpnl_bp\n";
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    os << report.scenario << "," << report.features << ",ddql," << report.episodes << ","
       << fmt(report.agent_stats.mean) << "," << fmt(report.agent_stats.stddev) << ","
       << fmt(report.agent_stats.median) << "," << fmt(nan) << "," << fmt(nan) << "," << fmt(nan) << "\n";
    for (const auto& b : report.benchmarks) {
      os << report.scenario << "," << report.features << "," << b.name << "," << report.episodes << ","
         << fmt(b.is_stats.mean) << "," << fmt(b.is_stats.stddev) << "," << fmt(b.is_stats.median) << ","
         << fmt(b.dpnl_stats.mean) << "," << fmt(b.dpnl_stats.stddev) << "," << fmt(b.dpnl_stats.median)
         << "\n";
    }
  }
  (void)config;
}

void export_figures(const ExperimentConfig& config, const ddql::Policy& policy,
                    const std::string& out_dir) {
  config.validate();
  std::filesystem::create_directories(out_dir);
  const int n = config.market.n;
  const int q0 = config.market.q0;
  const std::uint64_t seed = config.train.seed;
  const ddql::TrajectoryGen gen = test_trajectories(config);

  // Average holdings path (inventory before trading at each step) over a
  // figure-sized batch of fresh paired episodes.
  const int fig_eps = std::min(config.train.test_episodes, 500);
  const auto accumulate_holdings = [&](const ddql::EpisodeActionFn& fn) {
    std::vector<double> hold(static_cast<std::size_t>(n) + 1, 0.0);
    if (fig_eps == 0) {
      std::fill(hold.begin(), hold.end(), std::numeric_limits<double>::quiet_NaN());
      return hold;
    }
    for (int ep = 0; ep < fig_eps; ++ep) {
      const market::ImpactTrajectory traj = gen(ep);
      rng::Rng price_rng = rng::Rng::stream(seed, kFigureBase + static_cast<std::uint64_t>(ep));
      const market::EpisodeResult r = market::simulate_episode(
          [&](const market::EpisodeState& s) { return fn(s, traj); }, traj, config.market, price_rng);
      double q = q0;
      for (int t = 0; t < n; ++t) {
        hold[static_cast<std::size_t>(t)] += q;
        q -= r.fills[static_cast<std::size_t>(t)].volume;
      }
      hold[static_cast<std::size_t>(n)] += q;
    }
    for (double& h : hold) h /= fig_eps;
    return hold;
  };

  const ddql::EpisodeActionFn agent_fn = [&policy](const market::EpisodeState& state,
                                                   const market::ImpactTrajectory&) {
    return policy.action(state);
  };
  const std::vector<double> agent_hold = accumulate_holdings(agent_fn);
  const std::vector<double> theo_hold = accumulate_holdings(theoretical_strategy(config));
  const std::vector<double> twap_hold = holdings_from_schedule(strategies::twap(q0, n), q0);
  const bool twap_is_theo = theoretical_name(config.scenario) == "twap";

  {
    auto os = open_csv(out_dir, "holdings.csv", "holdings-v1");
    os << "t,agent," << theoretical_name(config.scenario);
    if (!twap_is_theo) os << ",twap";
    os << "\n";
    for (int t = 0; t <= n; ++t) {
      os << t << "," << fmt(agent_hold[static_cast<std::size_t>(t)]) << ","
         << fmt(theo_hold[static_cast<std::size_t>(t)]);
      if (!twap_is_theo) os << "," << fmt(twap_hold[static_cast<std::size_t>(t)]);
      os << "\n";
    }
  }

  write_action_grids(policy, out_dir);
}

void write_action_grids(const ddql::Policy& policy, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  // Price-aware policies also emit the per-level table; the flat table is
  // the mean action across levels.
  const std::vector<ddql::HeatmapRow> rows = ddql::policy_heatmap(policy, {});
  if (policy.spec.mode == ddql::FeatureMode::QTS) {
    auto os = open_csv(out_dir, "action_grid_levels.csv", "action-grid-levels-v1");
    os << "s_level,t,q,action\n";
    for (const auto& r : rows)
      os << fmt(r.s_level) << "," << r.t << "," << r.q << "," << r.action << "\n";
  }
  auto os = open_csv(out_dir, "action_grid.csv", "action-grid-v1");
  os << "t,q,mean_action\n";
  std::map<std::pair<int, int>, std::pair<double, int>> acc;
  for (const auto& r : rows) {
    auto& slot = acc[{r.t, r.q}];
    slot.first += r.action;
    slot.second += 1;
  }
  for (const auto& [key, slot] : acc)
    os << key.first << "," << key.second << "," << fmt(slot.first / slot.second) << "\n";
}

namespace {

const std::string kConfigSchema = "experiment-config-v1";

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value for " + key + ": '" + value + "'");
  }
}

int to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return static_cast<int>(x);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer value for " + key + ": '" + value + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return static_cast<std::uint64_t>(x);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad unsigned value for " + key + ": '" + value + "'");
  }
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_config: cannot open " + path);

  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("load_config: line " + std::to_string(lineno) + " is not key=value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("load_config: empty key on line " + std::to_string(lineno));
    if (!kv.emplace(key, value).second)
      throw std::runtime_error("load_config: duplicate key " + key);
  }

  const auto take = [&kv](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) return std::pair<bool, std::string>{false, ""};
    std::pair<bool, std::string> out{true, it->second};
    kv.erase(it);
    return out;
  };

  const auto [has_schema, schema] = take("schema");
  if (!has_schema || schema != kConfigSchema)
    throw std::runtime_error("load_config: expected schema = " + kConfigSchema);

  const auto [has_scenario, scenario_str] = take("scenario");
  if (!has_scenario) throw std::runtime_error("load_config: missing scenario");
  const Scenario scenario = parse_scenario(scenario_str);

  auto mode = ddql::FeatureMode::QT;
  if (const auto [has, v] = take("features"); has) mode = ddql::parse_feature_mode(v);
  std::uint64_t seed = 1;
  if (const auto [has, v] = take("seed"); has) seed = to_u64("seed", v);

  ExperimentConfig cfg = default_config(scenario, mode, seed);
  if (const auto [has, v] = take("out"); has) cfg.out_dir = v;

  const auto set_int = [&](const std::string& key, int& field) {
    if (const auto [has, v] = take(key); has) field = to_int(key, v);
  };
  const auto set_f64 = [&](const std::string& key, double& field) {
    if (const auto [has, v] = take(key); has) field = to_double(key, v);
  };

  set_int("train_episodes", cfg.train.train_episodes);
  set_int("test_episodes", cfg.train.test_episodes);
  set_int("batch_size", cfg.train.batch_size);
  set_int("sync_interval", cfg.train.sync_interval);
  set_f64("epsilon_decay", cfg.train.epsilon_decay);
  set_f64("discount", cfg.train.discount);
  set_f64("learning_rate", cfg.train.learning_rate);
  set_int("memory_capacity", cfg.train.memory_capacity);

  set_f64("s0", cfg.market.s0);
  set_f64("sigma", cfg.market.sigma);
  set_int("q0", cfg.market.q0);
  set_int("horizon", cfg.market.n);
  set_f64("tau", cfg.market.tau);

  set_f64("const_kappa", cfg.const_kappa);
  set_f64("const_alpha", cfg.const_alpha);
  set_f64("inc_kappa0", cfg.increasing.kappa0);
  set_f64("inc_beta_kappa", cfg.increasing.beta_kappa);
  set_f64("inc_alpha0", cfg.increasing.alpha0);
  set_f64("inc_beta_alpha", cfg.increasing.beta_alpha);
  set_f64("dec_kappa0", cfg.decreasing.kappa0);
  set_f64("dec_beta_kappa", cfg.decreasing.beta_kappa);
  set_f64("dec_alpha0", cfg.decreasing.alpha0);
  set_f64("dec_beta_alpha", cfg.decreasing.beta_alpha);
  set_f64("lambda_kappa", cfg.cir.lambda_kappa);
  set_f64("lambda_alpha", cfg.cir.lambda_alpha);
  set_f64("theta_kappa", cfg.cir.theta_kappa);
  set_f64("theta_alpha", cfg.cir.theta_alpha);
  set_f64("sigma_kappa", cfg.cir.sigma_kappa);
  set_f64("sigma_alpha", cfg.cir.sigma_alpha);
  set_f64("omega", cfg.cir.omega);
  set_int("cir_substeps", cfg.cir_substeps);

  if (!kv.empty()) throw std::runtime_error("load_config: unknown key " + kv.begin()->first);
  cfg.validate();
  return cfg;
}

void save_config(const std::string& path, const ExperimentConfig& config) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_config: cannot open " + path);
  os << "schema = " << kConfigSchema << "\n"
     << "scenario = " << scenario_name(config.scenario) << "\n"
     << "features = " << ddql::feature_mode_name(config.train.mode) << "\n"
     << "seed = " << config.train.seed << "\n"
     << "out = " << config.out_dir << "\n"
     << "\n# agent\n"
     << "train_episodes = " << config.train.train_episodes << "\n"
     << "test_episodes = " << config.train.test_episodes << "\n"
     << "batch_size = " << config.train.batch_size << "\n"
     << "sync_interval = " << config.train.sync_interval << "\n"
     << "epsilon_decay = " << fmt(config.train.epsilon_decay) << "\n"
     << "discount = " << fmt(config.train.discount) << "\n"
     << "learning_rate = " << fmt(config.train.learning_rate) << "\n"
     << "memory_capacity = " << config.train.memory_capacity << "\n"
     << "\n# market\n"
     << "s0 = " << fmt(config.market.s0) << "\n"
     << "sigma = " << fmt(config.market.sigma) << "\n"
     << "q0 = " << config.market.q0 << "\n"
     << "horizon = " << config.market.n << "\n"
     << "tau = " << fmt(config.market.tau) << "\n"
     << "\n# impacts\n"
     << "const_kappa = " << fmt(config.const_kappa) << "\n"
     << "const_alpha = " << fmt(config.const_alpha) << "\n"
     << "inc_kappa0 = " << fmt(config.increasing.kappa0) << "\n"
     << "inc_beta_kappa = " << fmt(config.increasing.beta_kappa) << "\n"
     << "inc_alpha0 = " << fmt(config.increasing.alpha0) << "\n"
     << "inc_beta_alpha = " << fmt(config.increasing.beta_alpha) << "\n"
     << "dec_kappa0 = " << fmt(config.decreasing.kappa0) << "\n"
     << "dec_beta_kappa = " << fmt(config.decreasing.beta_kappa) << "\n"
     << "dec_alpha0 = " << fmt(config.decreasing.alpha0) << "\n"
     << "dec_beta_alpha = " << fmt(config.decreasing.beta_alpha) << "\n"
     << "lambda_kappa = " << fmt(config.cir.lambda_kappa) << "\n"
     << "lambda_alpha = " << fmt(config.cir.lambda_alpha) << "\n"
     << "theta_kappa = " << fmt(config.cir.theta_kappa) << "\n"
     << "theta_alpha = " << fmt(config.cir.theta_alpha) << "\n"
     << "sigma_kappa = " << fmt(config.cir.sigma_kappa) << "\n"
     << "sigma_alpha = " << fmt(config.cir.sigma_alpha) << "\n"
     << "omega = " << fmt(config.cir.omega) << "\n"
     << "cir_substeps = " << config.cir_substeps << "\n";
}

}  // namespace execlab::harness
