#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "execlab/rng.hpp"

namespace execlab::market {

/// Fixed economic parameters of a liquidation task: sell q0 shares over n
/// trading steps of length tau, starting from mid-price s0, with arithmetic
/// price noise of scale sigma per unit time.
struct MarketParams {
  double s0 = 10.0;
  double sigma = 1e-5;
  int q0 = 20;
  int n = 10;
  double tau = 1.0;

  void validate() const;
};

/// Linear deterministic impact coefficients: kappa_t = kappa0 + beta_kappa*t,
/// alpha_t = alpha0 + beta_alpha*t, for zero-based step t.
struct LinearImpactSpec {
  double kappa0 = 0.0;
  double beta_kappa = 0.0;
  double alpha0 = 0.0;
  double beta_alpha = 0.0;
};

/// Mean-reverting square-root (CIR) dynamics for both impact coefficients,
/// driven by normals with correlation omega. Both processes start at their
/// long-run means.
struct CIRImpactSpec {
  double lambda_kappa = 1.0;
  double lambda_alpha = 1.0;
  double theta_kappa = 0.001;
  double theta_alpha = 0.002;
  double sigma_kappa = 0.002;
  double sigma_alpha = 0.002;
  double omega = 0.9;

  /// Throws unless both processes satisfy the Feller condition
  /// 2*lambda*theta >= sigma^2 and all scale parameters are admissible.
  void validate() const;
};

/// Per-step impact coefficients for one episode. kappa drives permanent
/// impact (moves the mid), alpha drives temporary impact (slippage only).
struct ImpactTrajectory {
  std::vector<double> kappa;
  std::vector<double> alpha;

  int steps() const { return static_cast<int>(kappa.size()); }
};

/// Agent-visible state before trading at step t: remaining inventory q,
/// latest mid-price s, proceeds banked so far.
struct EpisodeState {
  int t = 0;
  int q = 0;
  double s = 0.0;
  double cash = 0.0;
};

/// One executed trade: volume shares sold at exec_price while the mid stood
/// at mid_before.
struct Fill {
  int step = 0;
  int volume = 0;
  double exec_price = 0.0;
  double mid_before = 0.0;
};

struct StepResult {
  EpisodeState next;
  Fill fill;
  double reward = 0.0;  // proceeds of the trade: exec_price * volume
};

ImpactTrajectory constant_trajectory(double kappa, double alpha, int n);
ImpactTrajectory linear_trajectory(const LinearImpactSpec& spec, int n);

/// Draws one correlated standard-normal pair (xi, omega*xi + sqrt(1-omega^2)*zeta).
std::pair<double, double> correlated_normals(double omega, rng::Rng& rng);

/// Simulates both CIR impact paths over n trading steps with full-truncation
/// Euler substeps. Sampled at the start of each trading step; positivity is
/// enforced by flooring each sampled coefficient at 1e-8.
ImpactTrajectory cir_trajectory(const CIRImpactSpec& spec, int n, int substeps, rng::Rng& rng);

/// Executes `volume` shares at step state.t. The trade fills at
/// s - alpha_t*volume; the mid then drops by kappa_t*volume and diffuses by
/// sigma*sqrt(tau)*xi with one normal draw. Throws if volume is outside
/// [0, state.q] or the episode is already over.
StepResult step_market(const EpisodeState& state, int volume, const ImpactTrajectory& traj,
                       const MarketParams& params, rng::Rng& rng);

/// Cost of a completed liquidation relative to marking the full position at
/// the initial mid: s0*q0 - sum of proceeds. Throws unless fills liquidate
/// exactly q0 shares.
double implementation_shortfall(double s0, int q0, std::span<const Fill> fills);

/// Expected shortfall of a deterministic volume schedule under known
/// impacts: sum_t alpha_t v_t^2 + sum_t v_t * sum_{s<t} kappa_s v_s.
/// Noise is mean-zero so it does not enter.
double expected_cost(std::span<const double> volumes, const ImpactTrajectory& traj);

using ActionFn = std::function<int(const EpisodeState&)>;

struct EpisodeResult {
  std::vector<Fill> fills;
  double shortfall = 0.0;
  double cash = 0.0;
};

/// Runs one full episode under `action`, forcing full liquidation at the
/// final step regardless of what the policy asks for there.
EpisodeResult simulate_episode(const ActionFn& action, const ImpactTrajectory& traj,
                               const MarketParams& params, rng::Rng& rng);

}  // namespace execlab::market
