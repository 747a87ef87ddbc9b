#include "execlab/market.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace execlab::market {

namespace {

constexpr double kImpactFloor = 1e-8;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void MarketParams::validate() const {
  require(s0 > 0.0, "market params: s0 must be positive");
  require(sigma >= 0.0, "market params: sigma must be non-negative");
  require(q0 > 0, "market params: q0 must be positive");
  require(n > 0, "market params: n must be positive");
  require(tau > 0.0, "market params: tau must be positive");
}

void CIRImpactSpec::validate() const {
  require(lambda_kappa > 0.0 && lambda_alpha > 0.0, "cir spec: mean-reversion speeds must be positive");
  require(theta_kappa > 0.0 && theta_alpha > 0.0, "cir spec: long-run means must be positive");
  require(sigma_kappa >= 0.0 && sigma_alpha >= 0.0, "cir spec: vol-of-vol must be non-negative");
  require(omega >= -1.0 && omega <= 1.0, "cir spec: correlation must lie in [-1,1]");
  if (2.0 * lambda_kappa * theta_kappa < sigma_kappa * sigma_kappa)
    throw std::invalid_argument("cir spec: kappa process violates the Feller condition");
  if (2.0 * lambda_alpha * theta_alpha < sigma_alpha * sigma_alpha)
    throw std::invalid_argument("cir spec: alpha process violates the Feller condition");
}

ImpactTrajectory constant_trajectory(double kappa, double alpha, int n) {
  require(n > 0, "constant_trajectory: n must be positive");
  require(kappa > 0.0 && alpha > 0.0, "constant_trajectory: impacts must be positive");
  ImpactTrajectory traj;
  traj.kappa.assign(static_cast<std::size_t>(n), kappa);
  traj.alpha.assign(static_cast<std::size_t>(n), alpha);
  return traj;
}

ImpactTrajectory linear_trajectory(const LinearImpactSpec& spec, int n) {
  require(n > 0, "linear_trajectory: n must be positive");
  ImpactTrajectory traj;
  traj.kappa.reserve(static_cast<std::size_t>(n));
  traj.alpha.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    const double k = spec.kappa0 + spec.beta_kappa * t;
    const double a = spec.alpha0 + spec.beta_alpha * t;
    require(k > 0.0, "linear_trajectory: kappa must stay positive over the horizon");
    require(a > 0.0, "linear_trajectory: alpha must stay positive over the horizon");
    traj.kappa.push_back(k);
    traj.alpha.push_back(a);
  }
  return traj;
}

std::pair<double, double> correlated_normals(double omega, rng::Rng& rng) {
  const double xi = rng.normal();
  const double zeta = rng.normal();
  return {xi, omega * xi + std::sqrt(1.0 - omega * omega) * zeta};
}

ImpactTrajectory cir_trajectory(const CIRImpactSpec& spec, int n, int substeps, rng::Rng& rng) {
  spec.validate();
  require(n > 0, "cir_trajectory: n must be positive");
  require(substeps > 0, "cir_trajectory: substeps must be positive");

  ImpactTrajectory traj;
  traj.kappa.reserve(static_cast<std::size_t>(n));
  traj.alpha.reserve(static_cast<std::size_t>(n));

  // Full-truncation Euler: drift and diffusion read max(x,0); the raw state
  // may dip below zero between substeps but sampled coefficients may not.
  const double dt = 1.0 / substeps;
  const double sqrt_dt = std::sqrt(dt);
  double k = spec.theta_kappa;
  double a = spec.theta_alpha;
  for (int t = 0; t < n; ++t) {
    traj.kappa.push_back(std::max(k, kImpactFloor));
    traj.alpha.push_back(std::max(a, kImpactFloor));
    for (int s = 0; s < substeps; ++s) {
      const auto [xi_k, xi_a] = correlated_normals(spec.omega, rng);
      const double k_pos = std::max(k, 0.0);
      const double a_pos = std::max(a, 0.0);
      k += spec.lambda_kappa * (spec.theta_kappa - k_pos) * dt + spec.sigma_kappa * std::sqrt(k_pos) * sqrt_dt * xi_k;
      a += spec.lambda_alpha * (spec.theta_alpha - a_pos) * dt + spec.sigma_alpha * std::sqrt(a_pos) * sqrt_dt * xi_a;
    }
  }
  return traj;
}

StepResult step_market(const EpisodeState& state, int volume, const ImpactTrajectory& traj,
                       const MarketParams& params, rng::Rng& rng) {
  if (state.t < 0 || state.t >= traj.steps())
    throw std::invalid_argument("step_market: step index outside the trajectory");
  if (volume < 0 || volume > state.q)
    throw std::invalid_argument("step_market: volume must lie in [0, remaining inventory]");

  const auto idx = static_cast<std::size_t>(state.t);
  const double exec_price = state.s - traj.alpha[idx] * volume;
  const double proceeds = exec_price * volume;
  const double xi = rng.normal();

  StepResult out;
  out.fill = Fill{state.t, volume, exec_price, state.s};
  out.reward = proceeds;
  out.next.t = state.t + 1;
  out.next.q = state.q - volume;
  out.next.s = state.s - traj.kappa[idx] * volume + params.sigma * std::sqrt(params.tau) * xi;
  out.next.cash = state.cash + proceeds;
  return out;
}

double implementation_shortfall(double s0, int q0, std::span<const Fill> fills) {
  long long sold = 0;
  double proceeds = 0.0;
  for (const Fill& f : fills) {
    sold += f.volume;
    proceeds += f.exec_price * f.volume;
  }
  if (sold != q0)
    throw std::invalid_argument("implementation_shortfall: fills must liquidate exactly q0 shares");
  return s0 * q0 - proceeds;
}

double expected_cost(std::span<const double> volumes, const ImpactTrajectory& traj) {
  if (static_cast<int>(volumes.size()) != traj.steps())
    throw std::invalid_argument("expected_cost: schedule length must match the trajectory");
  double cost = 0.0;
  double permanent = 0.0;  // cumulative mid-price depression from earlier trades
  for (std::size_t t = 0; t < volumes.size(); ++t) {
    const double v = volumes[t];
    if (v < -1e-12) throw std::invalid_argument("expected_cost: volumes must be non-negative");
    cost += traj.alpha[t] * v * v + v * permanent;
    permanent += traj.kappa[t] * v;
  }
  return cost;
}

EpisodeResult simulate_episode(const ActionFn& action, const ImpactTrajectory& traj,
                               const MarketParams& params, rng::Rng& rng) {
  params.validate();
  if (traj.steps() != params.n)
    throw std::invalid_argument("simulate_episode: trajectory length must equal the horizon");

  EpisodeState state;
  state.q = params.q0;
  state.s = params.s0;

  EpisodeResult out;
  out.fills.reserve(static_cast<std::size_t>(params.n));
  for (int t = 0; t < params.n; ++t) {
    const int v = t == params.n - 1 ? state.q : action(state);
    StepResult step = step_market(state, v, traj, params, rng);
    out.fills.push_back(step.fill);
    state = step.next;
  }
  out.cash = state.cash;
  out.shortfall = implementation_shortfall(params.s0, params.q0, out.fills);
  return out;
}

}  // namespace execlab::market
