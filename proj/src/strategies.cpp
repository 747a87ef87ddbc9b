#include "execlab/strategies.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace execlab::strategies {

namespace {

// Hessian of the expected-cost quadratic form: H = 2*diag(alpha) + L + L'
// with L_ts = kappa_s for s < t. Indefinite whenever the permanent impact
// decays fast enough (e.g. the decreasing family), so the programme is not
// convex in general.
Eigen::MatrixXd cost_hessian(const market::ImpactTrajectory& traj) {
  const int n = traj.steps();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int t = 0; t < n; ++t) {
    h(t, t) = 2.0 * traj.alpha[static_cast<std::size_t>(t)];
    for (int s = 0; s < t; ++s) {
      h(t, s) += traj.kappa[static_cast<std::size_t>(s)];
      h(s, t) += traj.kappa[static_cast<std::size_t>(s)];
    }
  }
  return h;
}

}  // namespace

std::vector<int> twap(int q0, int n) {
  if (n < 1) throw std::invalid_argument("twap: n must be at least 1");
  if (q0 < 0) throw std::invalid_argument("twap: q0 must be non-negative");
  std::vector<double> even(static_cast<std::size_t>(n), static_cast<double>(q0) / n);
  return round_schedule(even, q0);
}

std::vector<double> ac_sinh_holdings(int q0, int n, const ACRiskParams& risk) {
  if (q0 <= 0 || n < 1) throw std::invalid_argument("ac_sinh_holdings: q0 and n must be positive");
  if (risk.lambda_ra < 0.0) throw std::invalid_argument("ac_sinh_holdings: risk aversion must be non-negative");
  if (risk.sigma <= 0.0 || risk.alpha_tilde <= 0.0 || risk.tau <= 0.0)
    throw std::invalid_argument("ac_sinh_holdings: sigma, alpha_tilde and tau must be positive");

  std::vector<double> holdings(static_cast<std::size_t>(n) + 1);
  const double rhs = risk.lambda_ra * risk.sigma * risk.sigma / (2.0 * risk.alpha_tilde) * risk.tau * risk.tau;
  if (rhs <= 0.0) {
    // Risk-neutral limit: the urgency equation has no positive root and the
    // schedule degenerates to the straight line.
    for (int t = 0; t <= n; ++t) holdings[static_cast<std::size_t>(t)] = static_cast<double>(q0) * (n - t) / n;
    return holdings;
  }

  // 2*(cosh(w*tau) - 1) is zero at w = 0 and strictly increasing, so the
  // root brackets by doubling and bisects cleanly.
  const auto gap = [&](double w) { return 2.0 * (std::cosh(w * risk.tau) - 1.0) - rhs; };
  double lo = 0.0;
  double hi = 1.0;
  while (gap(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < 0.0 ? lo : hi) = mid;
  }
  const double w = 0.5 * (lo + hi);

  const double big_t = n * risk.tau;
  const double denom = std::sinh(w * big_t);
  for (int t = 0; t <= n; ++t)
    holdings[static_cast<std::size_t>(t)] = q0 * std::sinh(w * (big_t - t * risk.tau)) / denom;
  return holdings;
}

std::vector<double> optimal_deterministic_schedule(const market::ImpactTrajectory& traj, double q0) {
  const int n = traj.steps();
  if (n < 1) throw std::invalid_argument("optimal_deterministic_schedule: empty trajectory");
  if (n > 20)
    throw std::invalid_argument(
        "optimal_deterministic_schedule: horizons beyond 20 steps exceed the exact support search");
  if (q0 <= 0.0) throw std::invalid_argument("optimal_deterministic_schedule: q0 must be positive");
  for (int t = 0; t < n; ++t) {
    if (traj.alpha[static_cast<std::size_t>(t)] <= 0.0 || traj.kappa[static_cast<std::size_t>(t)] <= 0.0)
      throw std::invalid_argument("optimal_deterministic_schedule: impacts must be strictly positive");
  }

  const Eigen::MatrixXd h = cost_hessian(traj);

  // Because H can be indefinite, a single clamp-and-release descent can stall
  // in a non-global KKT point. The optimum is stationary on the face spanned
  // by its own support, though, so solving the equality-constrained KKT
  // system [H_FF, -1; 1', 0] on every support and keeping the cheapest
  // feasible stationary point finds it exactly. 2^n - 1 supports is trivial
  // at desk horizons (hence the n <= 20 guard above).
  double best_cost = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best;
  std::vector<int> support;
  support.reserve(static_cast<std::size_t>(n));
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    support.clear();
    for (int t = 0; t < n; ++t)
      if (mask >> t & 1u) support.push_back(t);
    const int f = static_cast<int>(support.size());

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(f + 1, f + 1);
    for (int i = 0; i < f; ++i)
      for (int j = 0; j < f; ++j)
        kkt(i, j) = h(support[static_cast<std::size_t>(i)], support[static_cast<std::size_t>(j)]);
    kkt.col(f).head(f).setConstant(-1.0);
    kkt.row(f).head(f).setConstant(1.0);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(f + 1);
    rhs(f) = q0;

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd x = lu.solve(rhs);

    bool feasible = true;
    for (int i = 0; i < f && feasible; ++i) feasible = x(i) >= -1e-9;
    if (!feasible) continue;

    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < f; ++i)
      v(support[static_cast<std::size_t>(i)]) = std::max(x(i), 0.0);
    const double cost = 0.5 * v.dot(h * v);
    if (cost < best_cost) {
      best_cost = cost;
      best = v;
    }
  }
  if (!std::isfinite(best_cost))
    throw std::runtime_error("optimal_deterministic_schedule: no feasible stationary point");
  return std::vector<double>(best.data(), best.data() + n);
}

std::vector<int> round_schedule(const std::vector<double>& volumes, int q0) {
  if (volumes.empty()) throw std::invalid_argument("round_schedule: empty schedule");
  double sum = 0.0;
  for (double v : volumes) {
    if (v < -1e-9) throw std::invalid_argument("round_schedule: volumes must be non-negative");
    sum += v;
  }
  if (std::abs(sum - q0) > 1e-6)
    throw std::invalid_argument("round_schedule: schedule must sum to q0");

  const std::size_t n = volumes.size();
  std::vector<int> out(n);
  std::vector<std::pair<double, std::size_t>> rem(n);
  long long floored = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::max(volumes[i], 0.0);
    out[i] = static_cast<int>(std::floor(v));
    floored += out[i];
    rem[i] = {v - out[i], i};
  }
  long long leftover = q0 - floored;
  // Largest remainder first; equal remainders resolve to the earlier step.
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; leftover > 0 && i < n; ++i, --leftover) out[rem[i].second] += 1;
  if (leftover != 0) throw std::runtime_error("round_schedule: rounding failed to conserve shares");
  return out;
}

int barger_lorig_action(int q, int t, int n, double alpha_t, double kappa_t,
                        const market::CIRImpactSpec& spec) {
  if (q < 0) throw std::invalid_argument("barger_lorig_action: inventory must be non-negative");
  if (t < 0 || t >= n) throw std::invalid_argument("barger_lorig_action: step index outside horizon");
  if (alpha_t <= 0.0 || kappa_t <= 0.0)
    throw std::invalid_argument("barger_lorig_action: impacts must be positive");
  if (t == n - 1) return q;

  const double remaining = static_cast<double>(n - t);
  const double nu = (1.0 / remaining
                     + spec.lambda_alpha * (spec.theta_alpha - alpha_t) / (2.0 * alpha_t)
                     + remaining * spec.lambda_kappa * (spec.theta_kappa - kappa_t) / (6.0 * kappa_t))
                    * q;
  const long v = std::lround(nu);
  return static_cast<int>(std::clamp(v, 0L, static_cast<long>(q)));
}

}  // namespace execlab::strategies
