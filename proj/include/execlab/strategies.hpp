#pragma once

#include <vector>

#include "execlab/market.hpp"

namespace execlab::strategies {

/// Risk inputs for the closed-form urgency schedule. lambda_ra = 0 recovers
/// the risk-neutral (TWAP) holdings profile.
struct ACRiskParams {
  double lambda_ra = 0.0;
  double sigma = 1e-5;
  double alpha_tilde = 0.002;
  double tau = 1.0;
};

/// Equal-paced integer schedule: q0 split over n steps, earlier steps take
/// the remainder. twap(7, 3) = {3, 2, 2}.
std::vector<int> twap(int q0, int n);

/// Holdings q*_t = q0 * sinh(w*(T-t))/sinh(w*T) for t = 0..n (in units of
/// tau), where w solves 2*(cosh(w*tau)-1) = (lambda_ra*sigma^2/alpha_tilde)
/// * tau^2 / ... the discrete first-order condition. lambda_ra = 0 yields
/// the straight line q0*(n-t)/n.
std::vector<double> ac_sinh_holdings(int q0, int n, const ACRiskParams& risk);

/// Minimizes expected shortfall sum_t alpha_t v_t^2 + sum_t v_t sum_{s<t}
/// kappa_s v_s over real schedules with sum v = q0, v >= 0. Solves the KKT
/// system on every candidate support (exact even for the indefinite Hessians
/// that decaying impacts produce), so the horizon is capped at 20 steps.
std::vector<double> optimal_deterministic_schedule(const market::ImpactTrajectory& traj, double q0);

/// Rounds a real schedule to integers summing to q0 by largest remainder;
/// ties go to the earlier step.
std::vector<int> round_schedule(const std::vector<double>& volumes, int q0);

/// Myopic closed-form trading rate for stochastically mean-reverting
/// impacts, discretized to an integer volume in [0, q]; sells everything at
/// the final step.
int barger_lorig_action(int q, int t, int n, double alpha_t, double kappa_t,
                        const market::CIRImpactSpec& spec);

}  // namespace execlab::strategies
