#pragma once

#include <Eigen/Dense>

namespace ratefactor {

// Standard normal CDF via erf (absolute error well under 1e-12) and density.
double normal_cdf(double x);
double normal_pdf(double x);

// Fraction of arrivals that wait under square-root safety staffing with
// parameter theta: { 1 + theta * Phi(theta) / phi(theta) }^{-1}. theta > 0.
double delay_prob_from_theta(double theta);

// Inverse of the above by bisection on (0, 40]; alpha in (0, 1) exclusive.
// Round-trips to |delay_prob_from_theta(theta) - alpha| <= 1e-10.
double theta_from_delay_prob(double alpha);

enum class Rounding { none, ceil };

struct StaffingParams {
  double service_rate = 1.0;  // calls per interval per agent, > 0
  double theta = 0.0;         // safety parameter; may be negative
  Rounding rounding = Rounding::none;

  static StaffingParams from_theta(double service_rate, double theta,
                                   Rounding r = Rounding::none);
  // alpha in (0, 1]; alpha = 1 means no safety margin (theta = 0).
  static StaffingParams from_delay_prob(double service_rate, double alpha,
                                        Rounding r = Rounding::none);
};

struct StaffingPlan {
  Eigen::VectorXd offered_load;  // rate / service_rate per interval
  Eigen::VectorXd agents;        // load + theta * sqrt(load)
  Eigen::VectorXd lo, hi;        // central-band bounds; size 0 without an ensemble
};

// Square-root safety staffing for one rate profile: agents_j = R_j +
// theta * sqrt(R_j) with R_j = rate_j / service_rate. Rounding::ceil rounds
// up (values within 1e-9 of an integer round to it).
StaffingPlan staffing_level(const Eigen::VectorXd& rates,
                            const StaffingParams& params);

// Ensemble version: each replicate row is transformed to staffing levels
// first; agents = per-interval median of those levels, and lo/hi are the
// central `level` band's quantiles (so they bracket the point plan).
StaffingPlan staffing_level(const Eigen::MatrixXd& rate_ensemble,
                            const StaffingParams& params, double level);

}  // namespace ratefactor
