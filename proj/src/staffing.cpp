#include "ratefactor/staffing.hpp"

#include <cmath>

#include "ratefactor/quantile.hpp"
#include "ratefactor/types.hpp"

namespace ratefactor {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kThetaMax = 40.0;

double agents_for_load(double load, double theta) {
  return load + theta * std::sqrt(load);
}

double round_agents(double agents, Rounding r) {
  if (r == Rounding::none) return agents;
  // ceil with a tolerance so values a hair above an integer do not jump up
  return std::ceil(agents - 1e-9);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double delay_prob_from_theta(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw input_error("delay probability requires theta > 0");
  // phi underflows for huge theta; the ratio then diverges and alpha -> 0
  const double ratio = theta * normal_cdf(theta) / normal_pdf(theta);
  return 1.0 / (1.0 + ratio);
}

double theta_from_delay_prob(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw input_error("delay probability must lie strictly inside (0, 1)");
  // delay_prob_from_theta is strictly decreasing from 1 (theta -> 0) toward 0
  double lo = 0.0;    // alpha -> 1 in the limit
  double hi = kThetaMax;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (delay_prob_from_theta(mid) > alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

StaffingParams StaffingParams::from_theta(double service_rate, double theta,
                                          Rounding r) {
  if (!(service_rate > 0.0) || !std::isfinite(service_rate))
    throw input_error("service rate must be positive");
  if (!std::isfinite(theta)) throw input_error("theta must be finite");
  StaffingParams p;
  p.service_rate = service_rate;
  p.theta = theta;
  p.rounding = r;
  return p;
}

StaffingParams StaffingParams::from_delay_prob(double service_rate,
                                               double alpha, Rounding r) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw input_error("delay probability must lie in (0, 1]");
  // alpha = 1: every call may wait, no safety margin
  const double theta = alpha == 1.0 ? 0.0 : theta_from_delay_prob(alpha);
  return from_theta(service_rate, theta, r);
}

StaffingPlan staffing_level(const Eigen::VectorXd& rates,
                            const StaffingParams& params) {
  if (rates.size() == 0) throw input_error("empty rate profile");
  StaffingPlan plan;
  plan.offered_load.resize(rates.size());
  plan.agents.resize(rates.size());
  for (int j = 0; j < rates.size(); ++j) {
    if (!(rates(j) > 0.0) || !std::isfinite(rates(j)))
      throw input_error("staffing requires strictly positive rates");
    const double load = rates(j) / params.service_rate;
    plan.offered_load(j) = load;
    plan.agents(j) =
        round_agents(agents_for_load(load, params.theta), params.rounding);
  }
  return plan;
}

StaffingPlan staffing_level(const Eigen::MatrixXd& rate_ensemble,
                            const StaffingParams& params, double level) {
  if (rate_ensemble.rows() < 1 || rate_ensemble.cols() < 1)
    throw input_error("empty rate ensemble");
  if (!(level > 0.0 && level < 1.0))
    throw input_error("band level must lie in (0, 1)");
  const int m = int(rate_ensemble.cols());
  // transform every replicate to staffing levels first, then take quantiles
  Eigen::MatrixXd levels(rate_ensemble.rows(), m);
  for (int b = 0; b < rate_ensemble.rows(); ++b) {
    for (int j = 0; j < m; ++j) {
      const double r = rate_ensemble(b, j);
      if (!(r > 0.0) || !std::isfinite(r))
        throw input_error("staffing requires strictly positive ensemble rates");
      levels(b, j) = agents_for_load(r / params.service_rate, params.theta);
    }
  }
  const double tail = 0.5 * (1.0 - level);
  StaffingPlan plan;
  plan.offered_load = colwise_quantile(rate_ensemble, 0.5) / params.service_rate;
  plan.agents.resize(m);
  plan.lo.resize(m);
  plan.hi.resize(m);
  const Eigen::VectorXd med = colwise_quantile(levels, 0.5);
  const Eigen::VectorXd lo = colwise_quantile(levels, tail);
  const Eigen::VectorXd hi = colwise_quantile(levels, 1.0 - tail);
  for (int j = 0; j < m; ++j) {
    plan.agents(j) = round_agents(med(j), params.rounding);
    plan.lo(j) = round_agents(lo(j), params.rounding);
    plan.hi(j) = round_agents(hi(j), params.rounding);
  }
  return plan;
}

}  // namespace ratefactor
