#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

#include "ratefactor/factor_model.hpp"
#include "ratefactor/types.hpp"

namespace ratefactor {

// Day-ahead autoregression for one factor's score series: the score on day i
// is intercept[dow(i-1)] + slope * score(i-1) + noise. The intercept varies
// with the *previous* day's weekday.
struct ScoreAr {
  std::array<double, 5> intercepts{};  // indexed by weekday code - 1
  double slope = 0.0;
  std::vector<double> residuals;  // in-sample, days 2..n
  double residual_sd = 0.0;       // sqrt(RSS / (n-1-6))
  bool nonstationary = false;     // |slope| >= 1
};

struct ScoreModel {
  std::vector<ScoreAr> factors;
  Eigen::VectorXd last_scores;  // scores of the final fitted day
  int last_day = 1;             // its weekday code

  int k() const { return static_cast<int>(factors.size()); }
};

// Per-factor least squares of day-(i) scores on five previous-day weekday
// dummies plus the previous day's score, i = 2..n. Requires n >= 8 and every
// weekday present among days 1..n-1 (error names the missing day).
ScoreModel fit_score_model(const Eigen::MatrixXd& scores,
                           const std::vector<int>& day_of_week);

// F test of one lag slope per weekday (10 parameters) against a single
// common slope (6 parameters) for one score series; df (4, n-11).
struct SlopeFTest {
  double f_stat;
  double p_value;
  int df1;
  int df2;
};
SlopeFTest nested_slope_f_test(const Eigen::VectorXd& series,
                               const std::vector<int>& day_of_week);

// Deterministic h-step score path with zero future noise. Weekdays cycle
// Monday..Friday after model.last_day. Row s-1 holds the day n+s scores.
Eigen::MatrixXd forecast_scores(const ScoreModel& model, int horizon);

// Rate forecast for day n+horizon.
struct RateForecast {
  int horizon = 1;
  std::uint64_t seed = 0;
  Eigen::VectorXd point_scores;     // K
  Eigen::VectorXd point_rates;      // m
  Eigen::MatrixXd ensemble_scores;  // n_boot x K (0 x 0 without bootstrap)
  Eigen::MatrixXd ensemble_rates;   // n_boot x m
  Eigen::MatrixXi ensemble_counts;  // n_boot x m, one Poisson profile per row
};

// Point path: score recursion with zero noise, rates via the inverse link.
// Bootstrap replicate b re-draws one resampled in-sample residual per factor
// per step (with replacement, factors independent), maps the resulting
// horizon-step scores to rates, and draws one Poisson count profile from
// them. Replicate b consumes sub-stream split_seed(seed, b), so the ensemble
// is reproducible and order-independent.
RateForecast forecast_rates(const FactorModel& model, const ScoreModel& sm,
                            int horizon, int n_boot, std::uint64_t seed);

}  // namespace ratefactor
