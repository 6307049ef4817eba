#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ratefactor/types.hpp"

namespace ratefactor {

// Weekday-mean AR(1) on the daily level (sqrt scale):
//   level_i - mean[dow_i] = slope * (level_{i-1} - mean[dow_{i-1}]) + noise_i,
// noise ~ N(0, noise_sd^2), started from the stationary law. |slope| < 1.
struct DayLevelAr {
  std::array<double, 5> day_means{};
  double slope = 0.0;
  double noise_sd = 0.0;
};

// Multiplicative generator: sqrt(rate[i][j]) = level_i * profile[dow_i][j],
// where each weekday profile row sums to 1.
struct MulParams {
  DayLevelAr level;
  Eigen::MatrixXd day_profiles;  // 5 x m, rows sum to 1
  std::vector<std::string> interval_labels;  // optional (size m or 0)

  void validate() const;
};

// Additive generator: sqrt(rate[i][j]) = mean + level_i + interval_effects[j]
// + interactions[dow_i][j], with interval effects summing to 0 and the
// interaction grid double-centered (rows and columns sum to 0).
struct AddParams {
  double mean = 0.0;
  DayLevelAr level;  // day effects; their AR(1) process on the sqrt scale
  Eigen::VectorXd interval_effects;  // m, sums to 0
  Eigen::MatrixXd interactions;      // 5 x m, rows and columns sum to 0
  std::vector<std::string> interval_labels;

  void validate() const;
};

struct SimResult {
  CountMatrix counts;
  Eigen::MatrixXd rates;  // hidden truth, n x m
  int clamped_cells = 0;  // sqrt-rates clamped up to sqrt(kRateFloor)
};

// Bitwise-deterministic under a fixed seed. Weekdays cycle Monday..Friday
// from start_day. Nonpositive sqrt-rates are clamped at sqrt(kRateFloor)
// before squaring; counts are one Poisson draw per cell.
SimResult generate_mul(const MulParams& params, int days, std::uint64_t seed,
                       int start_day = 1);
SimResult generate_add(const AddParams& params, int days, std::uint64_t seed,
                       int start_day = 1);

// Gaussian two-way baseline fit on x = sqrt(y + 1/4) (approximately normal
// with mean sqrt(rate) and variance 1/4). kind = mul: per-weekday unit-sum
// profiles scaled by a daily level (the row total of x). kind = add: full
// additive decomposition mean + day + interval + weekday-interaction with
// the same centering constraints as AddParams. Either way the daily level
// series gets a weekday-mean AR(1) for forecasting, and forecasts map back
// through rate = x^2 floored at kRateFloor.
enum class TwoWayKind { mul, add };

struct TwoWayFit {
  TwoWayKind kind = TwoWayKind::mul;
  // mul pieces
  Eigen::MatrixXd profiles;  // 5 x m, rows sum to 1
  // add pieces
  double mean = 0.0;
  Eigen::VectorXd interval_effects;
  Eigen::MatrixXd interactions;  // 5 x m
  // daily level series and its forecasting model
  Eigen::VectorXd level;
  std::array<double, 5> level_means{};
  double level_slope = 0.0;
  int last_day = 1;  // weekday of the final fitted day

  // Rate profile for `horizon` days past the fitted panel (zero future
  // noise; weekdays cycle).
  Eigen::VectorXd forecast_rates(int horizon = 1) const;
};

// Requires every weekday present in the panel.
TwoWayFit fit_two_way_gaussian(const CountMatrix& counts, TwoWayKind kind);

}  // namespace ratefactor
