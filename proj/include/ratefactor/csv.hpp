#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "ratefactor/types.hpp"

namespace ratefactor {

// Shortest-exact decimal rendering of a double (17 significant digits when
// needed), so written files round-trip losslessly and reruns are
// byte-identical.
std::string format_double(double x);

// Writes content to path via a temporary file in the same directory plus an
// atomic rename, so readers never observe a half-written file.
void write_file_atomic(const std::string& path, const std::string& content);

// Count panel CSV: header "date,dow,<label>,...", one row per day. Counts
// must be nonnegative integers. Errors cite the offending line number.
CountMatrix read_counts_csv(const std::string& path);
void write_counts_csv(const CountMatrix& counts, const std::string& path);

// Same layout with real-valued cells (hidden-truth rates, forecasts).
struct RatesCsv {
  Eigen::MatrixXd values;
  std::vector<int> day_of_week;
  std::vector<std::string> interval_labels;
  std::vector<std::string> dates;
};
RatesCsv read_rates_csv(const std::string& path);
void write_rates_csv(const RatesCsv& rates, const std::string& path);

// Ensemble CSV: header "replicate,<label>,...", one row per replicate.
void write_ensemble_csv(const Eigen::MatrixXd& ensemble,
                        const std::vector<std::string>& interval_labels,
                        const std::string& path);
Eigen::MatrixXd read_ensemble_csv(const std::string& path);

}  // namespace ratefactor
