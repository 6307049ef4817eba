#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ratefactor/aml.hpp"
#include "ratefactor/intraday.hpp"
#include "ratefactor/staffing.hpp"
#include "ratefactor/types.hpp"

namespace ratefactor {

// Accuracy of one day's forecast profile against the truth:
//   rmse = sqrt( mean_j (f_j - t_j)^2 )
//   mre  = (100 / m) * sum_j |f_j - t_j| / t_j     (truth must be > 0)
struct Accuracy {
  double rmse;
  double mre;
};
Accuracy rmse_mre(const Eigen::VectorXd& forecast,
                  const Eigen::VectorXd& truth);

// Sorted (value, rank/n) pairs, rank starting at 1.
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> xs);

// Share of truths inside [lo, hi] and the mean band width.
struct IntervalReport {
  double coverage;
  double mean_width;
};
IntervalReport interval_report(const Eigen::VectorXd& lo,
                               const Eigen::VectorXd& hi,
                               const Eigen::VectorXd& truth);

// Walk-forward forecasting study. Methods:
//   TS<k>  factor model with k factors + day-ahead score recursion
//   PML<k> TS<k> re-estimated from the day's first `update_cut` counts
//   MUL    multiplicative two-way Gaussian baseline
//   ADD    additive two-way Gaussian baseline
//   HPM    MUL scaled by the observed/forecast early-volume ratio
//   HPA    ADD scaled likewise
//   ORACLE realized counts replayed as the forecast (staffing mode's truth)
struct RollingConfig {
  int train_window = 150;
  int test_days = 50;
  std::vector<std::string> methods;
  int update_cut = 0;  // m0 for updating methods; 0 = no intraday data
  int mask_cut = 0;    // metrics restricted to intervals >= max(cuts)
  bool refit_each_day = true;
  Link link = Link::sqrt;
  AmlConfig aml;  // k is taken from the method names
  PenalizedUpdateConfig update;
  bool auto_omega = false;  // resolve omega once on the first train window
  OmegaSearchConfig omega_search;  // used when auto_omega
  int n_boot = 0;  // > 0 adds coverage/width metrics for TS/PML methods
  std::optional<StaffingParams> staffing;  // staffing-error mode
  std::uint64_t seed = kDefaultSeed;
};

struct MetricRow {
  int day;  // panel row index of the forecast day
  std::string method;
  std::string metric;  // "rmse" | "mre" | "coverage" | "width"
  double value;
};

struct MetricSummary {
  double mean, median, q1, q3;
  int n;
};

struct MetricReport {
  std::vector<MetricRow> rows;
  double omega_used = 0.0;

  // Per (method, metric) summary over days.
  std::map<std::pair<std::string, std::string>, MetricSummary> summarize() const;
  // Values of one (method, metric) series in day order.
  std::vector<double> series(const std::string& method,
                             const std::string& metric) const;
};

// Scores each of the trailing cfg.test_days days one step ahead from models
// refit on the cfg.train_window days before it (forecasts never see the
// scored day beyond its first update_cut counts). Rate metrics compare
// against true_rates (required unless staffing mode); staffing mode compares
// staffing plans against the oracle plan built from realized counts.
MetricReport run_rolling_exercise(const CountMatrix& counts,
                                  const Eigen::MatrixXd* true_rates,
                                  const RollingConfig& cfg);

}  // namespace ratefactor
