#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "ratefactor/aml.hpp"
#include "ratefactor/factor_model.hpp"
#include "ratefactor/types.hpp"

namespace ratefactor {

// One day's counts observed for its first m0 intervals only.
struct PartialDay {
  Eigen::VectorXd early_counts;  // length m0; nonnegative integers
  int m0 = 0;

  void validate(int m_total) const;  // 1 <= m0 < m, counts match m0
};

// Second-order expansion of one early-interval Poisson term around linear
// predictor eta0, as weight w and pseudo-response ystar: the term is
// approximated by w * (ystar - eta)^2 + const. Per link:
//   identity: w = y / (2 eta0^2)          ystar = eta0 - (eta0^2 - y*eta0)/y
//   sqrt:     w = 1 + y / eta0^2          ystar = eta0 - (eta0^3 - y*eta0)/(eta0^2 + y)
//   log:      w = exp(eta0) / 2           ystar = eta0 - (1 - y*exp(-eta0))
// Weights are floored at weight_floor; when flooring fires (identity, y = 0)
// ystar is taken from the exact finite product w*ystar so the normal
// equations stay correct. eta0 = 0 is a singular expansion for identity/sqrt
// and throws numeric_error.
struct TaylorPoint {
  double w;
  double ystar;
};
TaylorPoint taylor_weights(Link link, double y, double eta0,
                           double weight_floor = 1e-10);

struct PenalizedUpdateConfig {
  double omega = 0.0;  // anchor strength, >= 0 and finite
  int max_iters = 50;
  double tol = 1e-9;  // relative objective change
  double weight_floor = 1e-10;
};

struct UpdatedForecast {
  Eigen::VectorXd scores;        // updated scores for the day
  Eigen::VectorXd latter_rates;  // rates for intervals m0..m-1
  double objective = 0.0;        // penalized objective at the solution
  double omega = 0.0;
  int m0 = 0;
  int iterations = 0;
  bool converged = false;
};

// Single frozen-weight quadratic step: solves
//   (fe^T W fe + omega I) beta = fe^T W ystar + omega * anchor
// where W = diag(w). The closed form behind each update iteration; exposed
// for direct verification against a generic dense solve.
Eigen::VectorXd penalized_quadratic_step(const Eigen::MatrixXd& fe,
                                         const Eigen::VectorXd& w,
                                         const Eigen::VectorXd& ystar,
                                         double omega,
                                         const Eigen::VectorXd& anchor);

// Re-estimates the current day's scores from its first m0 counts while
// shrinking toward the day-ahead forecast `anchor`: minimizes
//   sum_{j < m0} [ rate_j - y_j log rate_j ]  +  omega * ||beta - anchor||^2
// over beta, rate_j = inverse-link(loadings.row(j) . beta), by repeated
// frozen-weight quadratic steps with a step-halving safeguard on the true
// objective. Requires a scores-orthonormal model. Initialization: the
// unpenalized maximum-likelihood fit on the early intervals when m0 >= K (and
// the fit succeeds), else the anchor itself. omega = 0 reduces to maximum
// likelihood on the early intervals; omega -> infinity pins beta at the
// anchor.
UpdatedForecast penalized_update(const FactorModel& model,
                                 const PartialDay& partial,
                                 const Eigen::VectorXd& anchor,
                                 const PenalizedUpdateConfig& cfg);

// Bootstrap spread for an updated forecast. Weights and pseudo-responses are
// frozen at the point update's solution; each anchor draw (row of
// anchor_draws) receives exactly one quadratic step, then latter-interval
// rates and one Poisson count profile (sub-stream split_seed(seed, b)).
struct UpdateEnsemble {
  Eigen::MatrixXd scores;        // n_boot x K
  Eigen::MatrixXd latter_rates;  // n_boot x (m - m0)
  Eigen::MatrixXi latter_counts;
};
UpdateEnsemble one_step_bootstrap_update(const FactorModel& model,
                                         const PartialDay& partial,
                                         const UpdatedForecast& point,
                                         const Eigen::MatrixXd& anchor_draws,
                                         const PenalizedUpdateConfig& cfg,
                                         std::uint64_t seed);

// Volume-ratio fallback: scales the latter intervals of a day-ahead rate
// profile by (observed early volume) / (forecast early volume).
struct VolumeScaledUpdate {
  double ratio;
  Eigen::VectorXd latter_rates;  // m - m0
};
VolumeScaledUpdate hp_update(const Eigen::VectorXd& base_rates,
                             const PartialDay& partial);

// Hold-out search for the anchor strength. For each of the trailing
// `holdout_days` days of `history`: refit the factor and score models on the
// `fit_window` days before it, forecast the day, update at the cut under
// every grid value, and score root-mean-square error between the updated
// latter rates and the realized latter *counts*. Returns the grid value with
// the smallest mean RMSE (ties -> smallest omega).
struct OmegaSearchConfig {
  std::vector<double> grid;  // empty -> {0, 10, 1e2, ..., 1e9}
  int holdout_days = 50;
  int fit_window = 100;
  int cut = 0;  // m0; required >= 1
  AmlConfig fit;
  PenalizedUpdateConfig update;
};
struct OmegaSelection {
  double omega = 0.0;
  std::vector<double> grid;
  std::vector<double> mean_rmse;  // aligned with grid
};
OmegaSelection select_omega(const CountMatrix& history,
                            const OmegaSearchConfig& cfg);

}  // namespace ratefactor
