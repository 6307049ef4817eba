#pragma once

#include <Eigen/Dense>

#include <vector>

#include "ratefactor/factor_model.hpp"
#include "ratefactor/glm.hpp"
#include "ratefactor/types.hpp"

namespace ratefactor {

struct AmlConfig {
  int k = 1;
  Link link = Link::sqrt;
  Normalization normalization = Normalization::scores_orthonormal;
  int max_outer_iters = 100;
  double outer_tol = 1e-7;  // relative deviance change across sweeps
  GlmConfig glm;
};

// Alternating maximum-likelihood factor fit. An SVD of the zero-shifted,
// link-transformed counts seeds scores and loadings; each sweep refits every
// day's scores against the loadings and every interval's loadings against the
// scores by Poisson regression, then renormalizes through a thin SVD of
// scores*loadings^T (orthonormal side per cfg.normalization, the other side
// scaled). Sweeps that would raise the deviance are blended back toward the
// previous iterate (up to 10 halvings), so the deviance sequence is
// nonincreasing. A failed per-row/column regression keeps that row and
// records a warning rather than aborting. Loadings columns carry a fixed sign
// convention (first non-negligible entry positive).
//
// scores_init/loadings_init (both or neither) override the SVD seed.
FactorModel fit_factor_model(const CountMatrix& counts, const AmlConfig& cfg,
                             const Eigen::MatrixXd* scores_init = nullptr,
                             const Eigen::MatrixXd* loadings_init = nullptr);

struct DevianceRow {
  int k;
  double deviance;
  double reduction;  // deviance(k-1) - deviance(k)
};

// Deviance-vs-rank table for choosing K. Fits are nested and warm-started:
// the K+1 fit seeds its extra loadings column from the link-scale residual of
// the K fit and starts the extra scores column at zero, so its starting
// deviance equals the K fit's final deviance exactly and the sequence is
// structurally nonincreasing.
struct DevianceTable {
  double null_deviance = 0.0;       // intercept-only model (grand-mean rate)
  std::vector<DevianceRow> rows;    // k = 1..k_max
  std::vector<FactorModel> models;  // fitted model per row (reusable)

  // Advisory elbow: the largest K whose reduction is still at least 2% of the
  // total reduction across the table (at least 1).
  int suggested_k() const;
};

DevianceTable deviance_reduction_table(const CountMatrix& counts, int k_max,
                                       const AmlConfig& base);

}  // namespace ratefactor
