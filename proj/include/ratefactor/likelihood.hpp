#pragma once

#include <Eigen/Dense>

#include "ratefactor/link.hpp"

namespace ratefactor {

// Poisson log-likelihood sum of y*log(rate) - rate over all cells, without
// the log(y!) term (constant in the rates, dropped everywhere in this
// library). Requires rates > 0 and y >= 0; y may be non-integral only in the
// sense of stored-as-double integers.
double poisson_loglik(const Eigen::MatrixXd& y, const Eigen::MatrixXd& rates);
double poisson_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& rates);

// 2 * { loglik(y; y) - loglik(y; rates) }, the deviance against the saturated
// fit, with the 0*log(0) cells contributing 0. Nonnegative; exactly 0 when
// rates reproduce y.
double poisson_deviance(const Eigen::MatrixXd& y, const Eigen::MatrixXd& rates);
double poisson_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& rates);

// Rate grid implied by scores (n x K) and loadings (m x K): inverse-link of
// scores * loadings^T, floored at kRateFloor. *clamped_cells (optional)
// receives the number of floored cells.
Eigen::MatrixXd apply_factor_model(const Eigen::MatrixXd& scores,
                                   const Eigen::MatrixXd& loadings, Link link,
                                   int* clamped_cells = nullptr);

}  // namespace ratefactor
