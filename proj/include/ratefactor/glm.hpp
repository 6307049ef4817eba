#pragma once

#include <Eigen/Dense>

#include <functional>

#include "ratefactor/link.hpp"

namespace ratefactor {

// Working weight of the reweighted least-squares step at rate lambda:
// 1/lambda (identity), lambda (log), the constant 4 (sqrt). These are the
// expected-information weights 1 / (Var * g'(lambda)^2).
double glm_working_weight(Link link, double lambda);

struct GlmConfig {
  int max_iters = 50;
  double tol = 1e-8;           // relative deviance change
  double weight_floor = 1e-10;  // working weights never drop below this
  // Optional per-iteration probe of the working-weight vector (diagnostics).
  std::function<void(int iter, const Eigen::VectorXd& w)> weight_observer;
};

struct GlmFit {
  Eigen::VectorXd beta;
  double deviance = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Poisson regression of y (p obs, nonnegative) on design x (p x k) under
// `link`: maximizes sum y*log(rate) - rate by iteratively reweighted least
// squares with a step-halving safeguard, so the deviance never increases
// across accepted iterates. `init` optionally warm-starts the coefficients.
// Throws numeric_error when the (weighted) design is rank deficient; a
// stalled iteration returns its best iterate with converged = false.
GlmFit fit_poisson_glm(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                       Link link, const GlmConfig& cfg = {},
                       const Eigen::VectorXd* init = nullptr);

}  // namespace ratefactor
