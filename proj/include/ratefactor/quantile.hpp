#pragma once

#include <Eigen/Dense>

#include <vector>

namespace ratefactor {

// Empirical quantile with linear interpolation between order statistics and
// inclusive endpoints: position h = (n-1)*p, value x[floor(h)] interpolated
// toward x[floor(h)+1]. p in [0,1]; xs must be nonempty.
double quantile(std::vector<double> xs, double p);
double quantile(const Eigen::VectorXd& xs, double p);

// Per-column quantile of a samples-in-rows matrix.
Eigen::VectorXd colwise_quantile(const Eigen::MatrixXd& samples, double p);

}  // namespace ratefactor
