#include "ratefactor/quantile.hpp"

#include <algorithm>
#include <cmath>

#include "ratefactor/types.hpp"

namespace ratefactor {

double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) throw input_error("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw input_error("quantile level outside [0, 1]");
  std::sort(xs.begin(), xs.end());
  const double h = (double(xs.size()) - 1.0) * p;
  const std::size_t lo = std::size_t(std::floor(h));
  if (lo + 1 >= xs.size()) return xs.back();
  const double frac = h - double(lo);
  return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

double quantile(const Eigen::VectorXd& xs, double p) {
  return quantile(std::vector<double>(xs.data(), xs.data() + xs.size()), p);
}

Eigen::VectorXd colwise_quantile(const Eigen::MatrixXd& samples, double p) {
  Eigen::VectorXd out(samples.cols());
  for (int j = 0; j < samples.cols(); ++j)
    out(j) = quantile(Eigen::VectorXd(samples.col(j)), p);
  return out;
}

}  // namespace ratefactor
