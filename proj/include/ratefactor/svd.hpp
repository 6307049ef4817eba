#pragma once

#include <Eigen/Dense>

namespace ratefactor {

struct TruncatedSvd {
  Eigen::MatrixXd u;  // n x k, orthonormal columns
  Eigen::VectorXd s;  // k singular values, descending, >= 0
  Eigen::MatrixXd v;  // m x k, orthonormal columns
};

// Leading-k singular triplets of a dense matrix, k <= min(n, m). Deterministic
// sign convention: the first entry of each v column whose magnitude exceeds
// 1e-12 of the column norm is positive.
TruncatedSvd truncated_svd(const Eigen::MatrixXd& a, int k);

}  // namespace ratefactor
