#include "ratefactor/svd.hpp"

#include <Eigen/SVD>

#include <cmath>

#include "ratefactor/types.hpp"

namespace ratefactor {

TruncatedSvd truncated_svd(const Eigen::MatrixXd& a, int k) {
  const int n = int(a.rows());
  const int m = int(a.cols());
  if (n == 0 || m == 0) throw input_error("svd of an empty matrix");
  if (k <= 0 || k > std::min(n, m))
    throw input_error("svd rank must lie in 1..min(n, m), got " +
                      std::to_string(k));
  if (!a.allFinite()) throw input_error("svd input has non-finite entries");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU |
                                            Eigen::ComputeThinV);
  TruncatedSvd out;
  out.u = svd.matrixU().leftCols(k);
  out.s = svd.singularValues().head(k);
  out.v = svd.matrixV().leftCols(k);

  // deterministic signs: first non-negligible entry of each v column positive
  for (int c = 0; c < k; ++c) {
    const double scale = out.v.col(c).norm();
    double lead = 0.0;
    for (int r = 0; r < m; ++r) {
      if (std::fabs(out.v(r, c)) > 1e-12 * (scale > 0 ? scale : 1.0)) {
        lead = out.v(r, c);
        break;
      }
    }
    if (lead < 0.0) {
      out.v.col(c) = -out.v.col(c);
      out.u.col(c) = -out.u.col(c);
    }
  }
  return out;
}

}  // namespace ratefactor
