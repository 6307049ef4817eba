#include "ratefactor/likelihood.hpp"

#include <cmath>

#include "ratefactor/factor_model.hpp"
#include "ratefactor/types.hpp"

namespace ratefactor {

namespace {

void check_pair(const Eigen::MatrixXd& y, const Eigen::MatrixXd& rates) {
  if (y.rows() != rates.rows() || y.cols() != rates.cols())
    throw input_error("counts and rates have different shapes");
  if (y.size() == 0) throw input_error("empty counts");
}

}  // namespace

double poisson_loglik(const Eigen::MatrixXd& y, const Eigen::MatrixXd& rates) {
  check_pair(y, rates);
  double ll = 0.0;
  for (int i = 0; i < y.rows(); ++i) {
    for (int j = 0; j < y.cols(); ++j) {
      const double yij = y(i, j);
      const double lam = rates(i, j);
      if (!(yij >= 0.0) || !std::isfinite(yij))
        throw input_error("counts must be nonnegative");
      if (!(lam > 0.0) || !std::isfinite(lam))
        throw input_error("rates must be strictly positive");
      ll += yij * std::log(lam) - lam;
    }
  }
  return ll;
}

double poisson_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& rates) {
  return poisson_loglik(Eigen::MatrixXd(y), Eigen::MatrixXd(rates));
}

double poisson_deviance(const Eigen::MatrixXd& y,
                        const Eigen::MatrixXd& rates) {
  check_pair(y, rates);
  double dev = 0.0;
  for (int i = 0; i < y.rows(); ++i) {
    for (int j = 0; j < y.cols(); ++j) {
      const double yij = y(i, j);
      const double lam = rates(i, j);
      if (!(yij >= 0.0) || !std::isfinite(yij))
        throw input_error("counts must be nonnegative");
      if (!(lam > 0.0) || !std::isfinite(lam))
        throw input_error("rates must be strictly positive");
      // saturated term y*log(y) - y contributes 0 when y = 0
      const double sat = yij > 0.0 ? yij * std::log(yij) - yij : 0.0;
      dev += 2.0 * (sat - (yij * std::log(lam) - lam));
    }
  }
  return dev;
}

double poisson_deviance(const Eigen::VectorXd& y,
                        const Eigen::VectorXd& rates) {
  return poisson_deviance(Eigen::MatrixXd(y), Eigen::MatrixXd(rates));
}

Eigen::MatrixXd apply_factor_model(const Eigen::MatrixXd& scores,
                                   const Eigen::MatrixXd& loadings, Link link,
                                   int* clamped_cells) {
  if (scores.cols() != loadings.cols())
    throw input_error("scores and loadings disagree on the factor count");
  if (scores.size() == 0 || loadings.size() == 0)
    throw input_error("empty factor matrices");
  const Eigen::MatrixXd eta = scores * loadings.transpose();
  Eigen::MatrixXd rates(eta.rows(), eta.cols());
  int clamped = 0;
  for (int i = 0; i < eta.rows(); ++i) {
    for (int j = 0; j < eta.cols(); ++j) {
      // Raw inverse link, not link_inverse(): that helper floors internally,
      // which would hide how many cells the floor actually caught.
      const double e = eta(i, j);
      double lam = 0.0;
      switch (link) {
        case Link::identity:
          lam = e;
          break;
        case Link::log:
          lam = std::exp(e);
          break;
        case Link::sqrt:
          lam = e * e;
          break;
      }
      if (lam < kRateFloor) {
        ++clamped;
        rates(i, j) = kRateFloor;
      } else {
        rates(i, j) = lam;
      }
    }
  }
  if (clamped_cells) *clamped_cells = clamped;
  return rates;
}

Normalization normalization_from_string(const std::string& name) {
  if (name == "scores-orthonormal" || name == "scores") {
    return Normalization::scores_orthonormal;
  }
  if (name == "loadings-orthonormal" || name == "loadings") {
    return Normalization::loadings_orthonormal;
  }
  throw input_error("unknown normalization '" + name +
                    "'; expected scores-orthonormal or loadings-orthonormal");
}

std::string to_string(Normalization n) {
  return n == Normalization::scores_orthonormal ? "scores-orthonormal"
                                                : "loadings-orthonormal";
}

void FactorModel::validate() const {
  if (k <= 0) throw input_error("factor count must be positive");
  if (scores.cols() != k || loadings.cols() != k)
    throw input_error("factor matrices do not match the factor count");
  if (scores.rows() < 1 || loadings.rows() < 1)
    throw input_error("factor matrices are empty");
  if (!scores.allFinite() || !loadings.allFinite())
    throw input_error("factor matrices must be finite");
}

}  // namespace ratefactor
