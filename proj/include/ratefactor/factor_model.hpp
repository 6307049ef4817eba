#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "ratefactor/likelihood.hpp"
#include "ratefactor/link.hpp"

namespace ratefactor {

// Which side of the factor decomposition carries orthonormal columns. The
// other side absorbs the singular-value scale.
enum class Normalization { scores_orthonormal, loadings_orthonormal };

Normalization normalization_from_string(const std::string& name);
std::string to_string(Normalization n);

// Fitted low-rank rate model: linear predictor = scores * loadings^T on the
// link scale. scores row i describes day i; loadings row j describes
// interval j.
struct FactorModel {
  Link link = Link::sqrt;
  int k = 0;
  Normalization normalization = Normalization::scores_orthonormal;
  Eigen::MatrixXd scores;    // n x K
  Eigen::MatrixXd loadings;  // m x K
  double deviance = 0.0;

  // Fit diagnostics (not persisted).
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> warnings;

  int days() const { return static_cast<int>(scores.rows()); }
  int intervals() const { return static_cast<int>(loadings.rows()); }

  Eigen::MatrixXd rates(int* clamped_cells = nullptr) const {
    return apply_factor_model(scores, loadings, link, clamped_cells);
  }

  // Throws input_error on inconsistent shapes or K <= 0.
  void validate() const;
};

}  // namespace ratefactor
