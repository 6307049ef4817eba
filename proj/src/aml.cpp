#include "ratefactor/aml.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "ratefactor/parallel.hpp"
#include "ratefactor/svd.hpp"

namespace ratefactor {

namespace {

struct Pair {
  Eigen::MatrixXd b, f;
};

// Thin-SVD renormalization of b*f^T truncated to rank k: QR of both factors,
// SVD of the small core, scale on the side the normalization leaves free.
Pair renorm_product(const Eigen::MatrixXd& b, const Eigen::MatrixXd& f, int k,
                    Normalization norm) {
  const int n = int(b.rows());
  const int m = int(f.rows());
  const int c = int(b.cols());
  Eigen::HouseholderQR<Eigen::MatrixXd> qrb(b);
  const Eigen::MatrixXd qb =
      qrb.householderQ() * Eigen::MatrixXd::Identity(n, c);
  const Eigen::MatrixXd rb = qb.transpose() * b;
  Eigen::HouseholderQR<Eigen::MatrixXd> qrf(f);
  const Eigen::MatrixXd qf =
      qrf.householderQ() * Eigen::MatrixXd::Identity(m, c);
  const Eigen::MatrixXd rf = qf.transpose() * f;

  Eigen::JacobiSVD<Eigen::MatrixXd> core(
      rb * rf.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd u = qb * core.matrixU().leftCols(k);
  const Eigen::MatrixXd v = qf * core.matrixV().leftCols(k);
  const Eigen::VectorXd s = core.singularValues().head(k);

  Pair out;
  if (norm == Normalization::scores_orthonormal) {
    out.b = u;
    out.f = v * s.asDiagonal();
  } else {
    out.b = u * s.asDiagonal();
    out.f = v;
  }
  return out;
}

// First non-negligible entry of each loadings column made positive; the
// matching scores column flips with it.
void fix_signs(Eigen::MatrixXd& b, Eigen::MatrixXd& f) {
  for (int c = 0; c < f.cols(); ++c) {
    const double scale = f.col(c).norm();
    for (int r = 0; r < f.rows(); ++r) {
      const double x = f(r, c);
      if (std::fabs(x) > 1e-12 * (scale > 0 ? scale : 1.0)) {
        if (x < 0.0) {
          f.col(c) = -f.col(c);
          b.col(c) = -b.col(c);
        }
        break;
      }
    }
  }
}

Eigen::MatrixXd transformed_counts(const Eigen::MatrixXd& y, Link link) {
  const double shift = link_zero_shift(link);
  Eigen::MatrixXd m(y.rows(), y.cols());
  for (int i = 0; i < y.rows(); ++i)
    for (int j = 0; j < y.cols(); ++j)
      m(i, j) = link_forward(link, y(i, j) + shift);
  return m;
}

}  // namespace

FactorModel fit_factor_model(const CountMatrix& counts, const AmlConfig& cfg,
                             const Eigen::MatrixXd* scores_init,
                             const Eigen::MatrixXd* loadings_init) {
  counts.validate();
  const Eigen::MatrixXd& y = counts.counts;
  const int n = int(y.rows());
  const int m = int(y.cols());
  if (cfg.k <= 0 || cfg.k > std::min(n, m))
    throw input_error("factor count must lie in 1..min(days, intervals), got " +
                      std::to_string(cfg.k));
  if ((scores_init == nullptr) != (loadings_init == nullptr))
    throw input_error("provide both factor seeds or neither");

  FactorModel model;
  model.link = cfg.link;
  model.k = cfg.k;
  model.normalization = cfg.normalization;

  for (int i = 0; i < n; ++i)
    if (y.row(i).sum() == 0.0) {
      model.warnings.push_back("day " + std::to_string(i + 1) +
                               " has no counts; its rates sit at the floor");
      break;
    }
  for (int j = 0; j < m; ++j)
    if (y.col(j).sum() == 0.0) {
      model.warnings.push_back("interval " + std::to_string(j + 1) +
                               " has no counts; its rates sit at the floor");
      break;
    }

  Eigen::MatrixXd b, f;
  if (scores_init) {
    if (scores_init->rows() != n || loadings_init->rows() != m ||
        scores_init->cols() != cfg.k || loadings_init->cols() != cfg.k)
      throw input_error("factor seed shapes disagree with the panel");
    b = *scores_init;
    f = *loadings_init;
  } else {
    const TruncatedSvd svd = truncated_svd(transformed_counts(y, cfg.link), cfg.k);
    if (cfg.normalization == Normalization::scores_orthonormal) {
      b = svd.u;
      f = svd.v * svd.s.asDiagonal();
    } else {
      b = svd.u * svd.s.asDiagonal();
      f = svd.v;
    }
  }

  double dev = poisson_deviance(y, apply_factor_model(b, f, cfg.link));
  bool glm_warned = false;

  for (int outer = 1; outer <= cfg.max_outer_iters; ++outer) {
    // refit every day's scores against the loadings
    Eigen::MatrixXd b_new(n, cfg.k);
    std::vector<unsigned char> failed(size_t(n) + size_t(m), 0);
    parallel_for(std::size_t(n), [&](std::size_t i) {
      const Eigen::VectorXd yi = y.row(int(i)).transpose();
      const Eigen::VectorXd init = b.row(int(i)).transpose();
      try {
        b_new.row(int(i)) =
            fit_poisson_glm(yi, f, cfg.link, cfg.glm, &init).beta.transpose();
      } catch (const std::exception&) {
        b_new.row(int(i)) = b.row(int(i));
        failed[i] = 1;
      }
    });
    // refit every interval's loadings against the new scores
    Eigen::MatrixXd f_new(m, cfg.k);
    parallel_for(std::size_t(m), [&](std::size_t j) {
      const Eigen::VectorXd yj = y.col(int(j));
      const Eigen::VectorXd init = f.row(int(j)).transpose();
      try {
        f_new.row(int(j)) =
            fit_poisson_glm(yj, b_new, cfg.link, cfg.glm, &init).beta.transpose();
      } catch (const std::exception&) {
        f_new.row(int(j)) = f.row(int(j));
        failed[size_t(n) + j] = 1;
      }
    });
    if (!glm_warned) {
      int nfail = 0;
      for (unsigned char c : failed) nfail += c;
      if (nfail > 0) {
        model.warnings.push_back(std::to_string(nfail) +
                                 " per-row/column regressions failed in sweep " +
                                 std::to_string(outer) +
                                 "; their previous values were kept");
        glm_warned = true;
      }
    }

    Pair cand = renorm_product(b_new, f_new, cfg.k, cfg.normalization);
    double dev_c =
        poisson_deviance(y, apply_factor_model(cand.b, cand.f, cfg.link));

    // monotone safeguard: blend back toward the previous iterate
    double alpha = 1.0;
    int halvings = 0;
    while (dev_c > dev && halvings < 10) {
      alpha *= 0.5;
      ++halvings;
      Eigen::MatrixXd bcat(n, 2 * cfg.k), fcat(m, 2 * cfg.k);
      bcat << (1.0 - alpha) * b, alpha * b_new;
      fcat << f, f_new;
      cand = renorm_product(bcat, fcat, cfg.k, cfg.normalization);
      dev_c = poisson_deviance(y, apply_factor_model(cand.b, cand.f, cfg.link));
    }
    if (dev_c > dev) {
      model.warnings.push_back("sweep " + std::to_string(outer) +
                               " could not lower the deviance; stopping");
      model.iterations = outer;
      break;
    }

    const double rel = (dev - dev_c) / (std::fabs(dev_c) + 1e-10);
    b = cand.b;
    f = cand.f;
    dev = dev_c;
    model.iterations = outer;
    if (rel < cfg.outer_tol) {
      model.converged = true;
      break;
    }
  }

  fix_signs(b, f);
  model.scores = b;
  model.loadings = f;
  model.deviance = dev;
  return model;
}

int DevianceTable::suggested_k() const {
  if (rows.empty()) return 1;
  const double total = null_deviance - rows.back().deviance;
  if (!(total > 0.0)) return 1;
  int k_sel = 1;
  for (const DevianceRow& row : rows)
    if (row.reduction >= 0.02 * total) k_sel = std::max(k_sel, row.k);
  return k_sel;
}

DevianceTable deviance_reduction_table(const CountMatrix& counts, int k_max,
                                       const AmlConfig& base) {
  counts.validate();
  const Eigen::MatrixXd& y = counts.counts;
  const int n = int(y.rows());
  const int m = int(y.cols());
  if (k_max <= 0 || k_max > std::min(n, m))
    throw input_error("k_max must lie in 1..min(days, intervals)");

  DevianceTable table;
  const double grand_mean = std::max(y.mean(), kRateFloor);
  table.null_deviance =
      poisson_deviance(y, Eigen::MatrixXd::Constant(n, m, grand_mean));

  AmlConfig cfg = base;
  for (int k = 1; k <= k_max; ++k) {
    cfg.k = k;
    FactorModel fit;
    if (k == 1) {
      fit = fit_factor_model(counts, cfg);
    } else {
      // warm start: extend the previous fit by one loadings direction from
      // the link-scale residual, with the matching scores column at zero so
      // the starting deviance equals the previous fit's exactly
      const FactorModel& prev = table.models.back();
      const Eigen::MatrixXd resid =
          transformed_counts(y, cfg.link) -
          prev.scores * prev.loadings.transpose();
      Eigen::VectorXd seed = truncated_svd(resid, 1).v.col(0);
      // orthogonalize against the existing loadings for a well-posed design
      for (int c = 0; c < prev.loadings.cols(); ++c) {
        const Eigen::VectorXd fc = prev.loadings.col(c);
        const double nrm2 = fc.squaredNorm();
        if (nrm2 > 0) seed -= (fc.dot(seed) / nrm2) * fc;
      }
      if (seed.norm() < 1e-10) {
        // residual lies in the fitted span; fall back to the least-covered
        // coordinate direction
        Eigen::Index jmin = 0;
        prev.loadings.rowwise().norm().minCoeff(&jmin);
        seed = Eigen::VectorXd::Unit(m, jmin);
        for (int c = 0; c < prev.loadings.cols(); ++c) {
          const Eigen::VectorXd fc = prev.loadings.col(c);
          const double nrm2 = fc.squaredNorm();
          if (nrm2 > 0) seed -= (fc.dot(seed) / nrm2) * fc;
        }
      }
      if (seed.norm() < 1e-14)
        throw numeric_error("could not extend the loadings basis");
      seed.normalize();
      double scale = 1.0;
      if (cfg.normalization == Normalization::scores_orthonormal) {
        scale = prev.loadings.colwise().norm().minCoeff();
        if (!(scale > 0.0)) scale = 1.0;
      }
      Eigen::MatrixXd b0(n, k), f0(m, k);
      b0 << prev.scores, Eigen::VectorXd::Zero(n);
      f0 << prev.loadings, scale * seed;
      fit = fit_factor_model(counts, cfg, &b0, &f0);
    }
    const double prev_dev =
        k == 1 ? table.null_deviance : table.rows.back().deviance;
    table.rows.push_back({k, fit.deviance, prev_dev - fit.deviance});
    table.models.push_back(std::move(fit));
  }
  return table;
}

}  // namespace ratefactor
