#include "ratefactor/glm.hpp"

#include <Eigen/QR>

#include <cmath>

#include "ratefactor/likelihood.hpp"
#include "ratefactor/types.hpp"

namespace ratefactor {

double glm_working_weight(Link link, double lambda) {
  switch (link) {
    case Link::identity:
      return 1.0 / lambda;
    case Link::log:
      return lambda;
    case Link::sqrt:
      // 1 / (Var * g'(lambda)^2) = 4 * lambda / lambda: constant by design
      return 4.0;
  }
  throw input_error("invalid link value");
}

namespace {

// |eta| floored away from zero (sign kept; 0 treated as +) so the sqrt-link
// working response (y - lambda) / (2 eta) stays finite.
double safe_eta(double eta) {
  constexpr double kEtaFloor = 1e-8;
  if (std::fabs(eta) >= kEtaFloor) return eta;
  return eta < 0.0 ? -kEtaFloor : kEtaFloor;
}

Eigen::VectorXd rates_of(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                         Link link) {
  const Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd lam(eta.size());
  for (int j = 0; j < eta.size(); ++j) lam(j) = link_inverse(link, eta(j));
  return lam;
}

}  // namespace

GlmFit fit_poisson_glm(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                       Link link, const GlmConfig& cfg,
                       const Eigen::VectorXd* init) {
  const int p = int(y.size());
  const int k = int(x.cols());
  if (p == 0 || k == 0 || x.rows() != p)
    throw input_error("glm design and response shapes disagree");
  if (p < k)
    throw input_error("glm needs at least as many observations as coefficients");
  for (int j = 0; j < p; ++j)
    if (!(y(j) >= 0.0) || !std::isfinite(y(j)))
      throw input_error("glm response must be nonnegative");

  Eigen::VectorXd beta;
  if (init && init->size() == k && init->allFinite()) {
    beta = *init;
  } else {
    // least squares of the shifted transformed response on the design
    Eigen::VectorXd eta0(p);
    const double shift = link_zero_shift(link);
    for (int j = 0; j < p; ++j) eta0(j) = link_forward(link, y(j) + shift);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < k) throw numeric_error("glm design is rank deficient");
    beta = qr.solve(eta0);
  }

  double dev = poisson_deviance(Eigen::VectorXd(y),
                                Eigen::VectorXd(rates_of(x, beta, link)));
  GlmFit best{beta, dev, 0, false};

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd w(p), z(p);
    for (int j = 0; j < p; ++j) {
      const double lam = link_inverse(link, eta(j));
      double wj = glm_working_weight(link, lam);
      if (wj < cfg.weight_floor) wj = cfg.weight_floor;
      w(j) = wj;
      switch (link) {
        case Link::identity:
          z(j) = y(j);
          break;
        case Link::log:
          z(j) = eta(j) + (y(j) - lam) / lam;
          break;
        case Link::sqrt:
          z(j) = safe_eta(eta(j)) + (y(j) - lam) / (2.0 * safe_eta(eta(j)));
          break;
      }
    }
    if (cfg.weight_observer) cfg.weight_observer(it, w);

    // weighted least squares via QR of sqrt(W) X
    const Eigen::VectorXd sw = w.cwiseSqrt();
    const Eigen::MatrixXd xs = sw.asDiagonal() * x;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
    if (qr.rank() < k)
      throw numeric_error("glm working design is rank deficient");
    Eigen::VectorXd beta_new = qr.solve((sw.array() * z.array()).matrix());
    if (!beta_new.allFinite())
      throw numeric_error("glm step produced non-finite coefficients");

    // step-halving keeps the deviance from increasing
    double dev_new = poisson_deviance(
        Eigen::VectorXd(y), Eigen::VectorXd(rates_of(x, beta_new, link)));
    for (int half = 0; half < 10 && dev_new > dev * (1.0 + 1e-12); ++half) {
      beta_new = 0.5 * (beta + beta_new);
      dev_new = poisson_deviance(
          Eigen::VectorXd(y), Eigen::VectorXd(rates_of(x, beta_new, link)));
    }
    if (dev_new > dev * (1.0 + 1e-12)) {
      // Stalled: the candidate is worse and halving could not fix it. If it
      // was within tolerance anyway the surface is flat here — converged.
      best.iterations = it;
      best.converged =
          std::fabs(dev - dev_new) / (std::fabs(dev) + 0.1) < cfg.tol;
      return best;
    }

    // Guarded relative change (saturated fits drive the deviance to zero,
    // where a bare ratio could never drop below tolerance).
    const double rel = std::fabs(dev - dev_new) / (std::fabs(dev_new) + 0.1);
    beta = beta_new;
    dev = dev_new;
    best = GlmFit{beta, dev, it, rel < cfg.tol};
    if (best.converged) return best;
  }
  return best;
}

}  // namespace ratefactor
