#include "ratefactor/intraday.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <string>

#include "ratefactor/glm.hpp"
#include "ratefactor/rng.hpp"
#include "ratefactor/score_model.hpp"

namespace ratefactor {

namespace {

// Linear predictors numerically at zero make the curvature expansion blow
// up for the identity and square-root links; nudge them off zero the same
// way the scoring loop does.
double safe_predictor(Link link, double eta) {
  if (link == Link::log) return eta;
  constexpr double kMin = 1e-8;
  if (std::fabs(eta) >= kMin) return eta;
  return eta < 0.0 ? -kMin : kMin;
}

double clamped_rate(Link link, double eta) {
  return std::max(link_inverse(link, eta), kRateFloor);
}

// sum_j [ rate_j - y_j log rate_j ] + omega * ||beta - anchor||^2
double update_objective(const Eigen::MatrixXd& fe, const Eigen::VectorXd& y,
                        Link link, const Eigen::VectorXd& beta, double omega,
                        const Eigen::VectorXd& anchor) {
  const Eigen::VectorXd eta = fe * beta;
  double obj = 0.0;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const double lam = clamped_rate(link, eta(j));
    obj += lam - y(j) * std::log(lam);
  }
  obj += omega * (beta - anchor).squaredNorm();
  return obj;
}

void taylor_row(Link link, double y, double eta_raw, double floor_w,
                double* w, double* ystar) {
  const TaylorPoint t = taylor_weights(link, y, safe_predictor(link, eta_raw),
                                       floor_w);
  *w = t.w;
  *ystar = t.ystar;
}

}  // namespace

void PartialDay::validate(int m_total) const {
  if (m0 < 1 || m0 >= m_total)
    throw input_error("observed-interval count must lie in 1..intervals-1, got " +
                      std::to_string(m0) + " of " + std::to_string(m_total));
  if (early_counts.size() != m0)
    throw input_error("early counts length does not match the cut");
  for (Eigen::Index j = 0; j < early_counts.size(); ++j) {
    const double y = early_counts(j);
    if (!std::isfinite(y) || y < 0.0 || y != std::floor(y))
      throw input_error("early counts must be nonnegative integers");
  }
}

TaylorPoint taylor_weights(Link link, double y, double eta0,
                           double weight_floor) {
  if (!std::isfinite(y) || y < 0.0)
    throw input_error("count must be a finite nonnegative value");
  if (!std::isfinite(eta0))
    throw input_error("expansion point must be finite");
  if (weight_floor <= 0.0) throw input_error("weight floor must be positive");
  if (eta0 == 0.0 && link != Link::log)
    throw numeric_error(
        "cannot expand the early-count objective at a zero linear predictor");

  // w is half the curvature of rate - y*log(rate) in eta; fprime its slope.
  double w_raw, fprime;
  switch (link) {
    case Link::identity:
      w_raw = y / (2.0 * eta0 * eta0);
      fprime = 1.0 - y / eta0;
      break;
    case Link::sqrt:
      w_raw = 1.0 + y / (eta0 * eta0);
      fprime = 2.0 * eta0 - 2.0 * y / eta0;
      break;
    case Link::log: {
      const double lam = std::exp(eta0);
      w_raw = lam / 2.0;
      fprime = lam - y;
      break;
    }
    default:
      throw input_error("unknown link");
  }

  TaylorPoint out;
  if (w_raw >= weight_floor) {
    out.w = w_raw;
    out.ystar = eta0 - fprime / (2.0 * w_raw);
  } else {
    // keep the normal-equation product w*ystar exact while flooring w
    const double product = w_raw * eta0 - fprime / 2.0;
    out.w = weight_floor;
    out.ystar = product / weight_floor;
  }
  return out;
}

Eigen::VectorXd penalized_quadratic_step(const Eigen::MatrixXd& fe,
                                         const Eigen::VectorXd& w,
                                         const Eigen::VectorXd& ystar,
                                         double omega,
                                         const Eigen::VectorXd& anchor) {
  if (fe.rows() != w.size() || fe.rows() != ystar.size())
    throw input_error("weight and pseudo-response lengths must match the design");
  if (fe.cols() != anchor.size())
    throw input_error("anchor length must match the number of factors");
  if (!(omega >= 0.0) || !std::isfinite(omega))
    throw input_error("anchor strength must be finite and nonnegative");

  const Eigen::MatrixXd wfe = w.asDiagonal() * fe;
  Eigen::MatrixXd a = fe.transpose() * wfe;
  a.diagonal().array() += omega;
  const Eigen::VectorXd rhs =
      fe.transpose() * (w.array() * ystar.array()).matrix() + omega * anchor;

  const Eigen::VectorXd x = a.ldlt().solve(rhs);
  const double scale = 1.0 + rhs.norm() + a.norm() * x.norm();
  if (!x.allFinite() || (a * x - rhs).norm() > 1e-6 * scale)
    throw numeric_error("singular system in the early-count update step");
  return x;
}

UpdatedForecast penalized_update(const FactorModel& model,
                                 const PartialDay& partial,
                                 const Eigen::VectorXd& anchor,
                                 const PenalizedUpdateConfig& cfg) {
  model.validate();
  if (model.normalization != Normalization::scores_orthonormal)
    throw input_error(
        "the early-count update requires a scores-orthonormal model");
  const int m = model.intervals();
  const int k = model.k;
  partial.validate(m);
  if (anchor.size() != k)
    throw input_error("anchor length must match the number of factors");
  if (!(cfg.omega >= 0.0) || !std::isfinite(cfg.omega))
    throw input_error("anchor strength must be finite and nonnegative");

  const Eigen::MatrixXd fe = model.loadings.topRows(partial.m0);
  const Eigen::VectorXd& y = partial.early_counts;

  Eigen::VectorXd beta = anchor;
  if (partial.m0 >= k) {
    try {
      beta = fit_poisson_glm(y, fe, model.link, GlmConfig{}, &anchor).beta;
    } catch (const std::exception&) {
      beta = anchor;
    }
  }

  UpdatedForecast out;
  out.omega = cfg.omega;
  out.m0 = partial.m0;
  double obj = update_objective(fe, y, model.link, beta, cfg.omega, anchor);

  for (int it = 1; it <= cfg.max_iters; ++it) {
    Eigen::VectorXd w(partial.m0), ystar(partial.m0);
    const Eigen::VectorXd eta = fe * beta;
    for (int j = 0; j < partial.m0; ++j)
      taylor_row(model.link, y(j), eta(j), cfg.weight_floor, &w(j), &ystar(j));

    Eigen::VectorXd cand =
        penalized_quadratic_step(fe, w, ystar, cfg.omega, anchor);
    double obj_c = update_objective(fe, y, model.link, cand, cfg.omega, anchor);
    int halvings = 0;
    while ((!std::isfinite(obj_c) || obj_c > obj) && halvings < 10) {
      cand = 0.5 * (beta + cand);
      obj_c = update_objective(fe, y, model.link, cand, cfg.omega, anchor);
      ++halvings;
    }
    out.iterations = it;
    if (!std::isfinite(obj_c) || obj_c > obj) break;  // keep the last iterate

    const double rel = std::fabs(obj - obj_c) / (std::fabs(obj_c) + 1e-10);
    beta = cand;
    obj = obj_c;
    if (rel < cfg.tol) {
      out.converged = true;
      break;
    }
  }

  out.scores = beta;
  out.objective = obj;
  const Eigen::VectorXd eta_latter = model.loadings.bottomRows(m - partial.m0) * beta;
  out.latter_rates.resize(m - partial.m0);
  for (Eigen::Index j = 0; j < eta_latter.size(); ++j)
    out.latter_rates(j) = clamped_rate(model.link, eta_latter(j));
  return out;
}

UpdateEnsemble one_step_bootstrap_update(const FactorModel& model,
                                         const PartialDay& partial,
                                         const UpdatedForecast& point,
                                         const Eigen::MatrixXd& anchor_draws,
                                         const PenalizedUpdateConfig& cfg,
                                         std::uint64_t seed) {
  model.validate();
  const int m = model.intervals();
  const int k = model.k;
  partial.validate(m);
  if (point.scores.size() != k)
    throw input_error("point update does not match the model's factor count");
  if (anchor_draws.cols() != k)
    throw input_error("anchor draws must have one column per factor");

  const Eigen::MatrixXd fe = model.loadings.topRows(partial.m0);
  const Eigen::MatrixXd latter = model.loadings.bottomRows(m - partial.m0);
  const Eigen::VectorXd& y = partial.early_counts;

  // freeze the expansion at the point solution
  Eigen::VectorXd w(partial.m0), ystar(partial.m0);
  const Eigen::VectorXd eta = fe * point.scores;
  for (int j = 0; j < partial.m0; ++j)
    taylor_row(model.link, y(j), eta(j), cfg.weight_floor, &w(j), &ystar(j));

  const int n_boot = int(anchor_draws.rows());
  UpdateEnsemble out;
  out.scores.resize(n_boot, k);
  out.latter_rates.resize(n_boot, m - partial.m0);
  out.latter_counts.resize(n_boot, m - partial.m0);
  for (int b = 0; b < n_boot; ++b) {
    const Eigen::VectorXd anchor_b = anchor_draws.row(b).transpose();
    const Eigen::VectorXd beta =
        penalized_quadratic_step(fe, w, ystar, cfg.omega, anchor_b);
    out.scores.row(b) = beta.transpose();
    const Eigen::VectorXd eta_latter = latter * beta;
    Rng rng(split_seed(seed, std::uint64_t(b)));
    for (Eigen::Index j = 0; j < eta_latter.size(); ++j) {
      const double lam = clamped_rate(model.link, eta_latter(j));
      out.latter_rates(b, j) = lam;
      out.latter_counts(b, j) = int(rng.poisson(lam));
    }
  }
  return out;
}

VolumeScaledUpdate hp_update(const Eigen::VectorXd& base_rates,
                             const PartialDay& partial) {
  const int m = int(base_rates.size());
  partial.validate(m);
  for (Eigen::Index j = 0; j < base_rates.size(); ++j)
    if (!std::isfinite(base_rates(j)) || base_rates(j) <= 0.0)
      throw input_error("base rates must be strictly positive");

  const double forecast_volume = base_rates.head(partial.m0).sum();
  const double observed_volume = partial.early_counts.sum();

  VolumeScaledUpdate out;
  out.ratio = observed_volume / forecast_volume;
  out.latter_rates = (out.ratio * base_rates.tail(m - partial.m0))
                         .cwiseMax(kRateFloor);
  return out;
}

OmegaSelection select_omega(const CountMatrix& history,
                            const OmegaSearchConfig& cfg) {
  history.validate();
  const int n = history.days();
  const int m = history.intervals();
  if (cfg.cut < 1 || cfg.cut >= m)
    throw input_error("update cut must lie in 1..intervals-1");
  if (cfg.holdout_days < 1) throw input_error("need at least one holdout day");
  if (cfg.fit_window < kWeekdays + 3)
    throw input_error("fit window too short for the day-ahead score model");
  if (n < cfg.fit_window + cfg.holdout_days)
    throw input_error("history too short: need fit_window + holdout_days = " +
                      std::to_string(cfg.fit_window + cfg.holdout_days) +
                      " days, got " + std::to_string(n));

  std::vector<double> grid = cfg.grid;
  if (grid.empty()) {
    grid.push_back(0.0);
    for (int p = 1; p <= 9; ++p) grid.push_back(std::pow(10.0, p));
  }
  std::sort(grid.begin(), grid.end());
  for (double g : grid)
    if (!(g >= 0.0) || !std::isfinite(g))
      throw input_error("anchor-strength grid values must be finite and >= 0");

  std::vector<double> total_rmse(grid.size(), 0.0);
  for (int t = n - cfg.holdout_days; t < n; ++t) {
    const CountMatrix train = history.window(t - cfg.fit_window, cfg.fit_window);
    const FactorModel model = fit_factor_model(train, cfg.fit);
    const ScoreModel sm = fit_score_model(model.scores, train.day_of_week);
    const RateForecast fc = forecast_rates(model, sm, 1, 0, 0);

    PartialDay partial;
    partial.m0 = cfg.cut;
    partial.early_counts = history.counts.row(t).head(cfg.cut).transpose();
    const Eigen::VectorXd truth =
        history.counts.row(t).tail(m - cfg.cut).transpose();

    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      PenalizedUpdateConfig ucfg = cfg.update;
      ucfg.omega = grid[gi];
      const UpdatedForecast up =
          penalized_update(model, partial, fc.point_scores, ucfg);
      total_rmse[gi] +=
          std::sqrt((up.latter_rates - truth).squaredNorm() / double(m - cfg.cut));
    }
  }

  OmegaSelection sel;
  sel.grid = grid;
  sel.mean_rmse.resize(grid.size());
  std::size_t best = 0;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    sel.mean_rmse[gi] = total_rmse[gi] / cfg.holdout_days;
    if (sel.mean_rmse[gi] < sel.mean_rmse[best]) best = gi;
  }
  sel.omega = grid[best];
  return sel;
}

}  // namespace ratefactor
