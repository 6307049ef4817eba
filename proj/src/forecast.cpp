#include "ratefactor/score_model.hpp"

#include "ratefactor/rng.hpp"

namespace ratefactor {

RateForecast forecast_rates(const FactorModel& model, const ScoreModel& sm,
                            int horizon, int n_boot, std::uint64_t seed) {
  model.validate();
  if (sm.k() != model.k)
    throw input_error(
        "score model and factor model disagree on the number of factors");
  if (horizon < 1) throw input_error("forecast horizon must be at least 1");
  if (n_boot < 0) throw input_error("bootstrap size cannot be negative");

  const int m = model.intervals();
  const int k = model.k;

  RateForecast out;
  out.horizon = horizon;
  out.seed = seed;
  const Eigen::MatrixXd path = forecast_scores(sm, horizon);
  out.point_scores = path.row(horizon - 1).transpose();
  out.point_rates = apply_factor_model(out.point_scores.transpose(),
                                       model.loadings, model.link)
                        .row(0)
                        .transpose();

  if (n_boot == 0) {
    out.ensemble_scores.resize(0, 0);
    out.ensemble_rates.resize(0, 0);
    out.ensemble_counts.resize(0, 0);
    return out;
  }

  for (const ScoreAr& ar : sm.factors)
    if (ar.residuals.empty())
      throw input_error("score model has no residuals to resample");

  out.ensemble_scores.resize(n_boot, k);
  out.ensemble_rates.resize(n_boot, m);
  out.ensemble_counts.resize(n_boot, m);
  for (int b = 0; b < n_boot; ++b) {
    Rng rng(split_seed(seed, std::uint64_t(b)));
    Eigen::VectorXd state = sm.last_scores;
    int prev_day = sm.last_day;
    for (int step = 0; step < horizon; ++step) {
      Eigen::VectorXd next(k);
      for (int c = 0; c < k; ++c) {
        const ScoreAr& ar = sm.factors[std::size_t(c)];
        const double eps = ar.residuals[rng.index(ar.residuals.size())];
        next(c) = ar.intercepts[std::size_t(prev_day - 1)] +
                  ar.slope * state(c) + eps;
      }
      state = next;
      prev_day = next_weekday(prev_day);
    }
    out.ensemble_scores.row(b) = state.transpose();
    const Eigen::VectorXd rates =
        apply_factor_model(state.transpose(), model.loadings, model.link)
            .row(0)
            .transpose();
    out.ensemble_rates.row(b) = rates.transpose();
    for (int j = 0; j < m; ++j)
      out.ensemble_counts(b, j) = int(rng.poisson(rates(j)));
  }
  return out;
}

}  // namespace ratefactor
