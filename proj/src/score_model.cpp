#include "ratefactor/score_model.hpp"

#include <boost/math/distributions/fisher_f.hpp>

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <string>

namespace ratefactor {

namespace {

const char* kDayNames[] = {"Monday", "Tuesday", "Wednesday", "Thursday",
                           "Friday"};

void check_series(Eigen::Index n, const std::vector<int>& day_of_week,
                  int min_days) {
  if (day_of_week.size() != std::size_t(n))
    throw input_error("day-of-week list does not match the number of days");
  if (n < min_days)
    throw input_error("need at least " + std::to_string(min_days) +
                      " days to fit the day-ahead score model, got " +
                      std::to_string(n));
  bool seen[kWeekdays] = {false, false, false, false, false};
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const int d = day_of_week[std::size_t(i)];
    if (!is_weekday_code(d))
      throw input_error("day-of-week codes must lie in 1..5");
    seen[d - 1] = true;
  }
  if (!is_weekday_code(day_of_week[std::size_t(n - 1)]))
    throw input_error("day-of-week codes must lie in 1..5");
  for (int d = 0; d < kWeekdays; ++d)
    if (!seen[d])
      throw input_error(std::string("no ") + kDayNames[d] +
                        " among the predictor days; every weekday must occur "
                        "before the final day");
}

struct Ols {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  double rss = 0.0;
};

Ols least_squares(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols())
    throw numeric_error("rank-deficient design in the score regression");
  Ols out;
  out.beta = qr.solve(y);
  out.residuals = y - x * out.beta;
  out.rss = out.residuals.squaredNorm();
  return out;
}

// Rows i = 2..n of: dummies of the previous day's weekday, then the previous
// day's value (one shared slope column, or five per-weekday slope columns).
Eigen::MatrixXd lag_design(const Eigen::VectorXd& series,
                           const std::vector<int>& day_of_week,
                           bool per_day_slopes) {
  const Eigen::Index n = series.size();
  const Eigen::Index rows = n - 1;
  const int cols = per_day_slopes ? 2 * kWeekdays : kWeekdays + 1;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int prev = day_of_week[std::size_t(i)];
    x(i, prev - 1) = 1.0;
    if (per_day_slopes)
      x(i, kWeekdays + prev - 1) = series(i);
    else
      x(i, kWeekdays) = series(i);
  }
  return x;
}

}  // namespace

ScoreModel fit_score_model(const Eigen::MatrixXd& scores,
                           const std::vector<int>& day_of_week) {
  const Eigen::Index n = scores.rows();
  check_series(n, day_of_week, kWeekdays + 3);
  if (scores.cols() < 1) throw input_error("score matrix has no columns");

  ScoreModel model;
  for (Eigen::Index kcol = 0; kcol < scores.cols(); ++kcol) {
    const Eigen::VectorXd series = scores.col(kcol);
    const Eigen::MatrixXd x = lag_design(series, day_of_week, false);
    const Eigen::VectorXd y = series.tail(n - 1);
    const Ols ols = least_squares(y, x);

    ScoreAr ar;
    for (int d = 0; d < kWeekdays; ++d) ar.intercepts[std::size_t(d)] = ols.beta(d);
    ar.slope = ols.beta(kWeekdays);
    ar.residuals.assign(ols.residuals.data(),
                        ols.residuals.data() + ols.residuals.size());
    const Eigen::Index dof = (n - 1) - (kWeekdays + 1);
    ar.residual_sd = dof > 0 ? std::sqrt(ols.rss / double(dof)) : 0.0;
    ar.nonstationary = std::fabs(ar.slope) >= 1.0;
    model.factors.push_back(std::move(ar));
  }
  model.last_scores = scores.row(n - 1).transpose();
  model.last_day = day_of_week[std::size_t(n - 1)];
  return model;
}

SlopeFTest nested_slope_f_test(const Eigen::VectorXd& series,
                               const std::vector<int>& day_of_week) {
  const Eigen::Index n = series.size();
  check_series(n, day_of_week, 2 * kWeekdays + 2);

  const Eigen::VectorXd y = series.tail(n - 1);
  const Ols small = least_squares(y, lag_design(series, day_of_week, false));
  const Ols big = least_squares(y, lag_design(series, day_of_week, true));

  SlopeFTest test;
  test.df1 = kWeekdays - 1;
  test.df2 = int(n) - 1 - 2 * kWeekdays;
  const double drop = std::max(small.rss - big.rss, 0.0);
  const double num = drop / test.df1;
  const double den = big.rss / test.df2;
  // Exact fits leave rounding junk, not zero, in the residual sum; judge
  // "zero" relative to the response's scale.
  const double exact = 1e-12 * (y.squaredNorm() + 1e-300);
  if (big.rss <= exact) {
    // the rich model fits exactly; any real leftover restricted misfit is
    // decisive, and matching rounding noise is not evidence at all
    test.f_stat = drop > exact ? std::numeric_limits<double>::infinity() : 0.0;
    test.p_value = drop > exact ? 0.0 : 1.0;
    return test;
  }
  test.f_stat = num / den;
  const boost::math::fisher_f dist(test.df1, test.df2);
  test.p_value = boost::math::cdf(boost::math::complement(dist, test.f_stat));
  return test;
}

Eigen::MatrixXd forecast_scores(const ScoreModel& model, int horizon) {
  if (horizon < 1) throw input_error("forecast horizon must be at least 1");
  if (model.factors.empty()) throw input_error("empty score model");
  const int k = model.k();
  if (model.last_scores.size() != k)
    throw input_error("score model state does not match its factor count");

  Eigen::MatrixXd path(horizon, k);
  Eigen::VectorXd state = model.last_scores;
  int prev_day = model.last_day;
  for (int step = 0; step < horizon; ++step) {
    for (int c = 0; c < k; ++c) {
      const ScoreAr& ar = model.factors[std::size_t(c)];
      path(step, c) =
          ar.intercepts[std::size_t(prev_day - 1)] + ar.slope * state(c);
    }
    state = path.row(step).transpose();
    prev_day = next_weekday(prev_day);
  }
  return path;
}

}  // namespace ratefactor
