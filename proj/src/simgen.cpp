#include "ratefactor/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "ratefactor/rng.hpp"

namespace ratefactor {

namespace {

const char* kDayNames[] = {"Monday", "Tuesday", "Wednesday", "Thursday",
                           "Friday"};

void check_level(const DayLevelAr& level) {
  for (double v : level.day_means)
    if (!std::isfinite(v)) throw input_error("day-level means must be finite");
  if (!std::isfinite(level.slope) || std::fabs(level.slope) >= 1.0)
    throw input_error("day-level slope must satisfy |slope| < 1");
  if (!std::isfinite(level.noise_sd) || level.noise_sd < 0.0)
    throw input_error("day-level noise sd must be nonnegative");
}

void check_labels(const std::vector<std::string>& labels, Eigen::Index m) {
  if (!labels.empty() && labels.size() != std::size_t(m))
    throw input_error("interval label count does not match the profile width");
}

std::vector<std::string> default_labels(int m,
                                        const std::vector<std::string>& given) {
  if (!given.empty()) return given;
  std::vector<std::string> labels;
  labels.reserve(std::size_t(m));
  for (int j = 1; j <= m; ++j) labels.push_back("i" + std::to_string(j));
  return labels;
}

// Weekday-mean AR(1) level path from its stationary law; one normal draw per
// day, always consumed so the random stream layout is fixed.
double level_step(const DayLevelAr& ar, Rng& rng, bool first, int dow,
                  int prev_dow, double prev_level) {
  const double innovation_sd =
      first ? ar.noise_sd / std::sqrt(1.0 - ar.slope * ar.slope)
            : ar.noise_sd;
  const double noise = rng.normal(0.0, innovation_sd);
  const double mean = ar.day_means[std::size_t(dow - 1)];
  if (first) return mean + noise;
  const double prev_dev =
      prev_level - ar.day_means[std::size_t(prev_dow - 1)];
  return mean + ar.slope * prev_dev + noise;
}

SimResult run_generator(int days, std::uint64_t seed, int start_day,
                        const DayLevelAr& level,
                        const std::vector<std::string>& labels, int m,
                        // sqrt-rate of interval j given the day's level
                        const std::function<double(double, int, int)>& sqrt_rate) {
  if (days < 1) throw input_error("need at least one day to generate");
  if (!is_weekday_code(start_day))
    throw input_error("start day must be a weekday code in 1..5");

  SimResult out;
  out.counts.counts.resize(days, m);
  out.rates.resize(days, m);
  out.counts.day_of_week.resize(std::size_t(days));
  out.counts.dates.reserve(std::size_t(days));
  out.counts.interval_labels = labels;

  const double sqrt_floor = std::sqrt(kRateFloor);
  Rng rng(seed);
  int dow = start_day;
  double lvl = 0.0;
  for (int i = 0; i < days; ++i) {
    const int prev_dow = i == 0 ? dow : out.counts.day_of_week[std::size_t(i - 1)];
    lvl = level_step(level, rng, i == 0, dow, prev_dow, lvl);
    out.counts.day_of_week[std::size_t(i)] = dow;
    out.counts.dates.push_back("day" + std::to_string(i + 1));
    for (int j = 0; j < m; ++j) {
      double s = sqrt_rate(lvl, dow, j);
      if (s < sqrt_floor) {
        s = sqrt_floor;
        ++out.clamped_cells;
      }
      const double rate = s * s;
      out.rates(i, j) = rate;
      out.counts.counts(i, j) = double(rng.poisson(rate));
    }
    dow = next_weekday(dow);
  }
  return out;
}

int fitted_slope_and_means(const Eigen::VectorXd& level,
                           const std::vector<int>& dow,
                           std::array<double, 5>* means, double* slope) {
  const Eigen::Index n = level.size();
  std::array<double, 5> sums{};
  std::array<int, 5> counts{};
  for (Eigen::Index i = 0; i < n; ++i) {
    sums[std::size_t(dow[std::size_t(i)] - 1)] += level(i);
    ++counts[std::size_t(dow[std::size_t(i)] - 1)];
  }
  for (int d = 0; d < kWeekdays; ++d) {
    if (counts[std::size_t(d)] == 0)
      throw input_error(std::string("no ") + kDayNames[d] +
                        " in the panel; every weekday must occur");
    (*means)[std::size_t(d)] = sums[std::size_t(d)] / counts[std::size_t(d)];
  }
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double d_prev =
        level(i - 1) - (*means)[std::size_t(dow[std::size_t(i - 1)] - 1)];
    const double d_cur =
        level(i) - (*means)[std::size_t(dow[std::size_t(i)] - 1)];
    num += d_cur * d_prev;
    den += d_prev * d_prev;
  }
  *slope = den > 0.0 ? num / den : 0.0;
  *slope = std::clamp(*slope, -0.999, 0.999);
  return int(n);
}

}  // namespace

void MulParams::validate() const {
  check_level(level);
  if (day_profiles.rows() != kWeekdays || day_profiles.cols() < 1)
    throw input_error("day profiles must be a 5 x m matrix with m >= 1");
  if (!day_profiles.allFinite())
    throw input_error("day profiles must be finite");
  if ((day_profiles.array() < 0.0).any())
    throw input_error("day profiles must be nonnegative");
  for (int d = 0; d < kWeekdays; ++d) {
    const double sum = day_profiles.row(d).sum();
    if (std::fabs(sum - 1.0) >
        1e-6 * (1.0 + day_profiles.row(d).cwiseAbs().sum()))
      throw input_error(std::string("profile row for ") + kDayNames[d] +
                        " must sum to 1");
  }
  check_labels(interval_labels, day_profiles.cols());
}

void AddParams::validate() const {
  check_level(level);
  if (!std::isfinite(mean)) throw input_error("overall mean must be finite");
  const Eigen::Index m = interval_effects.size();
  if (m < 1) throw input_error("need at least one interval effect");
  if (!interval_effects.allFinite() || !interactions.allFinite())
    throw input_error("effects must be finite");
  if (interactions.rows() != kWeekdays || interactions.cols() != m)
    throw input_error("interaction grid must be 5 x m");
  const double scale = 1.0 + interval_effects.cwiseAbs().sum() +
                       interactions.cwiseAbs().sum();
  if (std::fabs(interval_effects.sum()) > 1e-6 * scale)
    throw input_error("interval effects must sum to 0");
  for (int d = 0; d < kWeekdays; ++d)
    if (std::fabs(interactions.row(d).sum()) > 1e-6 * scale)
      throw input_error(std::string("interaction row for ") + kDayNames[d] +
                        " must sum to 0");
  for (Eigen::Index j = 0; j < m; ++j)
    if (std::fabs(interactions.col(j).sum()) > 1e-6 * scale)
      throw input_error("interaction columns must sum to 0");
  check_labels(interval_labels, m);
}

SimResult generate_mul(const MulParams& params, int days, std::uint64_t seed,
                       int start_day) {
  params.validate();
  const int m = int(params.day_profiles.cols());
  return run_generator(
      days, seed, start_day, params.level,
      default_labels(m, params.interval_labels), m,
      [&params](double lvl, int dow, int j) {
        return lvl * params.day_profiles(dow - 1, j);
      });
}

SimResult generate_add(const AddParams& params, int days, std::uint64_t seed,
                       int start_day) {
  params.validate();
  const int m = int(params.interval_effects.size());
  return run_generator(
      days, seed, start_day, params.level,
      default_labels(m, params.interval_labels), m,
      [&params](double lvl, int dow, int j) {
        return params.mean + lvl + params.interval_effects(j) +
               params.interactions(dow - 1, j);
      });
}

TwoWayFit fit_two_way_gaussian(const CountMatrix& counts, TwoWayKind kind) {
  counts.validate();
  const int n = counts.days();
  const int m = counts.intervals();
  if (n < 15)
    throw input_error("need at least 15 days to fit a two-way baseline, got " +
                      std::to_string(n));

  const Eigen::MatrixXd x =
      (counts.counts.array() + 0.25).sqrt().matrix();

  TwoWayFit fit;
  fit.kind = kind;
  fit.last_day = counts.day_of_week[std::size_t(n - 1)];

  if (kind == TwoWayKind::mul) {
    fit.level = x.rowwise().sum();
    fit.profiles = Eigen::MatrixXd::Zero(kWeekdays, m);
    Eigen::VectorXd level_sum = Eigen::VectorXd::Zero(kWeekdays);
    for (int i = 0; i < n; ++i) {
      const int d = counts.day_of_week[std::size_t(i)] - 1;
      fit.profiles.row(d) += x.row(i);
      level_sum(d) += fit.level(i);
    }
    for (int d = 0; d < kWeekdays; ++d) {
      if (level_sum(d) <= 0.0)
        throw input_error(std::string("no ") + kDayNames[d] +
                          " in the panel; every weekday must occur");
      fit.profiles.row(d) /= level_sum(d);
    }
  } else {
    fit.mean = x.mean();
    const Eigen::VectorXd day_effects =
        x.rowwise().mean().array() - fit.mean;
    fit.interval_effects = x.colwise().mean().transpose().array() - fit.mean;
    fit.interactions = Eigen::MatrixXd::Zero(kWeekdays, m);
    Eigen::VectorXi per_day = Eigen::VectorXi::Zero(kWeekdays);
    for (int i = 0; i < n; ++i) {
      const int d = counts.day_of_week[std::size_t(i)] - 1;
      fit.interactions.row(d) +=
          (x.row(i).array() - (fit.mean + day_effects(i))).matrix() -
          fit.interval_effects.transpose();
      ++per_day(d);
    }
    for (int d = 0; d < kWeekdays; ++d) {
      if (per_day(d) == 0)
        throw input_error(std::string("no ") + kDayNames[d] +
                          " in the panel; every weekday must occur");
      fit.interactions.row(d) /= double(per_day(d));
    }
    // double-center so columns also sum to zero
    const Eigen::RowVectorXd column_means = fit.interactions.colwise().mean();
    fit.interactions.rowwise() -= column_means;
    fit.level = day_effects;
  }

  fitted_slope_and_means(fit.level, counts.day_of_week, &fit.level_means,
                         &fit.level_slope);
  return fit;
}

Eigen::VectorXd TwoWayFit::forecast_rates(int horizon) const {
  if (horizon < 1) throw input_error("forecast horizon must be at least 1");
  if (level.size() < 1) throw input_error("empty baseline fit");

  double state = level(level.size() - 1);
  int prev_day = last_day;
  int day = prev_day;
  for (int step = 0; step < horizon; ++step) {
    day = next_weekday(prev_day);
    state = level_means[std::size_t(day - 1)] +
            level_slope *
                (state - level_means[std::size_t(prev_day - 1)]);
    prev_day = day;
  }

  const int m = kind == TwoWayKind::mul ? int(profiles.cols())
                                        : int(interval_effects.size());
  Eigen::VectorXd rates(m);
  for (int j = 0; j < m; ++j) {
    const double s = kind == TwoWayKind::mul
                         ? state * profiles(day - 1, j)
                         : mean + state + interval_effects(j) +
                               interactions(day - 1, j);
    rates(j) = std::max(s * s, kRateFloor);
  }
  return rates;
}

}  // namespace ratefactor
