#include "ratefactor/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "ratefactor/glm.hpp"
#include "ratefactor/quantile.hpp"
#include "ratefactor/rng.hpp"
#include "ratefactor/score_model.hpp"
#include "ratefactor/simgen.hpp"

namespace ratefactor {

namespace {

struct MethodSpec {
  std::string name;
  enum Kind { ts, pml, mul, add, hpm, hpa, oracle } kind;
  int k = 0;  // ts/pml only
};

MethodSpec parse_method(const std::string& name) {
  MethodSpec spec;
  spec.name = name;
  auto parse_k = [&name](std::size_t prefix) {
    const std::string digits = name.substr(prefix);
    if (digits.empty() ||
        digits.find_first_not_of("0123456789") != std::string::npos)
      throw input_error("method '" + name +
                        "' needs a positive factor count, e.g. TS2 or PML3");
    const int k = std::stoi(digits);
    if (k < 1)
      throw input_error("method '" + name +
                        "' needs a positive factor count, e.g. TS2 or PML3");
    return k;
  };
  if (name == "MUL") {
    spec.kind = MethodSpec::mul;
  } else if (name == "ADD") {
    spec.kind = MethodSpec::add;
  } else if (name == "HPM") {
    spec.kind = MethodSpec::hpm;
  } else if (name == "HPA") {
    spec.kind = MethodSpec::hpa;
  } else if (name == "ORACLE") {
    spec.kind = MethodSpec::oracle;
  } else if (name.rfind("PML", 0) == 0) {
    spec.kind = MethodSpec::pml;
    spec.k = parse_k(3);
  } else if (name.rfind("TS", 0) == 0) {
    spec.kind = MethodSpec::ts;
    spec.k = parse_k(2);
  } else {
    throw input_error(
        "unknown method '" + name +
        "'; expected TS<k>, PML<k>, MUL, ADD, HPM, HPA, or ORACLE");
  }
  return spec;
}

// One factor model plus its score recursion, advanced day by day.
struct TsState {
  FactorModel model;
  ScoreModel sm;
};

Eigen::VectorXd profile_from_scores(const FactorModel& model,
                                    const Eigen::VectorXd& scores) {
  return apply_factor_model(scores.transpose(), model.loadings, model.link)
      .row(0)
      .transpose();
}

// Project one realized day onto frozen loadings (used when not refitting).
Eigen::VectorXd project_day(const FactorModel& model,
                            const Eigen::VectorXd& day_counts,
                            const Eigen::VectorXd& fallback) {
  try {
    return fit_poisson_glm(day_counts, model.loadings, model.link, GlmConfig{},
                           &fallback)
        .beta;
  } catch (const std::exception&) {
    return fallback;
  }
}

double level_from_counts(const TwoWayFit& fit,
                         const Eigen::VectorXd& day_counts) {
  const Eigen::ArrayXd x = (day_counts.array() + 0.25).sqrt();
  if (fit.kind == TwoWayKind::mul) return x.sum();
  return x.mean() - fit.mean;
}

}  // namespace

Accuracy rmse_mre(const Eigen::VectorXd& forecast,
                  const Eigen::VectorXd& truth) {
  if (forecast.size() != truth.size() || forecast.size() == 0)
    throw input_error("forecast and truth must have the same nonzero length");
  Accuracy acc;
  acc.rmse = std::sqrt((forecast - truth).squaredNorm() / double(truth.size()));
  double sum = 0.0;
  for (Eigen::Index j = 0; j < truth.size(); ++j) {
    if (!(truth(j) > 0.0))
      throw input_error("relative error needs strictly positive truth values");
    sum += std::fabs(forecast(j) - truth(j)) / truth(j);
  }
  acc.mre = 100.0 * sum / double(truth.size());
  return acc;
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> xs) {
  if (xs.empty()) throw input_error("empirical CDF needs at least one sample");
  std::sort(xs.begin(), xs.end());
  std::vector<std::pair<double, double>> cdf;
  cdf.reserve(xs.size());
  const double n = double(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    cdf.emplace_back(xs[i], double(i + 1) / n);
  return cdf;
}

IntervalReport interval_report(const Eigen::VectorXd& lo,
                               const Eigen::VectorXd& hi,
                               const Eigen::VectorXd& truth) {
  if (lo.size() != truth.size() || hi.size() != truth.size() ||
      truth.size() == 0)
    throw input_error("band and truth lengths must match and be nonzero");
  int inside = 0;
  for (Eigen::Index j = 0; j < truth.size(); ++j)
    if (lo(j) <= truth(j) && truth(j) <= hi(j)) ++inside;
  IntervalReport rep;
  rep.coverage = double(inside) / double(truth.size());
  rep.mean_width = (hi - lo).mean();
  return rep;
}

std::map<std::pair<std::string, std::string>, MetricSummary>
MetricReport::summarize() const {
  std::map<std::pair<std::string, std::string>, std::vector<double>> buckets;
  for (const MetricRow& row : rows)
    buckets[{row.method, row.metric}].push_back(row.value);
  std::map<std::pair<std::string, std::string>, MetricSummary> out;
  for (auto& [key, values] : buckets) {
    MetricSummary s;
    s.n = int(values.size());
    s.mean = 0.0;
    for (double v : values) s.mean += v;
    s.mean /= double(values.size());
    s.median = quantile(values, 0.5);
    s.q1 = quantile(values, 0.25);
    s.q3 = quantile(values, 0.75);
    out.emplace(key, s);
  }
  return out;
}

std::vector<double> MetricReport::series(const std::string& method,
                                         const std::string& metric) const {
  std::vector<double> values;
  for (const MetricRow& row : rows)
    if (row.method == method && row.metric == metric)
      values.push_back(row.value);
  return values;
}

MetricReport run_rolling_exercise(const CountMatrix& counts,
                                  const Eigen::MatrixXd* true_rates,
                                  const RollingConfig& cfg) {
  counts.validate();
  const int n = counts.days();
  const int m = counts.intervals();
  if (cfg.train_window < kWeekdays + 3)
    throw input_error("train window too short for the day-ahead score model");
  if (cfg.test_days < 1) throw input_error("need at least one test day");
  if (cfg.train_window + cfg.test_days > n)
    throw input_error("panel too short: need train_window + test_days = " +
                      std::to_string(cfg.train_window + cfg.test_days) +
                      " days, got " + std::to_string(n));
  if (cfg.update_cut < 0 || cfg.update_cut >= m)
    throw input_error("update cut must lie in 0..intervals-1");
  if (cfg.mask_cut < 0 || cfg.mask_cut >= m)
    throw input_error("mask cut must lie in 0..intervals-1");
  if (cfg.methods.empty()) throw input_error("no methods requested");
  if (!cfg.staffing.has_value()) {
    if (true_rates == nullptr)
      throw input_error("rate metrics need the true rates; pass them or "
                        "switch to staffing mode");
    if (true_rates->rows() != n || true_rates->cols() != m)
      throw input_error("true-rate table shape does not match the panel");
  }
  if (cfg.n_boot < 0) throw input_error("bootstrap size cannot be negative");

  std::vector<MethodSpec> methods;
  std::set<std::string> seen;
  for (const std::string& name : cfg.methods)
    if (seen.insert(name).second) methods.push_back(parse_method(name));

  const int mask_start = std::max(cfg.update_cut, cfg.mask_cut);
  const int masked_width = m - mask_start;

  const bool need_mul =
      std::any_of(methods.begin(), methods.end(), [](const MethodSpec& s) {
        return s.kind == MethodSpec::mul || s.kind == MethodSpec::hpm;
      });
  const bool need_add =
      std::any_of(methods.begin(), methods.end(), [](const MethodSpec& s) {
        return s.kind == MethodSpec::add || s.kind == MethodSpec::hpa;
      });
  std::set<int> factor_ks;
  for (const MethodSpec& s : methods)
    if (s.kind == MethodSpec::ts || s.kind == MethodSpec::pml)
      factor_ks.insert(s.k);
  const bool has_pml =
      std::any_of(methods.begin(), methods.end(), [](const MethodSpec& s) {
        return s.kind == MethodSpec::pml;
      });

  const int t0 = n - cfg.test_days;

  MetricReport report;
  report.omega_used = cfg.update.omega;

  // resolve the anchor strength once, on the window before the first test day
  PenalizedUpdateConfig update_cfg = cfg.update;
  if (cfg.auto_omega && has_pml && cfg.update_cut > 0) {
    OmegaSearchConfig search = cfg.omega_search;
    if (search.cut == 0) search.cut = cfg.update_cut;
    search.fit = cfg.aml;
    search.fit.link = cfg.link;
    search.update = cfg.update;
    for (const MethodSpec& s : methods)
      if (s.kind == MethodSpec::pml) {
        search.fit.k = s.k;
        break;
      }
    if (search.fit_window + search.holdout_days > cfg.train_window)
      throw input_error(
          "anchor-strength search needs fit_window + holdout_days <= "
          "train_window");
    const CountMatrix history = counts.window(t0 - cfg.train_window,
                                              cfg.train_window);
    report.omega_used = select_omega(history, search).omega;
    update_cfg.omega = report.omega_used;
  }

  std::map<int, TsState> ts_states;
  TwoWayFit mul_fit, add_fit;
  bool fitted_once = false;

  for (int t = t0; t < n; ++t) {
    const CountMatrix train = counts.window(t - cfg.train_window,
                                            cfg.train_window);
    if (cfg.refit_each_day || !fitted_once) {
      ts_states.clear();
      for (int k : factor_ks) {
        AmlConfig aml = cfg.aml;
        aml.link = cfg.link;
        aml.k = k;
        TsState state;
        state.model = fit_factor_model(train, aml);
        state.sm = fit_score_model(state.model.scores, train.day_of_week);
        ts_states.emplace(k, std::move(state));
      }
      if (need_mul) mul_fit = fit_two_way_gaussian(train, TwoWayKind::mul);
      if (need_add) add_fit = fit_two_way_gaussian(train, TwoWayKind::add);
      fitted_once = true;
    }

    // intraday data for the scored day
    PartialDay partial;
    const bool updating = cfg.update_cut > 0;
    if (updating) {
      partial.m0 = cfg.update_cut;
      partial.early_counts =
          counts.counts.row(t).head(cfg.update_cut).transpose();
    }

    // truth for this day's masked intervals
    const Eigen::VectorXd realized =
        counts.counts.row(t).tail(masked_width).transpose();
    Eigen::VectorXd truth;
    StaffingPlan oracle_plan;
    if (cfg.staffing.has_value()) {
      oracle_plan =
          staffing_level(realized.cwiseMax(kRateFloor), *cfg.staffing);
    } else {
      truth = true_rates->row(t).tail(masked_width).transpose();
    }

    const std::uint64_t seed_day = split_seed(cfg.seed, std::uint64_t(t));

    // per-k day-ahead forecasts, shared between TS<k> and PML<k>
    std::map<int, RateForecast> ts_forecasts;
    int k_index = 0;
    for (int k : factor_ks) {
      ts_forecasts.emplace(
          k, forecast_rates(ts_states.at(k).model, ts_states.at(k).sm, 1,
                            cfg.n_boot,
                            split_seed(seed_day, std::uint64_t(2 * k_index))));
      ++k_index;
    }

    auto record = [&](const std::string& method, const char* metric,
                      double value) {
      report.rows.push_back({t, method, metric, value});
    };
    auto record_accuracy = [&](const std::string& method,
                               const Eigen::VectorXd& masked_forecast) {
      if (cfg.staffing.has_value()) {
        const StaffingPlan plan =
            staffing_level(masked_forecast.cwiseMax(kRateFloor), *cfg.staffing);
        const Accuracy acc = rmse_mre(plan.agents, oracle_plan.agents);
        record(method, "rmse", acc.rmse);
        record(method, "mre", acc.mre);
      } else {
        const Accuracy acc = rmse_mre(masked_forecast, truth);
        record(method, "rmse", acc.rmse);
        record(method, "mre", acc.mre);
      }
    };
    auto record_band = [&](const std::string& method,
                           const Eigen::MatrixXd& masked_ensemble) {
      IntervalReport rep;
      if (cfg.staffing.has_value()) {
        const StaffingPlan plan =
            staffing_level(masked_ensemble.cwiseMax(kRateFloor), *cfg.staffing,
                           0.95);
        rep = interval_report(plan.lo, plan.hi, oracle_plan.agents);
      } else {
        rep = interval_report(colwise_quantile(masked_ensemble, 0.025),
                              colwise_quantile(masked_ensemble, 0.975), truth);
      }
      record(method, "coverage", rep.coverage);
      record(method, "width", rep.mean_width);
    };

    int pml_index = 0;
    for (const MethodSpec& spec : methods) {
      switch (spec.kind) {
        case MethodSpec::ts: {
          const RateForecast& fc = ts_forecasts.at(spec.k);
          record_accuracy(spec.name,
                          fc.point_rates.tail(masked_width));
          if (cfg.n_boot > 0)
            record_band(spec.name,
                        fc.ensemble_rates.rightCols(masked_width));
          break;
        }
        case MethodSpec::pml: {
          const TsState& state = ts_states.at(spec.k);
          const RateForecast& fc = ts_forecasts.at(spec.k);
          ++pml_index;
          if (!updating) {
            // nothing observed yet: the update reduces to the base forecast
            record_accuracy(spec.name, fc.point_rates.tail(masked_width));
            if (cfg.n_boot > 0)
              record_band(spec.name,
                          fc.ensemble_rates.rightCols(masked_width));
            break;
          }
          const UpdatedForecast up = penalized_update(
              state.model, partial, fc.point_scores, update_cfg);
          record_accuracy(spec.name, up.latter_rates.tail(masked_width));
          if (cfg.n_boot > 0) {
            const UpdateEnsemble ens = one_step_bootstrap_update(
                state.model, partial, up, fc.ensemble_scores, update_cfg,
                split_seed(seed_day, std::uint64_t(100 + pml_index)));
            record_band(spec.name,
                        ens.latter_rates.rightCols(masked_width));
          }
          break;
        }
        case MethodSpec::mul:
        case MethodSpec::add: {
          const TwoWayFit& fit =
              spec.kind == MethodSpec::mul ? mul_fit : add_fit;
          record_accuracy(spec.name,
                          fit.forecast_rates(1).tail(masked_width));
          break;
        }
        case MethodSpec::hpm:
        case MethodSpec::hpa: {
          const TwoWayFit& fit =
              spec.kind == MethodSpec::hpm ? mul_fit : add_fit;
          const Eigen::VectorXd base = fit.forecast_rates(1);
          if (!updating) {
            record_accuracy(spec.name, base.tail(masked_width));
            break;
          }
          const VolumeScaledUpdate vs = hp_update(base, partial);
          record_accuracy(spec.name, vs.latter_rates.tail(masked_width));
          break;
        }
        case MethodSpec::oracle: {
          record_accuracy(spec.name, realized.cwiseMax(kRateFloor));
          break;
        }
      }
    }

    // advance frozen models past the day just scored
    if (!cfg.refit_each_day && t + 1 < n) {
      const Eigen::VectorXd day = counts.counts.row(t).transpose();
      for (auto& [k, state] : ts_states) {
        state.sm.last_scores =
            project_day(state.model, day, state.sm.last_scores);
        state.sm.last_day = counts.day_of_week[std::size_t(t)];
      }
      auto advance = [&](TwoWayFit& fit) {
        Eigen::VectorXd level(fit.level.size() + 1);
        level << fit.level, level_from_counts(fit, day);
        fit.level = level;
        fit.last_day = counts.day_of_week[std::size_t(t)];
      };
      if (need_mul) advance(mul_fit);
      if (need_add) advance(add_fit);
    }
  }
  return report;
}

}  // namespace ratefactor
