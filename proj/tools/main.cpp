// ratefactor: fit Poisson factor models to arrival-count panels, forecast
// daily rate profiles, update them from partial-day counts, convert rates to
// staffing levels, simulate benchmark data, and run rolling evaluations.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ratefactor/aml.hpp"
#include "ratefactor/csv.hpp"
#include "ratefactor/evaluate.hpp"
#include "ratefactor/intraday.hpp"
#include "ratefactor/model_io.hpp"
#include "ratefactor/score_model.hpp"
#include "ratefactor/simgen.hpp"
#include "ratefactor/staffing.hpp"
#include "ratefactor/types.hpp"

namespace rf = ratefactor;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::uint64_t seed = rf::kDefaultSeed;
  std::string link = "sqrt";
  std::string out;
  bool quiet = false;
  bool verbose = false;

  std::ostream& info() const {
    static std::ostringstream sink;
    if (quiet) {
      sink.str("");
      return sink;
    }
    return std::cout;
  }
};

// path with the final extension replaced by `suffix` (e.g. ".scores.json")
std::string sibling(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

std::vector<std::string> generated_labels(int m) {
  std::vector<std::string> labels;
  labels.reserve(std::size_t(m));
  for (int j = 1; j <= m; ++j) labels.push_back("i" + std::to_string(j));
  return labels;
}

// Interval index of a clock-time label: the cut m0 such that intervals
// 0..m0-1 precede the named interval.
int cut_from_label(const std::vector<std::string>& labels,
                   const std::string& time) {
  for (std::size_t j = 0; j < labels.size(); ++j)
    if (labels[j] == time) {
      if (j == 0)
        throw rf::input_error("cut time '" + time +
                              "' is the first interval; nothing observed yet");
      return int(j);
    }
  std::string example = labels.empty() ? "" : labels.front();
  throw rf::input_error("cut time '" + time +
                        "' is not an interval label (first label is '" +
                        example + "')");
}

double parse_omega(const std::string& text) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw rf::input_error("--omega must be a nonnegative number or 'auto', got '" +
                          text + "'");
  }
}

// ---------------------------------------------------------------- fit
struct FitOpts {
  std::string input;
  int factors = 0;
  int select_k = 0;
  std::string normalization = "scores-orthonormal";
  int max_iters = 100;
  double tol = 1e-7;
};

void cmd_fit(const Globals& g, const FitOpts& o) {
  if (g.out.empty()) throw rf::input_error("--out is required");
  if ((o.factors > 0) == (o.select_k > 0))
    throw rf::input_error("pass exactly one of --factors or --select-k");

  const rf::CountMatrix counts = rf::read_counts_csv(o.input);
  rf::AmlConfig cfg;
  cfg.link = rf::link_from_string(g.link);
  cfg.normalization = rf::normalization_from_string(o.normalization);
  cfg.max_outer_iters = o.max_iters;
  cfg.outer_tol = o.tol;

  rf::FactorModel model;
  if (o.select_k > 0) {
    cfg.k = 1;
    const rf::DevianceTable table =
        rf::deviance_reduction_table(counts, o.select_k, cfg);
    std::ostringstream csv;
    csv << "K,deviance,reduction\n";
    for (const rf::DevianceRow& row : table.rows)
      csv << row.k << ',' << rf::format_double(row.deviance) << ','
          << rf::format_double(row.reduction) << '\n';
    const std::string table_path = sibling(g.out, ".deviance.csv");
    rf::write_file_atomic(table_path, csv.str());
    const int chosen = table.suggested_k();
    g.info() << "null deviance " << rf::format_double(table.null_deviance)
             << "\n";
    for (const rf::DevianceRow& row : table.rows)
      g.info() << "K=" << row.k << "  deviance="
               << rf::format_double(row.deviance)
               << "  reduction=" << rf::format_double(row.reduction) << "\n";
    g.info() << "selected K=" << chosen << " (table written to " << table_path
             << ")\n";
    model = table.models[std::size_t(chosen - 1)];
  } else {
    cfg.k = o.factors;
    model = rf::fit_factor_model(counts, cfg);
  }

  for (const std::string& warning : model.warnings)
    std::cerr << "warning: " << warning << "\n";

  rf::FactorModelFile file;
  file.model = model;
  file.interval_labels = counts.interval_labels;
  rf::write_factor_model(file, g.out);

  const std::string scores_path = sibling(g.out, ".scores.json");
  try {
    const rf::ScoreModel sm =
        rf::fit_score_model(model.scores, counts.day_of_week);
    rf::write_score_model(sm, scores_path);
    g.info() << "wrote " << g.out << " and " << scores_path << "\n";
  } catch (const rf::input_error& e) {
    std::cerr << "warning: day-ahead score model not fitted (" << e.what()
              << "); forecasting from this model will not work\n";
    g.info() << "wrote " << g.out << "\n";
  }
  g.info() << "K=" << model.k << "  deviance="
           << rf::format_double(model.deviance) << "  iterations="
           << model.iterations << "  converged="
           << (model.converged ? "yes" : "no") << "\n";
}

// ---------------------------------------------------------------- forecast
struct ForecastOpts {
  std::string model;
  std::string scores;
  int horizon = 1;
  int bootstrap = 0;
  std::string ensemble_csv;
};

void cmd_forecast(const Globals& g, const ForecastOpts& o) {
  if (g.out.empty()) throw rf::input_error("--out is required");
  const rf::FactorModelFile mf = rf::read_factor_model(o.model);
  const std::string scores_path =
      o.scores.empty() ? sibling(o.model, ".scores.json") : o.scores;
  const rf::ScoreModel sm = rf::read_score_model(scores_path);

  const rf::RateForecast fc =
      rf::forecast_rates(mf.model, sm, o.horizon, o.bootstrap, g.seed);

  rf::ForecastFile file;
  file.forecast = fc;
  file.interval_labels = mf.interval_labels;
  rf::write_forecast(file, g.out);
  g.info() << "wrote " << g.out << " (horizon " << fc.horizon << ", "
           << fc.ensemble_rates.rows() << " bootstrap replicates)\n";

  if (!o.ensemble_csv.empty()) {
    if (fc.ensemble_rates.rows() == 0)
      throw rf::input_error("--ensemble-csv needs --bootstrap > 0");
    const std::vector<std::string> labels =
        mf.interval_labels.empty()
            ? generated_labels(mf.model.intervals())
            : mf.interval_labels;
    rf::write_ensemble_csv(fc.ensemble_rates, labels, o.ensemble_csv);
    g.info() << "wrote " << o.ensemble_csv << "\n";
  }
}

// ---------------------------------------------------------------- update
struct UpdateOpts {
  std::string model;
  std::string forecast;
  std::string partial;
  int cut = 0;
  std::string cut_time;
  std::string omega = "0";
  std::string baseline = "none";
  std::string history;
  int omega_holdout = 50;
  int omega_window = 100;
};

void cmd_update(const Globals& g, const UpdateOpts& o) {
  if (g.out.empty()) throw rf::input_error("--out is required");
  const rf::FactorModelFile mf = rf::read_factor_model(o.model);
  const rf::ForecastFile ff = rf::read_forecast(o.forecast);
  const rf::CountMatrix partial_csv = rf::read_counts_csv(o.partial);

  const int m = mf.model.intervals();
  if (partial_csv.days() != 1)
    throw rf::input_error("the partial-day file must contain exactly one row, got " +
                          std::to_string(partial_csv.days()));
  if (partial_csv.intervals() != m)
    throw rf::input_error("the partial-day file has " +
                          std::to_string(partial_csv.intervals()) +
                          " intervals but the model has " + std::to_string(m));
  if (!mf.interval_labels.empty() &&
      partial_csv.interval_labels != mf.interval_labels)
    throw rf::input_error(
        "the partial-day interval labels do not match the model's");

  if ((o.cut > 0) == (!o.cut_time.empty()))
    throw rf::input_error("pass exactly one of --cut or --cut-time");
  const int m0 =
      o.cut > 0 ? o.cut : cut_from_label(partial_csv.interval_labels, o.cut_time);

  rf::PartialDay partial;
  partial.m0 = m0;
  partial.early_counts = partial_csv.counts.row(0).head(m0).transpose();

  rf::PenalizedUpdateConfig cfg;
  if (o.omega == "auto") {
    if (o.history.empty())
      throw rf::input_error("--omega auto needs --history <counts.csv>");
    const rf::CountMatrix history = rf::read_counts_csv(o.history);
    rf::OmegaSearchConfig search;
    search.holdout_days = o.omega_holdout;
    search.fit_window = o.omega_window;
    search.cut = m0;
    search.fit.k = mf.model.k;
    search.fit.link = mf.model.link;
    search.fit.normalization = mf.model.normalization;
    const rf::OmegaSelection sel = rf::select_omega(history, search);
    cfg.omega = sel.omega;
    if (g.verbose)
      for (std::size_t i = 0; i < sel.grid.size(); ++i)
        std::cerr << "omega " << rf::format_double(sel.grid[i])
                  << "  mean count RMSE "
                  << rf::format_double(sel.mean_rmse[i]) << "\n";
    g.info() << "selected omega " << rf::format_double(cfg.omega) << "\n";
  } else {
    cfg.omega = parse_omega(o.omega);
  }

  const rf::UpdatedForecast up =
      rf::penalized_update(mf.model, partial, ff.forecast.point_scores, cfg);

  rf::UpdatedForecastFile out;
  out.update = up;
  out.seed = g.seed;
  if (ff.forecast.ensemble_scores.rows() > 0)
    out.ensemble = rf::one_step_bootstrap_update(
        mf.model, partial, up, ff.forecast.ensemble_scores, cfg, g.seed);
  if (o.baseline == "hp") {
    out.has_volume_scaled = true;
    out.volume_scaled = rf::hp_update(ff.forecast.point_rates, partial);
  } else if (o.baseline != "none") {
    throw rf::input_error("--baseline must be hp or none, got '" + o.baseline +
                          "'");
  }
  if (!mf.interval_labels.empty())
    out.interval_labels.assign(mf.interval_labels.begin() + m0,
                               mf.interval_labels.end());
  rf::write_updated_forecast(out, g.out);
  g.info() << "wrote " << g.out << " (cut " << m0 << ", omega "
           << rf::format_double(up.omega) << ", objective "
           << rf::format_double(up.objective) << ", "
           << (up.converged ? "converged" : "not converged") << ")\n";
}

// ---------------------------------------------------------------- staff
struct StaffOpts {
  std::string input;
  double service_rate = 0.0;
  double theta = 0.0;
  bool theta_set = false;
  double delay_prob = 0.0;
  bool delay_set = false;
  std::string round = "none";
};

void cmd_staff(const Globals& g, const StaffOpts& o) {
  if (g.out.empty()) throw rf::input_error("--out is required");
  if (o.theta_set == o.delay_set)
    throw rf::input_error("pass exactly one of --theta or --delay-prob");
  if (o.round != "none" && o.round != "ceil")
    throw rf::input_error("--round must be ceil or none, got '" + o.round + "'");
  const rf::Rounding rounding =
      o.round == "ceil" ? rf::Rounding::ceil : rf::Rounding::none;
  const rf::StaffingParams params =
      o.theta_set
          ? rf::StaffingParams::from_theta(o.service_rate, o.theta, rounding)
          : rf::StaffingParams::from_delay_prob(o.service_rate, o.delay_prob,
                                                rounding);

  // accept either a day-ahead forecast or an updated one
  Eigen::VectorXd rates;
  Eigen::MatrixXd ensemble;
  std::vector<std::string> labels;
  try {
    const rf::ForecastFile ff = rf::read_forecast(o.input);
    rates = ff.forecast.point_rates;
    ensemble = ff.forecast.ensemble_rates;
    labels = ff.interval_labels;
  } catch (const rf::input_error&) {
    const rf::UpdatedForecastFile uf = rf::read_updated_forecast(o.input);
    rates = uf.update.latter_rates;
    ensemble = uf.ensemble.latter_rates;
    labels = uf.interval_labels;
  }
  if (labels.empty()) labels = generated_labels(int(rates.size()));

  const rf::StaffingPlan plan = rf::staffing_level(rates, params);
  rf::StaffingPlan bands;
  const bool with_bands = ensemble.rows() > 0;
  if (with_bands) bands = rf::staffing_level(ensemble, params, 0.95);

  std::ostringstream csv;
  csv << "interval,offered_load,agents,lo95,hi95\n";
  for (Eigen::Index j = 0; j < rates.size(); ++j) {
    csv << labels[std::size_t(j)] << ','
        << rf::format_double(plan.offered_load(j)) << ','
        << rf::format_double(plan.agents(j)) << ',';
    if (with_bands)
      csv << rf::format_double(bands.lo(j)) << ','
          << rf::format_double(bands.hi(j));
    else
      csv << ',';
    csv << '\n';
  }
  rf::write_file_atomic(g.out, csv.str());
  g.info() << "wrote " << g.out << " (" << rates.size() << " intervals"
           << (with_bands ? ", with 95% bands" : "") << ")\n";
}

// ---------------------------------------------------------------- simulate
struct SimulateOpts {
  std::string model;
  std::string params;
  int days = 0;
  int start_day = 1;
};

void cmd_simulate(const Globals& g, const SimulateOpts& o) {
  if (g.out.empty()) throw rf::input_error("--out is required");
  if (o.days < 1) throw rf::input_error("--days must be at least 1");

  rf::SimResult result;
  if (o.model == "mul") {
    result = rf::generate_mul(rf::read_mul_params(o.params), o.days, g.seed,
                              o.start_day);
  } else if (o.model == "add") {
    result = rf::generate_add(rf::read_add_params(o.params), o.days, g.seed,
                              o.start_day);
  } else {
    throw rf::input_error("--model must be mul or add, got '" + o.model + "'");
  }

  rf::write_counts_csv(result.counts, g.out);
  rf::RatesCsv rates;
  rates.values = result.rates;
  rates.day_of_week = result.counts.day_of_week;
  rates.interval_labels = result.counts.interval_labels;
  rates.dates = result.counts.dates;
  const std::string rates_path = sibling(g.out, ".rates.csv");
  rf::write_rates_csv(rates, rates_path);

  if (result.clamped_cells > 0)
    std::cerr << "warning: " << result.clamped_cells
              << " cells clamped at the rate floor\n";
  g.info() << "wrote " << g.out << " and " << rates_path << " ("
           << result.counts.days() << " days x " << result.counts.intervals()
           << " intervals)\n";
}

// ---------------------------------------------------------------- evaluate
struct EvaluateOpts {
  std::string counts;
  std::string rates;
  std::string methods;
  int train_window = 150;
  int test_days = 50;
  int cut = 0;
  std::string cut_time;
  int mask_cut = 0;
  std::string mask_time;
  bool no_refit = false;
  std::string omega = "0";
  int omega_holdout = 50;
  int omega_window = 100;
  int bootstrap = 0;
  bool staffing = false;
  double service_rate = 1.0;
  double theta = 0.0;
  bool theta_set = false;
  double delay_prob = 0.0;
  bool delay_set = false;
  std::string round = "none";
};

void cmd_evaluate(const Globals& g, const EvaluateOpts& o) {
  if (g.out.empty()) throw rf::input_error("--out is required");
  const rf::CountMatrix counts = rf::read_counts_csv(o.counts);

  rf::RollingConfig cfg;
  cfg.train_window = o.train_window;
  cfg.test_days = o.test_days;
  cfg.refit_each_day = !o.no_refit;
  cfg.link = rf::link_from_string(g.link);
  cfg.n_boot = o.bootstrap;
  cfg.seed = g.seed;

  std::stringstream methods(o.methods);
  std::string method;
  while (std::getline(methods, method, ','))
    if (!method.empty()) cfg.methods.push_back(method);
  if (cfg.methods.empty())
    throw rf::input_error("--methods needs a comma-separated list, e.g. "
                          "TS4,PML4,MUL,HPM");

  if (o.cut > 0 && !o.cut_time.empty())
    throw rf::input_error("pass at most one of --cut or --cut-time");
  cfg.update_cut = !o.cut_time.empty()
                       ? cut_from_label(counts.interval_labels, o.cut_time)
                       : o.cut;
  if (o.mask_cut > 0 && !o.mask_time.empty())
    throw rf::input_error("pass at most one of --mask-cut or --mask-time");
  cfg.mask_cut = !o.mask_time.empty()
                     ? cut_from_label(counts.interval_labels, o.mask_time)
                     : o.mask_cut;

  if (o.omega == "auto") {
    cfg.auto_omega = true;
    cfg.omega_search.holdout_days = o.omega_holdout;
    cfg.omega_search.fit_window = o.omega_window;
  } else {
    cfg.update.omega = parse_omega(o.omega);
  }

  if (o.staffing) {
    if (o.theta_set == o.delay_set)
      throw rf::input_error(
          "staffing mode needs exactly one of --theta or --delay-prob");
    if (o.round != "none" && o.round != "ceil")
      throw rf::input_error("--round must be ceil or none");
    const rf::Rounding rounding =
        o.round == "ceil" ? rf::Rounding::ceil : rf::Rounding::none;
    cfg.staffing =
        o.theta_set
            ? rf::StaffingParams::from_theta(o.service_rate, o.theta, rounding)
            : rf::StaffingParams::from_delay_prob(o.service_rate, o.delay_prob,
                                                  rounding);
  }

  Eigen::MatrixXd true_rates;
  const Eigen::MatrixXd* rates_ptr = nullptr;
  if (!o.rates.empty()) {
    const rf::RatesCsv rates = rf::read_rates_csv(o.rates);
    true_rates = rates.values;
    rates_ptr = &true_rates;
  }

  const rf::MetricReport report =
      rf::run_rolling_exercise(counts, rates_ptr, cfg);

  std::ostringstream csv;
  csv << "replicate,day,method,metric,value\n";
  for (const rf::MetricRow& row : report.rows)
    csv << "1," << (row.day + 1) << ',' << row.method << ',' << row.metric
        << ',' << rf::format_double(row.value) << '\n';
  rf::write_file_atomic(g.out, csv.str());

  const auto summary = report.summarize();
  nlohmann::json sj;
  sj["omega_used"] = report.omega_used;
  sj["train_window"] = cfg.train_window;
  sj["test_days"] = cfg.test_days;
  sj["update_cut"] = cfg.update_cut;
  sj["mask_cut"] = cfg.mask_cut;
  sj["n_boot"] = cfg.n_boot;
  sj["seed"] = cfg.seed;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [key, s] : summary) {
    nlohmann::json row;
    row["method"] = key.first;
    row["metric"] = key.second;
    row["mean"] = s.mean;
    row["median"] = s.median;
    row["q1"] = s.q1;
    row["q3"] = s.q3;
    row["n"] = s.n;
    rows.push_back(std::move(row));
  }
  sj["summary"] = std::move(rows);
  const std::string summary_path = sibling(g.out, ".summary.json");
  rf::write_file_atomic(summary_path, sj.dump(2) + "\n");

  g.info() << "wrote " << g.out << " and " << summary_path << "\n";
  for (const auto& [key, s] : summary)
    g.info() << key.first << " " << key.second << ": mean "
             << rf::format_double(s.mean) << ", median "
             << rf::format_double(s.median) << " (n=" << s.n << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  Globals g;
  CLI::App app{
      "ratefactor: factor-model forecasting of within-day arrival-rate "
      "profiles, partial-day updating, and square-root safety staffing"};
  app.require_subcommand(1);
  app.add_option("--seed", g.seed,
                 "master seed for every randomized step (default 20230715)")
      ->capture_default_str();
  app.add_option("--link", g.link, "model link: identity, log, or sqrt")
      ->capture_default_str()
      ->check(CLI::IsMember({"identity", "log", "sqrt"}));
  app.add_option("--out", g.out, "primary output path");
  app.add_flag("--quiet", g.quiet, "suppress progress output");
  app.add_flag("--verbose", g.verbose, "extra diagnostics on stderr");

  FitOpts fit_opts;
  CLI::App* fit = app.add_subcommand(
      "fit", "fit a factor model to a counts CSV; writes the model JSON, its "
             "day-ahead score model (<out-stem>.scores.json), and, when "
             "selecting K, a deviance table CSV");
  fit->add_option("input", fit_opts.input, "counts CSV (date,dow,<labels...>)")
      ->required();
  fit->add_option("--factors", fit_opts.factors, "number of factors K");
  fit->add_option("--select-k", fit_opts.select_k,
                  "fit K = 1..Kmax and keep the suggested elbow");
  fit->add_option("--normalization", fit_opts.normalization,
                  "scores-orthonormal or loadings-orthonormal")
      ->capture_default_str();
  fit->add_option("--max-iters", fit_opts.max_iters,
                  "outer iteration limit")
      ->capture_default_str();
  fit->add_option("--tol", fit_opts.tol, "relative deviance tolerance")
      ->capture_default_str();

  ForecastOpts fc_opts;
  CLI::App* forecast = app.add_subcommand(
      "forecast", "day-ahead (or h-step) rate forecast from a fitted model");
  forecast->add_option("model", fc_opts.model, "model JSON from fit")
      ->required();
  forecast->add_option("--scores", fc_opts.scores,
                       "score-model JSON (default <model-stem>.scores.json)");
  forecast->add_option("--horizon", fc_opts.horizon, "days ahead")
      ->capture_default_str();
  forecast->add_option("--bootstrap", fc_opts.bootstrap,
                       "bootstrap replicates (0 = point forecast only)")
      ->capture_default_str();
  forecast->add_option("--ensemble-csv", fc_opts.ensemble_csv,
                       "also export the rate ensemble as CSV");

  UpdateOpts up_opts;
  CLI::App* update = app.add_subcommand(
      "update", "re-estimate a day's forecast from its first m0 counts, "
                "shrinking toward the day-ahead forecast");
  update->add_option("model", up_opts.model, "model JSON")->required();
  update->add_option("forecast", up_opts.forecast, "forecast JSON")->required();
  update->add_option("partial", up_opts.partial,
                     "one-row counts CSV with the day's observed intervals")
      ->required();
  update->add_option("--cut", up_opts.cut, "number of observed intervals m0");
  update->add_option("--cut-time", up_opts.cut_time,
                     "first unobserved interval label, e.g. 10:00 "
                     "(on a 07:00-start quarter-hour grid this is m0=12; "
                     "12:00 is m0=20)");
  update->add_option("--omega", up_opts.omega,
                     "anchor strength (>= 0) or 'auto'")
      ->capture_default_str();
  update->add_option("--baseline", up_opts.baseline,
                     "also write a volume-ratio update of the base forecast: "
                     "hp or none")
      ->capture_default_str();
  update->add_option("--history", up_opts.history,
                     "counts CSV used by --omega auto");
  update->add_option("--omega-holdout", up_opts.omega_holdout,
                     "holdout days for --omega auto")
      ->capture_default_str();
  update->add_option("--omega-window", up_opts.omega_window,
                     "per-day fit window for --omega auto")
      ->capture_default_str();

  StaffOpts staff_opts;
  CLI::App* staff = app.add_subcommand(
      "staff", "square-root safety staffing levels from a forecast "
               "(or updated forecast) JSON");
  staff->add_option("input", staff_opts.input, "forecast or updated JSON")
      ->required();
  staff->add_option("--service-rate", staff_opts.service_rate,
                    "calls served per interval per agent")
      ->required();
  CLI::Option* theta_opt =
      staff->add_option("--theta", staff_opts.theta, "safety parameter");
  CLI::Option* delay_opt = staff->add_option(
      "--delay-prob", staff_opts.delay_prob,
      "target delay probability in (0, 1]; 1 means no safety margin");
  theta_opt->excludes(delay_opt);
  staff->add_option("--round", staff_opts.round, "ceil or none")
      ->capture_default_str();

  SimulateOpts sim_opts;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "generate a synthetic counts CSV plus its hidden-truth "
                  "rates CSV (<out-stem>.rates.csv)");
  simulate->add_option("--model", sim_opts.model, "mul or add")->required();
  simulate->add_option("--params", sim_opts.params, "generator parameter JSON")
      ->required();
  simulate->add_option("--days", sim_opts.days, "days to generate")
      ->required();
  simulate->add_option("--start-day", sim_opts.start_day,
                       "weekday code of the first day (1=Mon .. 5=Fri)")
      ->capture_default_str();

  EvaluateOpts ev_opts;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "walk-forward comparison of forecasting methods; writes a "
                  "long-format metrics CSV and a summary JSON");
  evaluate->add_option("counts", ev_opts.counts, "counts CSV")->required();
  evaluate->add_option("rates", ev_opts.rates,
                       "hidden-truth rates CSV (required unless --staffing)");
  evaluate
      ->add_option("--methods", ev_opts.methods,
                   "comma-separated: TS<k>, PML<k>, MUL, ADD, HPM, HPA, ORACLE")
      ->required();
  evaluate->add_option("--train-window", ev_opts.train_window, "")
      ->capture_default_str();
  evaluate->add_option("--test-days", ev_opts.test_days, "")
      ->capture_default_str();
  evaluate->add_option("--cut", ev_opts.cut,
                       "observed intervals for updating methods");
  evaluate->add_option("--cut-time", ev_opts.cut_time,
                       "clock-time version of --cut");
  evaluate->add_option("--mask-cut", ev_opts.mask_cut,
                       "score only intervals >= max(this, --cut)");
  evaluate->add_option("--mask-time", ev_opts.mask_time,
                       "clock-time version of --mask-cut");
  evaluate->add_flag("--no-refit", ev_opts.no_refit,
                     "fit once on the first window instead of every day");
  evaluate->add_option("--omega", ev_opts.omega,
                       "anchor strength for PML methods, or 'auto'")
      ->capture_default_str();
  evaluate->add_option("--omega-holdout", ev_opts.omega_holdout, "")
      ->capture_default_str();
  evaluate->add_option("--omega-window", ev_opts.omega_window, "")
      ->capture_default_str();
  evaluate->add_option("--bootstrap", ev_opts.bootstrap,
                       "replicates for coverage/width metrics")
      ->capture_default_str();
  evaluate->add_flag("--staffing", ev_opts.staffing,
                     "compare staffing plans against the oracle plan");
  evaluate->add_option("--service-rate", ev_opts.service_rate, "")
      ->capture_default_str();
  CLI::Option* ev_theta =
      evaluate->add_option("--theta", ev_opts.theta, "");
  CLI::Option* ev_delay =
      evaluate->add_option("--delay-prob", ev_opts.delay_prob, "");
  ev_theta->excludes(ev_delay);
  evaluate->add_option("--round", ev_opts.round, "")->capture_default_str();

  for (CLI::App* sub : {fit, forecast, update, staff, simulate, evaluate})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  staff_opts.theta_set = theta_opt->count() > 0;
  staff_opts.delay_set = delay_opt->count() > 0;
  ev_opts.theta_set = ev_theta->count() > 0;
  ev_opts.delay_set = ev_delay->count() > 0;

  try {
    if (fit->parsed()) cmd_fit(g, fit_opts);
    if (forecast->parsed()) cmd_forecast(g, fc_opts);
    if (update->parsed()) cmd_update(g, up_opts);
    if (staff->parsed()) cmd_staff(g, staff_opts);
    if (simulate->parsed()) cmd_simulate(g, sim_opts);
    if (evaluate->parsed()) cmd_evaluate(g, ev_opts);
  } catch (const rf::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rf::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
