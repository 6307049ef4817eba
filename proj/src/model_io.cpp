#include "ratefactor/model_io.hpp"

#include <json.hpp>

#include <fstream>

#include "ratefactor/csv.hpp"
#include "ratefactor/quantile.hpp"

namespace ratefactor {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw input_error("cannot parse " + path + ": " + e.what());
  }
}

void dump_json(const json& j, const std::string& path) {
  write_file_atomic(path, j.dump(2) + "\n");
}

json flat(const Eigen::MatrixXd& m) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

json flat(const Eigen::MatrixXi& m) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

json to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from(const json& j, const std::string& path,
                            const char* key) {
  if (!j.is_array())
    throw input_error(path + ": '" + key + "' must be an array of numbers");
  Eigen::VectorXd v(Eigen::Index(j.size()));
  Eigen::Index i = 0;
  for (const json& x : j) {
    if (!x.is_number())
      throw input_error(path + ": '" + key + "' must hold numbers only");
    v(i++) = x.get<double>();
  }
  return v;
}

// Flat row-major array whose width is known; rows are inferred.
Eigen::MatrixXd matrix_from(const json& j, Eigen::Index cols,
                            const std::string& path, const char* key) {
  const Eigen::VectorXd v = vector_from(j, path, key);
  if (cols <= 0 || v.size() % cols != 0)
    throw input_error(path + ": '" + key + "' length " +
                      std::to_string(v.size()) +
                      " is not a multiple of the expected width " +
                      std::to_string(cols));
  const Eigen::Index rows = v.size() / cols;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = v(i * cols + c);
  return m;
}

Eigen::MatrixXi int_matrix_from(const json& j, Eigen::Index cols,
                                const std::string& path, const char* key) {
  const Eigen::MatrixXd m = matrix_from(j, cols, path, key);
  return m.cast<int>();
}

const json& require(const json& j, const char* key, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end())
    throw input_error(path + ": missing key '" + key + "'");
  return *it;
}

std::vector<std::string> labels_from(const json& j, const std::string& path) {
  std::vector<std::string> labels;
  const auto it = j.find("interval_labels");
  if (it == j.end()) return labels;
  if (!it->is_array())
    throw input_error(path + ": 'interval_labels' must be an array");
  for (const json& x : *it) {
    if (!x.is_string())
      throw input_error(path + ": 'interval_labels' must hold strings");
    labels.push_back(x.get<std::string>());
  }
  return labels;
}

json level_to_json(const DayLevelAr& level) {
  json j;
  j["day_means"] = level.day_means;
  j["slope"] = level.slope;
  j["noise_sd"] = level.noise_sd;
  return j;
}

DayLevelAr level_from_json(const json& j, const std::string& path) {
  DayLevelAr level;
  const Eigen::VectorXd means =
      vector_from(require(j, "day_means", path), path, "day_means");
  if (means.size() != kWeekdays)
    throw input_error(path + ": 'day_means' must have 5 entries");
  for (int d = 0; d < kWeekdays; ++d) level.day_means[std::size_t(d)] = means(d);
  level.slope = require(j, "slope", path).get<double>();
  level.noise_sd = require(j, "noise_sd", path).get<double>();
  return level;
}

}  // namespace

void write_factor_model(const FactorModelFile& file, const std::string& path) {
  file.model.validate();
  json j;
  j["link"] = to_string(file.model.link);
  j["k"] = file.model.k;
  j["normalization"] = to_string(file.model.normalization);
  j["scores"] = flat(file.model.scores);
  j["loadings"] = flat(file.model.loadings);
  j["deviance"] = file.model.deviance;
  if (!file.interval_labels.empty())
    j["interval_labels"] = file.interval_labels;
  dump_json(j, path);
}

FactorModelFile read_factor_model(const std::string& path) {
  const json j = load_json(path);
  FactorModelFile file;
  file.model.link =
      link_from_string(require(j, "link", path).get<std::string>());
  file.model.k = require(j, "k", path).get<int>();
  file.model.normalization = normalization_from_string(
      require(j, "normalization", path).get<std::string>());
  if (file.model.k <= 0)
    throw input_error(path + ": 'k' must be positive");
  file.model.scores =
      matrix_from(require(j, "scores", path), file.model.k, path, "scores");
  file.model.loadings =
      matrix_from(require(j, "loadings", path), file.model.k, path, "loadings");
  file.model.deviance = require(j, "deviance", path).get<double>();
  file.interval_labels = labels_from(j, path);
  if (!file.interval_labels.empty() &&
      file.interval_labels.size() != std::size_t(file.model.intervals()))
    throw input_error(path + ": label count does not match the loadings");
  file.model.validate();
  return file;
}

void write_score_model(const ScoreModel& model, const std::string& path) {
  json factors = json::array();
  for (const ScoreAr& ar : model.factors) {
    json f;
    f["intercepts"] = ar.intercepts;
    f["slope"] = ar.slope;
    f["residuals"] = ar.residuals;
    f["residual_sd"] = ar.residual_sd;
    f["nonstationary"] = ar.nonstationary;
    factors.push_back(std::move(f));
  }
  json j;
  j["factors"] = std::move(factors);
  j["last_scores"] = to_json(model.last_scores);
  j["last_day"] = model.last_day;
  dump_json(j, path);
}

ScoreModel read_score_model(const std::string& path) {
  const json j = load_json(path);
  ScoreModel model;
  const json& factors = require(j, "factors", path);
  if (!factors.is_array() || factors.empty())
    throw input_error(path + ": 'factors' must be a nonempty array");
  for (const json& f : factors) {
    ScoreAr ar;
    const Eigen::VectorXd icpt =
        vector_from(require(f, "intercepts", path), path, "intercepts");
    if (icpt.size() != kWeekdays)
      throw input_error(path + ": 'intercepts' must have 5 entries");
    for (int d = 0; d < kWeekdays; ++d) ar.intercepts[std::size_t(d)] = icpt(d);
    ar.slope = require(f, "slope", path).get<double>();
    const Eigen::VectorXd res =
        vector_from(require(f, "residuals", path), path, "residuals");
    ar.residuals.assign(res.data(), res.data() + res.size());
    ar.residual_sd = require(f, "residual_sd", path).get<double>();
    ar.nonstationary = require(f, "nonstationary", path).get<bool>();
    model.factors.push_back(std::move(ar));
  }
  model.last_scores =
      vector_from(require(j, "last_scores", path), path, "last_scores");
  model.last_day = require(j, "last_day", path).get<int>();
  if (model.last_scores.size() != model.k())
    throw input_error(path + ": 'last_scores' must have one entry per factor");
  if (!is_weekday_code(model.last_day))
    throw input_error(path + ": 'last_day' must be a weekday code in 1..5");
  return model;
}

void write_forecast(const ForecastFile& file, const std::string& path) {
  const RateForecast& fc = file.forecast;
  json j;
  j["horizon"] = fc.horizon;
  j["seed"] = fc.seed;
  j["point_scores"] = to_json(fc.point_scores);
  j["point_rates"] = to_json(fc.point_rates);
  j["n_boot"] = int(fc.ensemble_rates.rows());
  j["ensemble_scores"] = flat(fc.ensemble_scores);
  j["ensemble_rates"] = flat(fc.ensemble_rates);
  j["ensemble_counts"] = flat(fc.ensemble_counts);
  if (fc.ensemble_rates.rows() > 0) {
    json q;
    q["p05"] = to_json(colwise_quantile(fc.ensemble_rates, 0.05));
    q["p50"] = to_json(colwise_quantile(fc.ensemble_rates, 0.50));
    q["p95"] = to_json(colwise_quantile(fc.ensemble_rates, 0.95));
    j["quantiles"] = std::move(q);
  }
  if (!file.interval_labels.empty())
    j["interval_labels"] = file.interval_labels;
  dump_json(j, path);
}

ForecastFile read_forecast(const std::string& path) {
  const json j = load_json(path);
  ForecastFile file;
  RateForecast& fc = file.forecast;
  fc.horizon = require(j, "horizon", path).get<int>();
  fc.seed = require(j, "seed", path).get<std::uint64_t>();
  fc.point_scores =
      vector_from(require(j, "point_scores", path), path, "point_scores");
  fc.point_rates =
      vector_from(require(j, "point_rates", path), path, "point_rates");
  const Eigen::Index k = fc.point_scores.size();
  const Eigen::Index m = fc.point_rates.size();
  if (k < 1 || m < 1)
    throw input_error(path + ": forecast needs scores and rates");
  const int n_boot = require(j, "n_boot", path).get<int>();
  if (n_boot > 0) {
    fc.ensemble_scores = matrix_from(require(j, "ensemble_scores", path), k,
                                     path, "ensemble_scores");
    fc.ensemble_rates = matrix_from(require(j, "ensemble_rates", path), m,
                                    path, "ensemble_rates");
    fc.ensemble_counts = int_matrix_from(require(j, "ensemble_counts", path),
                                         m, path, "ensemble_counts");
    if (fc.ensemble_scores.rows() != n_boot ||
        fc.ensemble_rates.rows() != n_boot ||
        fc.ensemble_counts.rows() != n_boot)
      throw input_error(path + ": ensemble sizes disagree with 'n_boot'");
  } else {
    fc.ensemble_scores.resize(0, 0);
    fc.ensemble_rates.resize(0, 0);
    fc.ensemble_counts.resize(0, 0);
  }
  file.interval_labels = labels_from(j, path);
  return file;
}

void write_updated_forecast(const UpdatedForecastFile& file,
                            const std::string& path) {
  const UpdatedForecast& up = file.update;
  json j;
  j["m0"] = up.m0;
  j["omega"] = up.omega;
  j["scores"] = to_json(up.scores);
  j["latter_rates"] = to_json(up.latter_rates);
  j["objective"] = up.objective;
  j["iterations"] = up.iterations;
  j["converged"] = up.converged;
  j["seed"] = file.seed;
  j["n_boot"] = int(file.ensemble.latter_rates.rows());
  if (file.ensemble.latter_rates.rows() > 0) {
    json ens;
    ens["scores"] = flat(file.ensemble.scores);
    ens["latter_rates"] = flat(file.ensemble.latter_rates);
    ens["latter_counts"] = flat(file.ensemble.latter_counts);
    ens["lo95"] = to_json(colwise_quantile(file.ensemble.latter_rates, 0.025));
    ens["hi95"] = to_json(colwise_quantile(file.ensemble.latter_rates, 0.975));
    j["ensemble"] = std::move(ens);
  }
  if (file.has_volume_scaled) {
    json vs;
    vs["ratio"] = file.volume_scaled.ratio;
    vs["latter_rates"] = to_json(file.volume_scaled.latter_rates);
    j["volume_scaled"] = std::move(vs);
  }
  if (!file.interval_labels.empty())
    j["interval_labels"] = file.interval_labels;
  dump_json(j, path);
}

UpdatedForecastFile read_updated_forecast(const std::string& path) {
  const json j = load_json(path);
  UpdatedForecastFile file;
  UpdatedForecast& up = file.update;
  up.m0 = require(j, "m0", path).get<int>();
  up.omega = require(j, "omega", path).get<double>();
  up.scores = vector_from(require(j, "scores", path), path, "scores");
  up.latter_rates =
      vector_from(require(j, "latter_rates", path), path, "latter_rates");
  up.objective = require(j, "objective", path).get<double>();
  up.iterations = require(j, "iterations", path).get<int>();
  up.converged = require(j, "converged", path).get<bool>();
  file.seed = require(j, "seed", path).get<std::uint64_t>();
  const Eigen::Index k = up.scores.size();
  const Eigen::Index latter = up.latter_rates.size();
  const int n_boot = require(j, "n_boot", path).get<int>();
  if (n_boot > 0) {
    const json& ens = require(j, "ensemble", path);
    file.ensemble.scores =
        matrix_from(require(ens, "scores", path), k, path, "scores");
    file.ensemble.latter_rates = matrix_from(
        require(ens, "latter_rates", path), latter, path, "latter_rates");
    file.ensemble.latter_counts = int_matrix_from(
        require(ens, "latter_counts", path), latter, path, "latter_counts");
    if (file.ensemble.scores.rows() != n_boot ||
        file.ensemble.latter_rates.rows() != n_boot ||
        file.ensemble.latter_counts.rows() != n_boot)
      throw input_error(path + ": ensemble sizes disagree with 'n_boot'");
  }
  if (j.contains("volume_scaled")) {
    file.has_volume_scaled = true;
    const json& vs = j["volume_scaled"];
    file.volume_scaled.ratio = require(vs, "ratio", path).get<double>();
    file.volume_scaled.latter_rates = vector_from(
        require(vs, "latter_rates", path), path, "latter_rates");
  }
  file.interval_labels = labels_from(j, path);
  return file;
}

MulParams read_mul_params(const std::string& path) {
  const json j = load_json(path);
  MulParams params;
  params.level = level_from_json(require(j, "level", path), path);
  // stored flat with five rows; the width is implied by the length
  const Eigen::VectorXd profile_values = vector_from(
      require(j, "day_profiles", path), path, "day_profiles");
  if (profile_values.size() % kWeekdays != 0 || profile_values.size() == 0)
    throw input_error(path +
                      ": 'day_profiles' length must be a positive multiple of 5");
  params.day_profiles = matrix_from(require(j, "day_profiles", path),
                                    profile_values.size() / kWeekdays, path,
                                    "day_profiles");
  params.interval_labels = labels_from(j, path);
  params.validate();
  return params;
}

AddParams read_add_params(const std::string& path) {
  const json j = load_json(path);
  AddParams params;
  params.mean = require(j, "mean", path).get<double>();
  params.level = level_from_json(require(j, "level", path), path);
  params.interval_effects = vector_from(
      require(j, "interval_effects", path), path, "interval_effects");
  params.interactions =
      matrix_from(require(j, "interactions", path),
                  params.interval_effects.size(), path, "interactions");
  if (params.interactions.rows() != kWeekdays)
    throw input_error(path + ": 'interactions' must have five rows");
  params.interval_labels = labels_from(j, path);
  params.validate();
  return params;
}

}  // namespace ratefactor
