#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ratefactor/factor_model.hpp"
#include "ratefactor/intraday.hpp"
#include "ratefactor/score_model.hpp"
#include "ratefactor/simgen.hpp"

namespace ratefactor {

// JSON persistence. Matrices are stored as flat row-major arrays; shapes are
// recovered from K. Extra keys are ignored on read, so files are forward
// compatible. All writes are atomic (temp file + rename).

struct FactorModelFile {
  FactorModel model;
  std::vector<std::string> interval_labels;  // optional
};
void write_factor_model(const FactorModelFile& file, const std::string& path);
FactorModelFile read_factor_model(const std::string& path);

void write_score_model(const ScoreModel& model, const std::string& path);
ScoreModel read_score_model(const std::string& path);

struct ForecastFile {
  RateForecast forecast;
  std::vector<std::string> interval_labels;
};
void write_forecast(const ForecastFile& file, const std::string& path);
ForecastFile read_forecast(const std::string& path);

struct UpdatedForecastFile {
  UpdatedForecast update;
  UpdateEnsemble ensemble;  // empty matrices when not bootstrapped
  // Volume-ratio fallback companion (present when requested).
  bool has_volume_scaled = false;
  VolumeScaledUpdate volume_scaled;
  std::vector<std::string> interval_labels;  // labels of the latter intervals
  std::uint64_t seed = 0;
};
void write_updated_forecast(const UpdatedForecastFile& file,
                            const std::string& path);
UpdatedForecastFile read_updated_forecast(const std::string& path);

// Generator parameter files (see params/ for shipped examples).
MulParams read_mul_params(const std::string& path);
AddParams read_add_params(const std::string& path);

}  // namespace ratefactor
