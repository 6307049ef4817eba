#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ratefactor {

// Floor applied wherever a model could emit a nonpositive rate (inverse
// links, clamped generators, count-derived oracle rates) so Poisson
// likelihoods stay finite.
inline constexpr double kRateFloor = 1e-8;

// Default master seed for every randomized CLI path. Documented in --help so
// reruns without --seed are reproducible.
inline constexpr std::uint64_t kDefaultSeed = 20230715;

// Malformed user input: files, shapes, labels, flag combinations.
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Algorithm could not produce a usable result: singular systems, non-finite
// objectives, impossible configurations discovered mid-iteration.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Day-of-week codes are 1=Monday .. 5=Friday; weekends are out of scope.
inline constexpr int kWeekdays = 5;

// Weekday that follows `day` in a Monday..Friday cycle.
int next_weekday(int day);

bool is_weekday_code(int day);

// Daily count panel: one row per day, one column per within-day interval.
// Counts are nonnegative integers stored as doubles for arithmetic
// convenience; validate() enforces integrality.
struct CountMatrix {
  Eigen::MatrixXd counts;                    // n x m
  std::vector<int> day_of_week;              // n codes in {1..5}
  std::vector<std::string> interval_labels;  // m labels, e.g. "07:15"
  std::vector<std::string> dates;            // n free-form row ids

  int days() const { return static_cast<int>(counts.rows()); }
  int intervals() const { return static_cast<int>(counts.cols()); }

  // Throws input_error on shape mismatches, negative/fractional counts, or
  // day codes outside 1..5.
  void validate() const;

  // Rows [first, first + n) as a self-contained panel.
  CountMatrix window(int first, int n) const;
};

// Strictly positive within-day rate profile.
struct RateProfile {
  Eigen::VectorXd rates;

  RateProfile() = default;
  // Throws input_error if any entry is not strictly positive and finite.
  explicit RateProfile(Eigen::VectorXd r);
  int intervals() const { return static_cast<int>(rates.size()); }
};

}  // namespace ratefactor
