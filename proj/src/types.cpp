#include "ratefactor/types.hpp"

#include <cmath>

namespace ratefactor {

int next_weekday(int day) { return day == kWeekdays ? 1 : day + 1; }

bool is_weekday_code(int day) { return day >= 1 && day <= kWeekdays; }

void CountMatrix::validate() const {
  const int n = days();
  const int m = intervals();
  if (n == 0 || m == 0) throw input_error("count panel is empty");
  if (static_cast<int>(day_of_week.size()) != n)
    throw input_error("count panel has " + std::to_string(n) + " rows but " +
                      std::to_string(day_of_week.size()) + " weekday codes");
  if (static_cast<int>(interval_labels.size()) != m)
    throw input_error("count panel has " + std::to_string(m) +
                      " columns but " +
                      std::to_string(interval_labels.size()) +
                      " interval labels");
  if (!dates.empty() && static_cast<int>(dates.size()) != n)
    throw input_error("count panel has " + std::to_string(n) + " rows but " +
                      std::to_string(dates.size()) + " dates");
  for (int i = 0; i < n; ++i) {
    if (!is_weekday_code(day_of_week[i]))
      throw input_error("row " + std::to_string(i + 1) +
                        ": weekday code must be 1..5, got " +
                        std::to_string(day_of_week[i]));
    for (int j = 0; j < m; ++j) {
      const double y = counts(i, j);
      if (!std::isfinite(y) || y < 0.0 || y != std::floor(y))
        throw input_error("row " + std::to_string(i + 1) + ", column " +
                          std::to_string(j + 1) +
                          ": counts must be nonnegative integers");
    }
  }
}

CountMatrix CountMatrix::window(int first, int n) const {
  if (first < 0 || n <= 0 || first + n > days())
    throw input_error("window [" + std::to_string(first) + ", " +
                      std::to_string(first + n) + ") out of range for " +
                      std::to_string(days()) + " days");
  CountMatrix out;
  out.counts = counts.middleRows(first, n);
  out.day_of_week.assign(day_of_week.begin() + first,
                         day_of_week.begin() + first + n);
  out.interval_labels = interval_labels;
  if (!dates.empty())
    out.dates.assign(dates.begin() + first, dates.begin() + first + n);
  return out;
}

RateProfile::RateProfile(Eigen::VectorXd r) : rates(std::move(r)) {
  for (int j = 0; j < rates.size(); ++j)
    if (!std::isfinite(rates(j)) || rates(j) <= 0.0)
      throw input_error("rate profile entry " + std::to_string(j + 1) +
                        " must be strictly positive and finite");
}

}  // namespace ratefactor
