#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "ratefactor/types.hpp"

namespace testutil {

// Panel wrapper with weekdays cycling Monday..Friday from start_day and
// synthetic labels.
inline ratefactor::CountMatrix make_counts(const Eigen::MatrixXd& counts,
                                           int start_day = 1) {
  ratefactor::CountMatrix cm;
  cm.counts = counts;
  int day = start_day;
  for (int i = 0; i < counts.rows(); ++i) {
    cm.day_of_week.push_back(day);
    cm.dates.push_back("day" + std::to_string(i + 1));
    day = ratefactor::next_weekday(day);
  }
  for (int j = 0; j < counts.cols(); ++j)
    cm.interval_labels.push_back("i" + std::to_string(j + 1));
  return cm;
}

inline std::vector<int> cycle_days(int n, int start_day = 1) {
  std::vector<int> d;
  int day = start_day;
  for (int i = 0; i < n; ++i) {
    d.push_back(day);
    day = ratefactor::next_weekday(day);
  }
  return d;
}

}  // namespace testutil
