#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "ratefactor/evaluate.hpp"
#include "ratefactor/quantile.hpp"
#include "ratefactor/simgen.hpp"
#include "ratefactor/types.hpp"

using namespace ratefactor;

namespace {

// Small multiplicative panel with mild weekday structure and its true rates.
SimResult make_panel(int n, int m, std::uint64_t seed) {
  MulParams p;
  p.level.day_means = {26.0, 25.0, 24.0, 23.5, 23.0};
  p.level.slope = 0.4;
  p.level.noise_sd = 0.7;
  p.day_profiles.resize(5, m);
  for (int d = 0; d < 5; ++d) {
    for (int j = 0; j < m; ++j)
      p.day_profiles(d, j) =
          0.6 + std::sin(3.14159 * (j + 1.0) / (m + 1.0)) + 0.04 * d;
    p.day_profiles.row(d) /= p.day_profiles.row(d).sum();
  }
  return generate_mul(p, n, seed);
}

RollingConfig base_config(const std::vector<std::string>& methods) {
  RollingConfig cfg;
  cfg.train_window = 20;
  cfg.test_days = 4;
  cfg.methods = methods;
  return cfg;
}

}  // namespace

TEST_CASE("accuracy metrics: worked values") {
  Eigen::VectorXd forecast(2), truth(2);
  forecast << 1.0, 4.0;
  truth << 2.0, 2.0;
  const Accuracy acc = rmse_mre(forecast, truth);
  CHECK(acc.rmse == doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));
  CHECK(acc.mre == doctest::Approx(75.0).epsilon(1e-12));

  // a constant shift of c gives rmse exactly c
  Eigen::VectorXd t2(4), f2(4);
  t2 << 3.0, 5.0, 8.0, 2.0;
  f2 = t2.array() + 1.5;
  CHECK(rmse_mre(f2, t2).rmse == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(rmse_mre(t2, t2).rmse == 0.0);
  CHECK(rmse_mre(t2, t2).mre == 0.0);
}

TEST_CASE("accuracy metrics: validation") {
  Eigen::VectorXd f(2), t(3);
  f << 1.0, 2.0;
  t << 1.0, 2.0, 3.0;
  CHECK_THROWS_AS((void)rmse_mre(f, t), input_error);
  Eigen::VectorXd z(2);
  z << 1.0, 0.0;  // zero truth breaks the relative error
  CHECK_THROWS_AS((void)rmse_mre(f, z), input_error);
  CHECK_THROWS_AS((void)rmse_mre(Eigen::VectorXd(), Eigen::VectorXd()),
                  input_error);
}

TEST_CASE("empirical CDF: sorted steps of height 1/n") {
  const auto cdf = empirical_cdf({3.0, 1.0, 2.0});
  REQUIRE(cdf.size() == 3);
  CHECK(cdf[0].first == 1.0);
  CHECK(cdf[0].second == doctest::Approx(1.0 / 3.0));
  CHECK(cdf[1].first == 2.0);
  CHECK(cdf[1].second == doctest::Approx(2.0 / 3.0));
  CHECK(cdf[2].first == 3.0);
  CHECK(cdf[2].second == doctest::Approx(1.0));
  CHECK_THROWS_AS((void)empirical_cdf({}), input_error);
}

TEST_CASE("interval report: coverage share and mean width") {
  Eigen::VectorXd lo(3), hi(3), truth(3);
  lo << 0.0, 0.0, 2.0;
  hi << 1.0, 2.0, 3.0;
  truth << 0.5, 3.0, 2.5;
  const IntervalReport rep = interval_report(lo, hi, truth);
  CHECK(rep.coverage == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(rep.mean_width == doctest::Approx(4.0 / 3.0).epsilon(1e-12));

  // a zero-width band hitting the truth exactly still covers
  const IntervalReport exact = interval_report(truth, truth, truth);
  CHECK(exact.coverage == 1.0);
  CHECK(exact.mean_width == 0.0);

  Eigen::VectorXd short_lo(2);
  CHECK_THROWS_AS((void)interval_report(short_lo, hi, truth), input_error);
}

TEST_CASE("rolling study: recorded rows match a by-hand replay of the truth") {
  const SimResult sim = make_panel(24, 6, 2024);
  RollingConfig cfg = base_config({"ORACLE"});
  cfg.mask_cut = 2;
  const MetricReport report = run_rolling_exercise(sim.counts, &sim.rates, cfg);

  // one rmse row and one mre row per scored day
  REQUIRE(report.rows.size() == 8);
  const int n = sim.counts.days();
  const int width = 6 - 2;
  int row_idx = 0;
  for (int t = n - 4; t < n; ++t) {
    const Eigen::VectorXd realized =
        sim.counts.counts.row(t).tail(width).transpose().cwiseMax(kRateFloor);
    const Eigen::VectorXd truth = sim.rates.row(t).tail(width).transpose();
    const Accuracy acc = rmse_mre(realized, truth);
    CHECK(report.rows[std::size_t(row_idx)].day == t);
    CHECK(report.rows[std::size_t(row_idx)].method == "ORACLE");
    CHECK(report.rows[std::size_t(row_idx)].metric == "rmse");
    CHECK(report.rows[std::size_t(row_idx)].value ==
          doctest::Approx(acc.rmse).epsilon(1e-12));
    CHECK(report.rows[std::size_t(row_idx + 1)].metric == "mre");
    CHECK(report.rows[std::size_t(row_idx + 1)].value ==
          doctest::Approx(acc.mre).epsilon(1e-12));
    row_idx += 2;
  }
}

TEST_CASE("rolling study: day-t scores never depend on later rows") {
  const SimResult sim = make_panel(26, 6, 515);
  RollingConfig cfg = base_config({"TS1", "PML1", "MUL", "HPM"});
  cfg.test_days = 3;
  cfg.update_cut = 2;
  cfg.update.omega = 25.0;

  const MetricReport before =
      run_rolling_exercise(sim.counts, &sim.rates, cfg);

  CountMatrix tampered = sim.counts;
  const int last = tampered.days() - 1;
  tampered.counts.row(last).array() += 7.0;  // corrupt only the final day
  const MetricReport after = run_rolling_exercise(tampered, &sim.rates, cfg);

  REQUIRE(before.rows.size() == after.rows.size());
  bool final_day_changed = false;
  for (std::size_t i = 0; i < before.rows.size(); ++i) {
    CHECK(before.rows[i].day == after.rows[i].day);
    CHECK(before.rows[i].method == after.rows[i].method);
    CHECK(before.rows[i].metric == after.rows[i].metric);
    if (before.rows[i].day < last) {
      CHECK(before.rows[i].value == after.rows[i].value);
    } else if (before.rows[i].value != after.rows[i].value) {
      final_day_changed = true;
    }
  }
  // the corrupted day itself is genuinely being scored against new counts
  CHECK(final_day_changed);
}

TEST_CASE("rolling study: an immovable update reproduces the base forecast") {
  const SimResult sim = make_panel(25, 6, 808);
  RollingConfig cfg = base_config({"TS2", "PML2"});
  cfg.update_cut = 2;
  cfg.update.omega = 1e12;  // pin the update at its anchor
  const MetricReport report = run_rolling_exercise(sim.counts, &sim.rates, cfg);

  const std::vector<double> ts = report.series("TS2", "rmse");
  const std::vector<double> pml = report.series("PML2", "rmse");
  REQUIRE(ts.size() == 4);
  REQUIRE(pml.size() == 4);
  for (std::size_t i = 0; i < ts.size(); ++i)
    CHECK(pml[i] == doctest::Approx(ts[i]).epsilon(1e-3));
}

TEST_CASE("rolling study: no cut means the updating methods equal their base") {
  const SimResult sim = make_panel(25, 6, 222);
  RollingConfig cfg = base_config({"TS1", "PML1", "MUL", "HPM"});
  cfg.update_cut = 0;
  const MetricReport report = run_rolling_exercise(sim.counts, &sim.rates, cfg);
  CHECK(report.series("PML1", "rmse") == report.series("TS1", "rmse"));
  CHECK(report.series("HPM", "rmse") == report.series("MUL", "rmse"));
  CHECK(report.series("PML1", "mre") == report.series("TS1", "mre"));
}

TEST_CASE("rolling study: determinism and duplicate-method dedup") {
  const SimResult sim = make_panel(24, 5, 99);
  RollingConfig cfg = base_config({"TS1", "TS1", "ADD"});
  const MetricReport a = run_rolling_exercise(sim.counts, &sim.rates, cfg);
  const MetricReport b = run_rolling_exercise(sim.counts, &sim.rates, cfg);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    CHECK(a.rows[i].value == b.rows[i].value);
  // TS1 listed twice still contributes one row pair per day
  CHECK(a.series("TS1", "rmse").size() == 4);
  CHECK(a.rows.size() == 16);  // 2 methods x 2 metrics x 4 days
}

TEST_CASE("rolling study: bootstrap adds bands for factor methods only") {
  const SimResult sim = make_panel(24, 5, 321);
  RollingConfig cfg = base_config({"TS1", "PML1", "MUL"});
  cfg.update_cut = 1;
  cfg.n_boot = 40;
  const MetricReport report = run_rolling_exercise(sim.counts, &sim.rates, cfg);
  CHECK(report.series("TS1", "coverage").size() == 4);
  CHECK(report.series("TS1", "width").size() == 4);
  CHECK(report.series("PML1", "coverage").size() == 4);
  CHECK(report.series("MUL", "coverage").empty());
  for (double c : report.series("TS1", "coverage")) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
  for (double w : report.series("PML1", "width")) CHECK(w >= 0.0);
}

TEST_CASE("rolling study: staffing mode scores plans against the realized plan") {
  const SimResult sim = make_panel(24, 5, 646);
  RollingConfig cfg = base_config({"ORACLE", "TS1"});
  StaffingParams staff;
  staff.service_rate = 3.0;
  staff.theta = 1.0;
  cfg.staffing = staff;
  const MetricReport report = run_rolling_exercise(sim.counts, nullptr, cfg);
  // the oracle plan compared with itself is exact
  for (double v : report.series("ORACLE", "rmse")) CHECK(v == 0.0);
  for (double v : report.series("ORACLE", "mre")) CHECK(v == 0.0);
  for (double v : report.series("TS1", "rmse")) CHECK(v >= 0.0);
}

TEST_CASE("rolling study: frozen models match the refitting run on day one") {
  const SimResult sim = make_panel(24, 5, 757);
  RollingConfig cfg = base_config({"TS1", "MUL"});
  const MetricReport live = run_rolling_exercise(sim.counts, &sim.rates, cfg);
  RollingConfig frozen_cfg = cfg;
  frozen_cfg.refit_each_day = false;
  const MetricReport frozen =
      run_rolling_exercise(sim.counts, &sim.rates, frozen_cfg);

  const int first_day = sim.counts.days() - cfg.test_days;
  REQUIRE(live.rows.size() == frozen.rows.size());
  for (std::size_t i = 0; i < live.rows.size(); ++i)
    if (live.rows[i].day == first_day)
      CHECK(live.rows[i].value == frozen.rows[i].value);
}

TEST_CASE("rolling study: summary statistics agree with direct quantiles") {
  const SimResult sim = make_panel(26, 5, 868);
  RollingConfig cfg = base_config({"ORACLE"});
  cfg.test_days = 6;
  const MetricReport report = run_rolling_exercise(sim.counts, &sim.rates, cfg);
  const auto summary = report.summarize();
  const auto it = summary.find({"ORACLE", "rmse"});
  REQUIRE(it != summary.end());
  const std::vector<double> values = report.series("ORACLE", "rmse");
  REQUIRE(values.size() == 6);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= 6.0;
  CHECK(it->second.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(it->second.median == doctest::Approx(quantile(values, 0.5)));
  CHECK(it->second.q1 == doctest::Approx(quantile(values, 0.25)));
  CHECK(it->second.q3 == doctest::Approx(quantile(values, 0.75)));
  CHECK(it->second.n == 6);
}

TEST_CASE("rolling study: anchor strength resolved once from the first window") {
  const SimResult sim = make_panel(26, 5, 117);
  RollingConfig cfg = base_config({"PML1"});
  cfg.test_days = 3;
  cfg.update_cut = 2;
  cfg.auto_omega = true;
  cfg.omega_search.grid = {0.0, 100.0, 1e6};
  cfg.omega_search.holdout_days = 4;
  cfg.omega_search.fit_window = 12;
  const MetricReport report = run_rolling_exercise(sim.counts, &sim.rates, cfg);
  const bool on_grid = report.omega_used == 0.0 ||
                       report.omega_used == 100.0 || report.omega_used == 1e6;
  CHECK(on_grid);

  // the search window must fit inside the training window
  cfg.omega_search.fit_window = 30;
  CHECK_THROWS_AS((void)run_rolling_exercise(sim.counts, &sim.rates, cfg),
                  input_error);
}

TEST_CASE("rolling study: configuration validation") {
  const SimResult sim = make_panel(24, 5, 55);
  RollingConfig cfg = base_config({"TS1"});

  SUBCASE("panel shorter than train + test") {
    cfg.train_window = 30;
    CHECK_THROWS_AS((void)run_rolling_exercise(sim.counts, &sim.rates, cfg),
                    input_error);
  }
  SUBCASE("cuts out of range") {
    cfg.update_cut = 5;
    CHECK_THROWS_AS((void)run_rolling_exercise(sim.counts, &sim.rates, cfg),
                    input_error);
    cfg.update_cut = 0;
    cfg.mask_cut = -1;
    CHECK_THROWS_AS((void)run_rolling_exercise(sim.counts, &sim.rates, cfg),
                    input_error);
  }
  SUBCASE("unknown or malformed methods") {
    cfg.methods = {"BOGUS"};
    CHECK_THROWS_AS((void)run_rolling_exercise(sim.counts, &sim.rates, cfg),
                    input_error);
    cfg.methods = {"TS0"};
    CHECK_THROWS_AS((void)run_rolling_exercise(sim.counts, &sim.rates, cfg),
                    input_error);
    cfg.methods = {"PMLx"};
    CHECK_THROWS_AS((void)run_rolling_exercise(sim.counts, &sim.rates, cfg),
                    input_error);
    cfg.methods = {};
    CHECK_THROWS_AS((void)run_rolling_exercise(sim.counts, &sim.rates, cfg),
                    input_error);
  }
  SUBCASE("rate metrics need the truth") {
    CHECK_THROWS_AS((void)run_rolling_exercise(sim.counts, nullptr, cfg),
                    input_error);
    Eigen::MatrixXd wrong = sim.rates.topRows(10);
    CHECK_THROWS_AS((void)run_rolling_exercise(sim.counts, &wrong, cfg),
                    input_error);
  }
}
