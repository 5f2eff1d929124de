#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gtbench/analysis.hpp"
#include "gtbench/rng.hpp"
#include "oracles.hpp"

using namespace gtbench;
using analysis::Measure;
using analysis::SweepRow;
using analysis::SweepTable;

namespace {

SweepRow measured_row(std::int64_t run_id, Scalar mae, Scalar mftm, Scalar mfgt,
                      std::int64_t complexity = 10) {
  SweepRow row;
  row.run_id = run_id;
  row.archetype = 'a';
  row.complexity = complexity;
  row.mae = mae;
  row.mse = mae * mae;
  row.mftm = mftm;
  row.fit_to_mean = mftm * 1.1;
  row.mfgt = mfgt;
  return row;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("normalize maps the range onto [0,1]") {
  Vec v(3);
  v << 2.0, 4.0, 6.0;
  const Vec n = analysis::normalize(v);
  CHECK(n[0] == 0.0);
  CHECK(n[1] == 0.5);
  CHECK(n[2] == 1.0);

  rng::Stream stream(1);
  Vec random(50);
  for (Index i = 0; i < 50; ++i) random[i] = stream.normal(0.0, 9.0);
  const Vec normalized = analysis::normalize(random);
  CHECK(normalized.minCoeff() == 0.0);
  CHECK(normalized.maxCoeff() == 1.0);
  CHECK(analysis::normalize(normalized) == normalized);  // idempotent on [0,1]

  Vec constant = Vec::Constant(5, 3.3);
  CHECK_THROWS_AS(analysis::normalize(constant), std::invalid_argument);
}

TEST_CASE("regress recovers exact lines") {
  Vec x(5), y(5);
  x << 0, 1, 2, 3, 4;
  y = 2.5 * x.array() - 1.0;
  const analysis::RegressionSummary fit = analysis::regress(x, y);
  CHECK(fit.slope == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(fit.intercept == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-14));

  Vec flat = Vec::Constant(5, 1.0);
  CHECK_THROWS_AS(analysis::regress(flat, y), std::invalid_argument);
  Vec two(2);
  two << 0, 1;
  CHECK_THROWS_AS(analysis::regress(two, two), std::invalid_argument);
}

TEST_CASE("independent columns regress to nearly zero R^2") {
  rng::Stream stream(7);
  Vec x(1000), y(1000);
  for (Index i = 0; i < 1000; ++i) {
    x[i] = stream.normal(0.0, 1.0);
    y[i] = stream.normal(0.0, 1.0);
  }
  CHECK(analysis::regress(x, y).r_squared < 0.02);
}

TEST_CASE("regress matches the closed-form oracle on a fixed table") {
  const std::vector<double> xs{0.1, 0.4, 0.7, 1.1, 1.6, 2.0, 2.3, 2.9, 3.4, 4.0};
  const std::vector<double> ys{1.0, 0.8, 1.7, 2.1, 2.0, 3.2, 3.0, 3.9, 4.5, 4.9};
  Vec x(10), y(10);
  for (Index i = 0; i < 10; ++i) {
    x[i] = xs[static_cast<std::size_t>(i)];
    y[i] = ys[static_cast<std::size_t>(i)];
  }
  const oracle::Line expected = oracle::least_squares(xs, ys);
  const analysis::RegressionSummary got = analysis::regress(x, y);
  CHECK(std::abs(got.slope - expected.slope) <= 1e-12 * std::abs(expected.slope));
  CHECK(std::abs(got.intercept - expected.intercept) <=
        1e-12 * std::abs(expected.intercept));
  CHECK(std::abs(got.r_squared - expected.r_squared) <= 1e-12);
}

TEST_CASE("R^2 is invariant to min-max normalization of either column") {
  rng::Stream stream(9);
  Vec x(200), y(200);
  for (Index i = 0; i < 200; ++i) {
    x[i] = stream.normal(3.0, 2.0);
    y[i] = 0.7 * x[i] + stream.normal(0.0, 1.0);
  }
  const Scalar base = analysis::regress(x, y).r_squared;
  CHECK(std::abs(analysis::regress(analysis::normalize(x), y).r_squared - base) <=
        1e-12);
  CHECK(std::abs(analysis::regress(x, analysis::normalize(y)).r_squared - base) <=
        1e-12);
}

TEST_CASE("compare_measures scores a self-correlated measure at R^2 = 1") {
  SweepTable table;
  rng::Stream stream(10);
  for (int i = 0; i < 40; ++i) {
    const Scalar truth = stream.uniform(0.0, 5.0);
    SweepRow row = measured_row(i, stream.uniform(0.0, 1.0), truth, truth);
    table.push_back(row);
  }
  SweepRow diverged;
  diverged.run_id = 999;
  diverged.diverged = true;
  table.push_back(diverged);

  const auto summaries = analysis::compare_measures(table);
  bool saw_mftm = false;
  for (const auto& summary : summaries) {
    if (summary.measure_name == "mftm") {
      saw_mftm = true;
      CHECK(summary.r_squared == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(summary.n_used == 40);
      CHECK(summary.n_excluded == 1);
    }
  }
  CHECK(saw_mftm);

  SweepTable shuffled = table;
  rng::Stream order(11);
  order.shuffle(shuffled);
  const auto reshuffled = analysis::compare_measures(shuffled);
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    CHECK(reshuffled[i].measure_name == summaries[i].measure_name);
    CHECK(reshuffled[i].r_squared == doctest::Approx(summaries[i].r_squared).epsilon(1e-12));
    CHECK(reshuffled[i].slope == doctest::Approx(summaries[i].slope).epsilon(1e-12));
  }

  SweepTable tiny(table.begin(), table.begin() + 10);
  CHECK_THROWS_AS(analysis::compare_measures(tiny), std::invalid_argument);
}

TEST_CASE("grid_heatmap places archetypes on the sigma/degree grid") {
  analysis::RegressionSummary mae_fit;
  mae_fit.measure_name = "mae";
  mae_fit.r_squared = 0.2;
  analysis::RegressionSummary mftm_fit;
  mftm_fit.measure_name = "mftm";
  mftm_fit.r_squared = 0.9;

  std::vector<analysis::ArchetypeSummaries> archetypes;
  archetypes.push_back({'e', {{mae_fit, mftm_fit}}});  // sigma=1 row, P2-3 column

  const auto grids = analysis::grid_heatmap(archetypes);
  for (const auto& grid : grids) {
    if (grid.measure == "mae") {
      REQUIRE(grid.mean_r2[1][1].has_value());
      CHECK(*grid.mean_r2[1][1] == 0.2);
      CHECK_FALSE(grid.mean_r2[0][0].has_value());  // archetype a absent
      CHECK(grid.n_replicates[1][1] == 1);
    }
  }

  // replicate averaging is order-invariant
  analysis::RegressionSummary second = mftm_fit;
  second.r_squared = 0.7;
  std::vector<analysis::ArchetypeSummaries> forward{{'a', {{mftm_fit}, {second}}}};
  std::vector<analysis::ArchetypeSummaries> backward{{'a', {{second}, {mftm_fit}}}};
  const auto g1 = analysis::grid_heatmap(forward);
  const auto g2 = analysis::grid_heatmap(backward);
  for (std::size_t i = 0; i < g1.size(); ++i) {
    if (g1[i].measure == "mftm") {
      CHECK(*g1[i].mean_r2[0][0] == doctest::Approx(0.8).epsilon(1e-15));
      CHECK(*g1[i].mean_r2[0][0] == *g2[i].mean_r2[0][0]);
    }
  }
}

TEST_CASE("bifurcation annotations are computable by hand") {
  SweepTable table;
  SweepRow a = measured_row(1, 0.5, 1.0, 2.0, 10);
  a.fit_to_mean = 0.8;  // mftm - fit_to_mean = +0.2
  SweepRow b = measured_row(2, 0.6, 1.0, 3.0, 20);
  b.fit_to_mean = 1.5;  // mftm - fit_to_mean = -0.5
  table.push_back(a);
  table.push_back(b);

  const analysis::BifurcationReport report = analysis::bifurcation_report(table);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].mftm_minus_fitmean == doctest::Approx(0.2));
  CHECK(report.rows[1].mftm_minus_fitmean == doctest::Approx(-0.5));
  CHECK(report.positive_fraction == 0.5);
  CHECK(report.complexity_correlation.empty());  // below the 3-row minimum
}

TEST_CASE("mean-tracking populations show positive mftm minus fit_to_mean") {
  SweepTable table;
  rng::Stream stream(12);
  for (int i = 0; i < 50; ++i) {
    SweepRow row = measured_row(i, stream.uniform(0.0, 1.0), 0.0, 1.0,
                                10 + static_cast<std::int64_t>(i));
    // a model hugging the bin means sits farther from the medians on
    // skewed data
    row.fit_to_mean = stream.uniform(0.0, 0.2);
    row.mftm = *row.fit_to_mean + stream.uniform(0.1, 0.5);
    row.mfgt = *row.mftm + stream.uniform(0.0, 0.1);
    table.push_back(row);
  }
  const analysis::BifurcationReport report = analysis::bifurcation_report(table);
  CHECK(report.positive_fraction == 1.0);
  CHECK(report.complexity_correlation.count("mfgt") == 1);
}

TEST_CASE("select_best prefers the measure, then complexity, then run_id") {
  SweepTable single{measured_row(7, 1.0, 1.0, 1.0)};
  CHECK(analysis::select_best(single, Measure::kMftm) == 7);

  SweepTable table;
  table.push_back(measured_row(1, 0.9, 0.5, 1.0, 50));
  table.push_back(measured_row(2, 0.8, 0.5, 1.0, 20));  // ties on mftm, simpler
  table.push_back(measured_row(3, 0.7, 0.6, 1.0, 5));
  CHECK(analysis::select_best(table, Measure::kMftm) == 2);
  CHECK(analysis::select_best(table, Measure::kMae) == 3);

  table.push_back(measured_row(0, 0.95, 0.5, 1.0, 20));  // same mftm and complexity
  CHECK(analysis::select_best(table, Measure::kMftm) == 0);

  SweepTable empty;
  CHECK_THROWS_AS(analysis::select_best(empty, Measure::kMae), std::invalid_argument);
}

TEST_CASE("select_best is invariant under monotone transforms of the criterion") {
  rng::Stream stream(13);
  SweepTable table;
  for (int i = 0; i < 30; ++i) {
    table.push_back(measured_row(i, stream.uniform(0.1, 2.0), stream.uniform(0.1, 2.0),
                                 1.0, 10 + i));
  }
  const auto best = analysis::select_best(table, Measure::kMftm);
  SweepTable transformed = table;
  for (SweepRow& row : transformed) row.mftm = std::exp(3.0 * *row.mftm) + 1.0;
  CHECK(analysis::select_best(transformed, Measure::kMftm) == best);
}

TEST_CASE("rank alignment carries select_best to the ground truth") {
  rng::Stream stream(14);
  SweepTable table;
  for (int i = 0; i < 25; ++i) {
    const Scalar truth = stream.uniform(0.0, 3.0);
    table.push_back(measured_row(i, stream.uniform(0.0, 1.0), 2.0 * truth + 1.0, truth));
  }
  const auto best = analysis::select_best(table, Measure::kMftm);
  const SweepRow* winner = nullptr;
  for (const SweepRow& row : table) {
    if (row.run_id == best) winner = &row;
  }
  REQUIRE(winner != nullptr);
  for (const SweepRow& row : table) CHECK(*winner->mfgt <= *row.mfgt);
}

TEST_CASE("spearman tracks monotone association") {
  rng::Stream stream(15);
  Vec x(100), y(100);
  for (Index i = 0; i < 100; ++i) {
    x[i] = stream.uniform(0.0, 1.0);
    y[i] = std::exp(x[i]);  // monotone, nonlinear
  }
  CHECK(analysis::spearman(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  Vec flipped = -y;
  CHECK(analysis::spearman(x, flipped) == doctest::Approx(-1.0).epsilon(1e-12));
}

}  // TEST_SUITE
