#include "gtbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gtbench::analysis {

namespace {

int sigma_row(char archetype) { return (archetype - 'a') / 3; }
int degree_column(char archetype) { return (archetype - 'a') % 3; }

std::vector<Scalar> ranks(const Vec& v) {
  const auto n = static_cast<std::size_t>(v.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return v[static_cast<Index>(a)] < v[static_cast<Index>(b)];
  });
  std::vector<Scalar> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[static_cast<Index>(order[j + 1])] ==
                            v[static_cast<Index>(order[i])]) {
      ++j;
    }
    const Scalar shared = 0.5 * static_cast<Scalar>(i + j) + 1.0;  // average rank
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = shared;
    i = j + 1;
  }
  return rank;
}

}  // namespace

std::string measure_name(Measure measure) {
  switch (measure) {
    case Measure::kMae: return "mae";
    case Measure::kMse: return "mse";
    case Measure::kMftm: return "mftm";
    case Measure::kFitToMean: return "fit_to_mean";
  }
  throw std::logic_error("unreachable");
}

std::optional<Scalar> measure_value(const SweepRow& row, Measure measure) {
  switch (measure) {
    case Measure::kMae: return row.mae;
    case Measure::kMse: return row.mse;
    case Measure::kMftm: return row.mftm;
    case Measure::kFitToMean: return row.fit_to_mean;
  }
  throw std::logic_error("unreachable");
}

Vec normalize(const Vec& column) {
  if (column.size() < 2) {
    throw std::invalid_argument("normalize: need at least two values");
  }
  if (!column.allFinite()) {
    throw std::invalid_argument("normalize: non-finite values");
  }
  const Scalar lo = column.minCoeff();
  const Scalar hi = column.maxCoeff();
  if (!(hi > lo)) throw std::invalid_argument("normalize: constant column");
  return (column.array() - lo) / (hi - lo);
}

Scalar pearson(const Vec& x, const Vec& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("pearson: bad inputs");
  }
  const Vec xc = x.array() - x.mean();
  const Vec yc = y.array() - y.mean();
  const Scalar sx = xc.squaredNorm();
  const Scalar sy = yc.squaredNorm();
  if (sx == 0.0 || sy == 0.0) {
    throw std::invalid_argument("pearson: zero-variance column");
  }
  return xc.dot(yc) / std::sqrt(sx * sy);
}

Scalar spearman(const Vec& x, const Vec& y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  return pearson(Eigen::Map<const Vec>(rx.data(), static_cast<Index>(rx.size())),
                 Eigen::Map<const Vec>(ry.data(), static_cast<Index>(ry.size())));
}

RegressionSummary regress(const Vec& x, const Vec& y) {
  if (x.size() != y.size() || x.size() < 3) {
    throw std::invalid_argument("regress: need equal lengths >= 3");
  }
  const Scalar x_mean = x.mean();
  const Scalar y_mean = y.mean();
  const Vec xc = x.array() - x_mean;
  const Scalar var_x = xc.squaredNorm();
  if (var_x == 0.0) throw std::invalid_argument("regress: zero variance in x");

  RegressionSummary summary;
  const Vec yc = y.array() - y_mean;
  summary.slope = xc.dot(yc) / var_x;
  summary.intercept = y_mean - summary.slope * x_mean;
  const Scalar r = pearson(x, y);
  summary.r_squared = r * r;
  summary.n_used = x.size();
  return summary;
}

std::vector<RegressionSummary> compare_measures(const SweepTable& table) {
  std::vector<const SweepRow*> usable;
  Index excluded = 0;
  for (const SweepRow& row : table) {
    if (!row.diverged && row.mfgt.has_value()) {
      usable.push_back(&row);
    } else {
      ++excluded;
    }
  }
  if (usable.size() < 30) {
    throw std::invalid_argument("compare_measures: need >= 30 usable rows, have " +
                                std::to_string(usable.size()));
  }

  Vec mfgt(static_cast<Index>(usable.size()));
  for (std::size_t i = 0; i < usable.size(); ++i) {
    mfgt[static_cast<Index>(i)] = *usable[i]->mfgt;
  }
  const Vec mfgt_norm = normalize(mfgt);

  std::vector<RegressionSummary> summaries;
  for (Measure measure : kAllMeasures) {
    Vec column(static_cast<Index>(usable.size()));
    for (std::size_t i = 0; i < usable.size(); ++i) {
      const auto value = measure_value(*usable[i], measure);
      if (!value.has_value()) {
        throw std::invalid_argument("compare_measures: missing " +
                                    measure_name(measure) + " on run " +
                                    std::to_string(usable[i]->run_id));
      }
      column[static_cast<Index>(i)] = *value;
    }
    RegressionSummary summary = regress(normalize(column), mfgt_norm);
    summary.measure_name = measure_name(measure);
    summary.n_excluded = excluded;
    summaries.push_back(std::move(summary));
  }
  return summaries;
}

std::vector<HeatmapGrid> grid_heatmap(
    const std::vector<ArchetypeSummaries>& by_archetype) {
  std::vector<HeatmapGrid> grids;
  for (Measure measure : kAllMeasures) {
    HeatmapGrid grid;
    grid.measure = measure_name(measure);
    for (const ArchetypeSummaries& arch : by_archetype) {
      if (arch.archetype < 'a' || arch.archetype > 'l') {
        throw std::invalid_argument("grid_heatmap: archetype outside a..l");
      }
      const int row = sigma_row(arch.archetype);
      const int col = degree_column(arch.archetype);
      Scalar sum = 0.0;
      int count = 0;
      for (const auto& replicate : arch.replicates) {
        for (const RegressionSummary& summary : replicate) {
          if (summary.measure_name == grid.measure) {
            sum += summary.r_squared;
            ++count;
          }
        }
      }
      if (count > 0) {
        grid.mean_r2[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] =
            sum / static_cast<Scalar>(count);
        grid.n_replicates[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] =
            count;
      }
    }
    grids.push_back(std::move(grid));
  }
  return grids;
}

BifurcationReport bifurcation_report(const SweepTable& table) {
  BifurcationReport report;
  Index positive = 0;
  for (const SweepRow& row : table) {
    if (row.diverged || !row.mae || !row.mfgt || !row.mftm || !row.fit_to_mean) {
      continue;
    }
    report.rows.push_back({row.run_id, *row.mae, *row.mfgt, row.complexity,
                           *row.mftm - *row.fit_to_mean});
    if (*row.mftm - *row.fit_to_mean > 0.0) ++positive;
  }
  if (!report.rows.empty()) {
    report.positive_fraction =
        static_cast<Scalar>(positive) / static_cast<Scalar>(report.rows.size());
  }
  if (report.rows.size() >= 3) {
    Vec complexity(static_cast<Index>(report.rows.size()));
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      complexity[static_cast<Index>(i)] =
          static_cast<Scalar>(report.rows[i].complexity);
    }
    if (complexity.maxCoeff() > complexity.minCoeff()) {
      const auto correlate = [&](auto&& get) -> Scalar {
        Vec v(static_cast<Index>(report.rows.size()));
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
          v[static_cast<Index>(i)] = get(report.rows[i]);
        }
        return pearson(complexity, v);
      };
      report.complexity_correlation["mae"] =
          correlate([](const BifurcationRow& r) { return r.mae; });
      report.complexity_correlation["mfgt"] =
          correlate([](const BifurcationRow& r) { return r.mfgt; });
    }
  }
  return report;
}

std::int64_t select_best(const SweepTable& table, Measure criterion) {
  const SweepRow* best = nullptr;
  Scalar best_value = 0.0;
  for (const SweepRow& row : table) {
    if (row.diverged) continue;
    const auto value = measure_value(row, criterion);
    if (!value.has_value()) continue;
    const bool wins =
        best == nullptr || *value < best_value ||
        (*value == best_value && (row.complexity < best->complexity ||
                                  (row.complexity == best->complexity &&
                                   row.run_id < best->run_id)));
    if (wins) {
      best = &row;
      best_value = *value;
    }
  }
  if (best == nullptr) {
    throw std::invalid_argument("select_best: no eligible rows");
  }
  return best->run_id;
}

}  // namespace gtbench::analysis
