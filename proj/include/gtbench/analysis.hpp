#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gtbench/types.hpp"

namespace gtbench::analysis {

// One trained-network record from a sweep. Diverged rows keep their
// identity but carry no measure values.
struct SweepRow {
  std::int64_t run_id = 0;
  char archetype = 'a';
  int replicate = 0;
  std::uint64_t dataset_seed = 0;
  std::uint64_t net_seed = 0;
  std::vector<int> shape;  // hidden layer widths
  std::int64_t complexity = 0;
  int epochs_run = 0;
  bool diverged = false;
  std::optional<Scalar> mae, mse, mftm, fit_to_mean, mfgt;
};

using SweepTable = std::vector<SweepRow>;

enum class Measure { kMae, kMse, kMftm, kFitToMean };

std::string measure_name(Measure measure);
std::optional<Scalar> measure_value(const SweepRow& row, Measure measure);

constexpr std::array<Measure, 4> kAllMeasures{Measure::kMae, Measure::kMse,
                                              Measure::kMftm, Measure::kFitToMean};

// Min-max normalization to [0,1]; the paper's scatter axes.
Vec normalize(const Vec& column);

struct RegressionSummary {
  std::string measure_name;
  Scalar slope = 0.0;
  Scalar intercept = 0.0;
  Scalar r_squared = 0.0;
  Index n_used = 0;
  Index n_excluded = 0;
};

// Ordinary least squares y = intercept + slope * x with R^2 as the
// squared Pearson correlation.
RegressionSummary regress(const Vec& x, const Vec& y);

Scalar pearson(const Vec& x, const Vec& y);
Scalar spearman(const Vec& x, const Vec& y);

// Normalizes every measure and the ground-truth fit over the non-diverged
// rows, then regresses each measure against the ground-truth fit.
std::vector<RegressionSummary> compare_measures(const SweepTable& table);

// Table-1 layout: rows by noise level, columns by degree range.
struct HeatmapGrid {
  std::string measure;
  std::array<std::array<std::optional<Scalar>, 3>, 4> mean_r2;  // [sigma][degree]
  std::array<std::array<int, 3>, 4> n_replicates{};
};

struct ArchetypeSummaries {
  char archetype = 'a';
  // one entry per dataset replicate, each holding per-measure summaries
  std::vector<std::vector<RegressionSummary>> replicates;
};

std::vector<HeatmapGrid> grid_heatmap(const std::vector<ArchetypeSummaries>& by_archetype);

struct BifurcationRow {
  std::int64_t run_id = 0;
  Scalar mae = 0.0;
  Scalar mfgt = 0.0;
  std::int64_t complexity = 0;
  Scalar mftm_minus_fitmean = 0.0;
};

struct BifurcationReport {
  std::vector<BifurcationRow> rows;
  std::map<std::string, Scalar> complexity_correlation;  // per measure + mfgt
  Scalar positive_fraction = 0.0;  // share of rows with mftm > fit_to_mean
};

BifurcationReport bifurcation_report(const SweepTable& table);

// Argmin of the chosen measure over non-diverged rows; ties break to the
// lower complexity, then the lower run_id.
std::int64_t select_best(const SweepTable& table, Measure criterion);

}  // namespace gtbench::analysis
