#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gtbench/synthdata.hpp"
#include "gtbench/types.hpp"

namespace gtbench::measures {

// Point-based error: mean |y - yhat|^r. r=1 is MAE, r=2 is MSE.
Scalar minkowski_error(const Vec& y, const Vec& yhat, Scalar r);

// Equal-width bins across the observed range of each input. The last bin
// is closed on the right so the maximum lands in it. Bins shorter than
// the occupancy threshold are kept but flagged excluded; an input whose
// observed range collapses to a point is flagged unusable.
struct BinPartition {
  struct InputBins {
    bool usable = true;
    Scalar lo = 0.0;
    Scalar hi = 0.0;
    Scalar bin_width = 0.0;
    std::vector<std::vector<Index>> members;  // row indices per bin
    std::vector<bool> occupied;               // meets min_occupancy

    Scalar midpoint(Index bin) const {
      return lo + (static_cast<Scalar>(bin) + 0.5) * bin_width;
    }
  };

  Index n_bins = 0;
  Index min_occupancy = 0;
  std::vector<InputBins> inputs;

  int usable_input_count() const;
};

BinPartition partition(const synthdata::Dataset& data, Index n_bins,
                       Index min_occupancy = 5);

// Conditional-average proxies per occupied bin: the exact sample median
// (the measure's reference) and the sample mean (the diagnostic variant).
// Values at excluded bins are NaN.
struct ProxyCurve {
  struct InputCurve {
    std::vector<Scalar> median_y;
    std::vector<Scalar> mean_y;
    std::vector<bool> occupied;
  };
  std::vector<InputCurve> inputs;
};

ProxyCurve proxy_curves(const synthdata::Dataset& data, const BinPartition& part);

// Model outputs along one input's bin midpoints with every other input
// pinned at its observed median, aligned index-for-index with the
// partition.
struct LearntCurve {
  std::vector<std::vector<Scalar>> inputs;  // NaN at excluded bins
};

Vec column_medians(const synthdata::Dataset& data);

LearntCurve probe(const Predictor& model, const BinPartition& part,
                  const Vec& input_medians);

Scalar mean_fit_to_median(const BinPartition& part, const ProxyCurve& proxy,
                          const LearntCurve& learnt);

Scalar fit_to_mean(const BinPartition& part, const ProxyCurve& proxy,
                   const LearntCurve& learnt);

Scalar mean_fit_to_ground_truth(const synthdata::DatasetSpec& spec,
                                const BinPartition& part,
                                const LearntCurve& learnt,
                                const Vec& input_medians);

struct MeasureReport {
  Scalar mae = 0.0;
  Scalar mse = 0.0;
  Scalar mftm = 0.0;
  Scalar fit_to_mean = 0.0;
  std::optional<Scalar> mfgt;  // absent when the ground truth is unknown
  std::int64_t complexity = 0;
  bool diverged = false;
};

// What evaluate() needs to know about a model beyond its predictions.
struct ModelUnderTest {
  Predictor predict;
  std::int64_t complexity = 0;
  bool diverged = false;
};

// Partition, proxies, medians and the holdout slice for one dataset;
// built once and shared across every model evaluated against it.
struct EvalContext {
  BinPartition part;
  ProxyCurve proxy;
  Vec input_medians;
  std::vector<Index> holdout;
};

EvalContext make_context(const synthdata::Dataset& data, Index n_bins = 100,
                         Index min_occupancy = 5);

MeasureReport evaluate(const ModelUnderTest& model, const synthdata::Dataset& data,
                       const EvalContext& ctx,
                       const synthdata::DatasetSpec* spec_or_null);

MeasureReport evaluate(const ModelUnderTest& model, const synthdata::Dataset& data,
                       const synthdata::DatasetSpec* spec_or_null,
                       Index n_bins = 100, Index min_occupancy = 5);

std::string to_json(const MeasureReport& report);

// CSV overlay of proxy and learnt curves:
// input_index,bin_index,midpoint,median_y,mean_y,learnt_y,occupancy
void write_curves_csv(const BinPartition& part, const ProxyCurve& proxy,
                      const LearntCurve& learnt, const std::string& path);

}  // namespace gtbench::measures
