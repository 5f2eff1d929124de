#include "gtbench/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gtbench/split.hpp"

namespace gtbench::measures {

namespace {

constexpr Scalar kNaN = std::numeric_limits<Scalar>::quiet_NaN();

Scalar median_of(std::vector<Scalar> values) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("median of empty set");
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  const Scalar upper = values[mid];
  if (n % 2 == 1) return upper;
  const Scalar lower = *std::max_element(
      values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

// Mean over occupied bins of |reference - learnt|, averaged over usable
// inputs. Inputs with no occupied bin drop out of the outer mean.
template <typename ReferenceAt>
Scalar curve_distance(const BinPartition& part, const LearntCurve& learnt,
                      ReferenceAt&& reference_at) {
  if (learnt.inputs.size() != part.inputs.size()) {
    throw std::invalid_argument("learnt curve not aligned with partition");
  }
  Scalar outer_sum = 0.0;
  int inputs_used = 0;
  for (std::size_t j = 0; j < part.inputs.size(); ++j) {
    const auto& bins = part.inputs[j];
    if (!bins.usable) continue;
    Scalar inner_sum = 0.0;
    Index occupied = 0;
    for (Index i = 0; i < part.n_bins; ++i) {
      const auto is = static_cast<std::size_t>(i);
      if (!bins.occupied[is]) continue;
      inner_sum += std::abs(reference_at(j, i) - learnt.inputs[j][is]);
      ++occupied;
    }
    if (occupied == 0) continue;
    outer_sum += inner_sum / static_cast<Scalar>(occupied);
    ++inputs_used;
  }
  if (inputs_used == 0) {
    throw std::runtime_error("curve measure undefined: no input has an occupied bin");
  }
  return outer_sum / static_cast<Scalar>(inputs_used);
}

std::string fmt17(Scalar v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Scalar minkowski_error(const Vec& y, const Vec& yhat, Scalar r) {
  if (y.size() != yhat.size()) {
    throw std::invalid_argument("minkowski_error: length mismatch");
  }
  if (y.size() < 1) throw std::invalid_argument("minkowski_error: empty vectors");
  if (!(r >= 1.0)) throw std::invalid_argument("minkowski_error: r must be >= 1");
  Scalar sum = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    sum += std::pow(std::abs(y[i] - yhat[i]), r);
  }
  return sum / static_cast<Scalar>(y.size());
}

int BinPartition::usable_input_count() const {
  int count = 0;
  for (const auto& bins : inputs) count += bins.usable ? 1 : 0;
  return count;
}

BinPartition partition(const synthdata::Dataset& data, Index n_bins,
                       Index min_occupancy) {
  if (n_bins < 2) throw std::invalid_argument("partition: n_bins must be >= 2");
  if (data.rows() < 1) throw std::invalid_argument("partition: empty dataset");

  BinPartition part;
  part.n_bins = n_bins;
  part.min_occupancy = min_occupancy;
  part.inputs.resize(static_cast<std::size_t>(data.num_inputs()));

  for (int j = 0; j < data.num_inputs(); ++j) {
    auto& bins = part.inputs[static_cast<std::size_t>(j)];
    const auto column = data.inputs().col(j);
    bins.lo = column.minCoeff();
    bins.hi = column.maxCoeff();
    if (!(bins.hi > bins.lo)) {
      bins.usable = false;
      bins.members.assign(static_cast<std::size_t>(n_bins), {});
      bins.occupied.assign(static_cast<std::size_t>(n_bins), false);
      continue;
    }
    bins.bin_width = (bins.hi - bins.lo) / static_cast<Scalar>(n_bins);
    bins.members.assign(static_cast<std::size_t>(n_bins), {});
    for (Index k = 0; k < data.rows(); ++k) {
      auto bin = static_cast<Index>((column[k] - bins.lo) / bins.bin_width);
      bin = std::clamp(bin, Index{0}, n_bins - 1);  // right edge closes the last bin
      bins.members[static_cast<std::size_t>(bin)].push_back(k);
    }
    bins.occupied.resize(static_cast<std::size_t>(n_bins));
    for (Index i = 0; i < n_bins; ++i) {
      const auto is = static_cast<std::size_t>(i);
      bins.occupied[is] =
          static_cast<Index>(bins.members[is].size()) >= min_occupancy;
    }
  }
  return part;
}

ProxyCurve proxy_curves(const synthdata::Dataset& data, const BinPartition& part) {
  if (part.inputs.size() != static_cast<std::size_t>(data.num_inputs())) {
    throw std::invalid_argument("partition built from a different dataset");
  }
  ProxyCurve proxy;
  proxy.inputs.resize(part.inputs.size());
  std::vector<Scalar> member_y;
  for (std::size_t j = 0; j < part.inputs.size(); ++j) {
    const auto& bins = part.inputs[j];
    auto& curve = proxy.inputs[j];
    const auto nb = static_cast<std::size_t>(part.n_bins);
    curve.median_y.assign(nb, kNaN);
    curve.mean_y.assign(nb, kNaN);
    curve.occupied = bins.occupied;
    if (!bins.usable) continue;
    for (std::size_t i = 0; i < nb; ++i) {
      if (!bins.occupied[i]) continue;
      member_y.clear();
      Scalar sum = 0.0;
      for (Index row : bins.members[i]) {
        const Scalar y = data.outputs()[row];
        member_y.push_back(y);
        sum += y;
      }
      curve.median_y[i] = median_of(member_y);
      curve.mean_y[i] = sum / static_cast<Scalar>(member_y.size());
    }
  }
  return proxy;
}

Vec column_medians(const synthdata::Dataset& data) {
  Vec medians(data.num_inputs());
  std::vector<Scalar> column(static_cast<std::size_t>(data.rows()));
  for (int j = 0; j < data.num_inputs(); ++j) {
    for (Index k = 0; k < data.rows(); ++k) {
      column[static_cast<std::size_t>(k)] = data.inputs()(k, j);
    }
    medians[j] = median_of(column);
  }
  return medians;
}

LearntCurve probe(const Predictor& model, const BinPartition& part,
                  const Vec& input_medians) {
  if (input_medians.size() != static_cast<Index>(part.inputs.size())) {
    throw std::invalid_argument("probe: medians length disagrees with partition");
  }
  LearntCurve learnt;
  learnt.inputs.resize(part.inputs.size());
  Vec x = input_medians;
  for (std::size_t j = 0; j < part.inputs.size(); ++j) {
    const auto& bins = part.inputs[j];
    auto& curve = learnt.inputs[j];
    curve.assign(static_cast<std::size_t>(part.n_bins), kNaN);
    if (!bins.usable) continue;
    for (Index i = 0; i < part.n_bins; ++i) {
      const auto is = static_cast<std::size_t>(i);
      if (!bins.occupied[is]) continue;
      x[static_cast<Index>(j)] = bins.midpoint(i);
      const Scalar value = model(x);
      if (!std::isfinite(value)) {
        throw std::runtime_error("probe: model evaluation failed at input " +
                                 std::to_string(j) + ", bin " + std::to_string(i));
      }
      curve[is] = value;
    }
    x[static_cast<Index>(j)] = input_medians[static_cast<Index>(j)];
  }
  return learnt;
}

Scalar mean_fit_to_median(const BinPartition& part, const ProxyCurve& proxy,
                          const LearntCurve& learnt) {
  return curve_distance(part, learnt, [&](std::size_t j, Index i) {
    return proxy.inputs[j].median_y[static_cast<std::size_t>(i)];
  });
}

Scalar fit_to_mean(const BinPartition& part, const ProxyCurve& proxy,
                   const LearntCurve& learnt) {
  return curve_distance(part, learnt, [&](std::size_t j, Index i) {
    return proxy.inputs[j].mean_y[static_cast<std::size_t>(i)];
  });
}

Scalar mean_fit_to_ground_truth(const synthdata::DatasetSpec& spec,
                                const BinPartition& part,
                                const LearntCurve& learnt,
                                const Vec& input_medians) {
  Vec x = input_medians;
  return curve_distance(part, learnt, [&](std::size_t j, Index i) {
    x[static_cast<Index>(j)] = part.inputs[j].midpoint(i);
    const Scalar truth = synthdata::ground_truth(spec, x);
    x[static_cast<Index>(j)] = input_medians[static_cast<Index>(j)];
    return truth;
  });
}

EvalContext make_context(const synthdata::Dataset& data, Index n_bins,
                         Index min_occupancy) {
  EvalContext ctx;
  ctx.part = partition(data, n_bins, min_occupancy);
  ctx.proxy = proxy_curves(data, ctx.part);
  ctx.input_medians = column_medians(data);
  ctx.holdout = evaluation_split(data.spec().seed, data.rows()).holdout;
  return ctx;
}

MeasureReport evaluate(const ModelUnderTest& model, const synthdata::Dataset& data,
                       const EvalContext& ctx,
                       const synthdata::DatasetSpec* spec_or_null) {
  MeasureReport report;
  report.complexity = model.complexity;
  report.diverged = model.diverged;
  if (model.diverged) return report;

  Vec y(static_cast<Index>(ctx.holdout.size()));
  Vec yhat(static_cast<Index>(ctx.holdout.size()));
  for (std::size_t i = 0; i < ctx.holdout.size(); ++i) {
    const Index row = ctx.holdout[i];
    y[static_cast<Index>(i)] = data.outputs()[row];
    yhat[static_cast<Index>(i)] = model.predict(data.inputs().row(row).transpose());
  }
  report.mae = minkowski_error(y, yhat, 1.0);
  report.mse = minkowski_error(y, yhat, 2.0);

  const LearntCurve learnt = probe(model.predict, ctx.part, ctx.input_medians);
  report.mftm = mean_fit_to_median(ctx.part, ctx.proxy, learnt);
  report.fit_to_mean = measures::fit_to_mean(ctx.part, ctx.proxy, learnt);
  if (spec_or_null != nullptr) {
    report.mfgt = mean_fit_to_ground_truth(*spec_or_null, ctx.part, learnt,
                                           ctx.input_medians);
  }
  return report;
}

MeasureReport evaluate(const ModelUnderTest& model, const synthdata::Dataset& data,
                       const synthdata::DatasetSpec* spec_or_null, Index n_bins,
                       Index min_occupancy) {
  return evaluate(model, data, make_context(data, n_bins, min_occupancy),
                  spec_or_null);
}

std::string to_json(const MeasureReport& report) {
  nlohmann::json doc{
      {"mae", report.mae},           {"mse", report.mse},
      {"mftm", report.mftm},         {"fit_to_mean", report.fit_to_mean},
      {"complexity", report.complexity}, {"diverged", report.diverged},
  };
  doc["mfgt"] = report.mfgt.has_value() ? nlohmann::json(*report.mfgt)
                                        : nlohmann::json(nullptr);
  return doc.dump(2);
}

void write_curves_csv(const BinPartition& part, const ProxyCurve& proxy,
                      const LearntCurve& learnt, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "input_index,bin_index,midpoint,median_y,mean_y,learnt_y,occupancy\n";
  for (std::size_t j = 0; j < part.inputs.size(); ++j) {
    const auto& bins = part.inputs[j];
    if (!bins.usable) continue;
    for (Index i = 0; i < part.n_bins; ++i) {
      const auto is = static_cast<std::size_t>(i);
      if (!bins.occupied[is]) continue;
      out << j << ',' << i << ',' << fmt17(bins.midpoint(i)) << ','
          << fmt17(proxy.inputs[j].median_y[is]) << ','
          << fmt17(proxy.inputs[j].mean_y[is]) << ','
          << fmt17(learnt.inputs[j][is]) << ',' << bins.members[is].size() << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gtbench::measures
