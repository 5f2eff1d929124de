// Brute-force reference implementations used to cross-check the library.
// Deliberately written with plain loops, std::sort and std::pow, sharing
// no code with the implementation under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace oracle {

using Row = std::vector<double>;
using Model = std::function<double(const Row&)>;

inline double minkowski(const std::vector<double>& y, const std::vector<double>& yhat,
                        double r) {
  if (y.size() != yhat.size() || y.empty()) throw std::invalid_argument("bad vectors");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    total += std::pow(std::abs(y[i] - yhat[i]), r);
  }
  return total / static_cast<double>(y.size());
}

inline double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

struct CurveMeasures {
  double mftm = 0.0;
  double fit_to_mean = 0.0;
  std::optional<double> mfgt;
};

// Ground truth callback: phi(probe point). Empty when unavailable.
using Truth = std::function<double(const Row&)>;

inline CurveMeasures curve_measures(const std::vector<Row>& x,
                                    const std::vector<double>& y, int n_bins,
                                    int min_occupancy, const Model& model,
                                    const Truth& truth) {
  const std::size_t n_rows = x.size();
  const std::size_t m = x.front().size();

  // observed column medians for the probe geometry
  Row medians(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> column;
    for (const Row& row : x) column.push_back(row[j]);
    medians[j] = median(column);
  }

  double sum_mftm = 0.0, sum_ftm = 0.0, sum_mfgt = 0.0;
  int used_mftm = 0, used_ftm = 0, used_mfgt = 0;

  for (std::size_t j = 0; j < m; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const Row& row : x) {
      lo = std::min(lo, row[j]);
      hi = std::max(hi, row[j]);
    }
    if (!(hi > lo)) continue;  // degenerate column
    const double width = (hi - lo) / n_bins;

    double input_mftm = 0.0, input_ftm = 0.0, input_mfgt = 0.0;
    int occupied = 0;
    for (int bin = 0; bin < n_bins; ++bin) {
      // the bin index of a point is floor((v - lo) / width) clamped into
      // range; that convention is part of the contract (the last bin is
      // closed on the right)
      std::vector<double> members;
      for (std::size_t k = 0; k < n_rows; ++k) {
        const double v = x[k][j];
        int assigned = static_cast<int>((v - lo) / width);
        assigned = std::max(0, std::min(n_bins - 1, assigned));
        if (assigned == bin) members.push_back(y[k]);
      }
      if (static_cast<int>(members.size()) < min_occupancy) continue;
      ++occupied;

      const double mid = lo + (bin + 0.5) * width;
      Row probe_point = medians;
      probe_point[j] = mid;
      const double learnt = model(probe_point);

      input_mftm += std::abs(median(members) - learnt);
      double mean = 0.0;
      for (double v : members) mean += v;
      mean /= static_cast<double>(members.size());
      input_ftm += std::abs(mean - learnt);
      if (truth) input_mfgt += std::abs(truth(probe_point) - learnt);
    }
    if (occupied == 0) continue;
    sum_mftm += input_mftm / occupied;
    ++used_mftm;
    sum_ftm += input_ftm / occupied;
    ++used_ftm;
    if (truth) {
      sum_mfgt += input_mfgt / occupied;
      ++used_mfgt;
    }
  }
  if (used_mftm == 0) throw std::runtime_error("oracle: no occupied bins anywhere");

  CurveMeasures out;
  out.mftm = sum_mftm / used_mftm;
  out.fit_to_mean = sum_ftm / used_ftm;
  if (truth) out.mfgt = sum_mfgt / used_mfgt;
  return out;
}

// Simple OLS + Pearson on raw arrays.
struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  Line line;
  line.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  line.intercept = (sy - line.slope * sx) / n;
  const double r = (n * sxy - sx * sy) /
                   std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  line.r_squared = r * r;
  return line;
}

}  // namespace oracle
