#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "gtbench/analysis.hpp"
#include "gtbench/harness.hpp"
#include "gtbench/synthdata.hpp"

namespace gtbench::harness {

namespace {

namespace fs = std::filesystem;

std::string fmt17(Scalar v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt4(Scalar v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string degree_range_string(char archetype) {
  const auto range = synthdata::archetype_degree_range(archetype);
  return std::to_string(range[0]) + "-" + std::to_string(range[1]);
}

std::string sigma_string(char archetype) {
  const Scalar sigma = synthdata::archetype_noise_std(archetype);
  if (sigma == 0.1) return "0.1";
  return std::to_string(static_cast<int>(sigma));
}

struct DatasetKey {
  char archetype;
  int replicate;
  bool operator<(const DatasetKey& other) const {
    return archetype != other.archetype ? archetype < other.archetype
                                        : replicate < other.replicate;
  }
};

struct DatasetAnalysis {
  analysis::SweepTable usable_rows;
  std::vector<analysis::RegressionSummary> summaries;  // empty if too few rows
  std::map<std::string, Vec> normalized;               // per measure + mfgt
  std::optional<Scalar> mae_on_mftm_slope;
  std::optional<Scalar> complexity_mfgt_correlation;
};

// Clip the regression line to the unit box; nullopt when it misses.
std::optional<std::array<Scalar, 4>> clip_line(Scalar slope, Scalar intercept) {
  std::vector<std::pair<Scalar, Scalar>> pts;
  const auto push = [&](Scalar x, Scalar y) {
    if (x >= -1e-9 && x <= 1.0 + 1e-9 && y >= -1e-9 && y <= 1.0 + 1e-9) {
      pts.emplace_back(std::clamp(x, 0.0, 1.0), std::clamp(y, 0.0, 1.0));
    }
  };
  push(0.0, intercept);
  push(1.0, intercept + slope);
  if (slope != 0.0) {
    push((0.0 - intercept) / slope, 0.0);
    push((1.0 - intercept) / slope, 1.0);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 2) return std::nullopt;
  return std::array<Scalar, 4>{pts.front().first, pts.front().second,
                               pts.back().first, pts.back().second};
}

std::string svg_scatter(const std::string& title, const std::string& x_label,
                        const Vec& x, const Vec& y,
                        const analysis::RegressionSummary* line) {
  constexpr int kSize = 640;
  constexpr int kMargin = 60;
  const auto px = [&](Scalar v) {
    return kMargin + v * (kSize - 2 * kMargin);
  };
  const auto py = [&](Scalar v) {
    return kSize - kMargin - v * (kSize - 2 * kMargin);
  };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize
      << "\" height=\"" << kSize << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kSize / 2 << "\" y=\"30\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  svg << "<line x1=\"" << px(0.0) << "\" y1=\"" << py(0.0) << "\" x2=\"" << px(1.0)
      << "\" y2=\"" << py(0.0) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << px(0.0) << "\" y1=\"" << py(0.0) << "\" x2=\"" << px(0.0)
      << "\" y2=\"" << py(1.0) << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << kSize / 2 << "\" y=\"" << kSize - 15
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << x_label << "</text>\n";
  svg << "<text x=\"18\" y=\"" << kSize / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 18 " << kSize / 2
      << ")\">normalized mean fit to ground truth</text>\n";
  for (Index i = 0; i < x.size(); ++i) {
    svg << "<circle cx=\"" << fmt4(px(x[i])) << "\" cy=\"" << fmt4(py(y[i]))
        << "\" r=\"2.2\" fill=\"#1f77b4\" fill-opacity=\"0.55\"/>\n";
  }
  if (line != nullptr) {
    if (const auto seg = clip_line(line->slope, line->intercept)) {
      svg << "<line x1=\"" << fmt4(px((*seg)[0])) << "\" y1=\"" << fmt4(py((*seg)[1]))
          << "\" x2=\"" << fmt4(px((*seg)[2])) << "\" y2=\"" << fmt4(py((*seg)[3]))
          << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    }
    svg << "<text x=\"" << kSize - kMargin << "\" y=\"50\" text-anchor=\"end\" "
           "font-family=\"sans-serif\" font-size=\"13\">R^2 = "
        << fmt4(line->r_squared) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string svg_heatmap(const analysis::HeatmapGrid& grid) {
  constexpr int kCellW = 150, kCellH = 100, kLeft = 90, kTop = 70;
  const int width = kLeft + 3 * kCellW + 30;
  const int height = kTop + 4 * kCellH + 30;
  const std::array<std::string, 4> sigma_labels{"0.1", "1", "10", "100"};
  const std::array<std::string, 3> degree_labels{"P0-1", "P2-3", "P4-5"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">mean R^2: " << grid.measure
      << " vs mean fit to ground truth</text>\n";
  for (std::size_t col = 0; col < 3; ++col) {
    svg << "<text x=\"" << kLeft + static_cast<int>(col) * kCellW + kCellW / 2
        << "\" y=\"" << kTop - 12 << "\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"13\">" << degree_labels[col]
        << "</text>\n";
  }
  for (std::size_t row = 0; row < 4; ++row) {
    svg << "<text x=\"" << kLeft - 12 << "\" y=\""
        << kTop + static_cast<int>(row) * kCellH + kCellH / 2 + 5
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"13\">"
        << "sigma " << sigma_labels[row] << "</text>\n";
    for (std::size_t col = 0; col < 3; ++col) {
      const int x = kLeft + static_cast<int>(col) * kCellW;
      const int y = kTop + static_cast<int>(row) * kCellH;
      const auto& cell = grid.mean_r2[row][col];
      std::string fill = "#dddddd";
      std::string label = "n/a";
      if (cell.has_value()) {
        const Scalar v = std::clamp(*cell, 0.0, 1.0);
        const int r = static_cast<int>(40 + 215 * v);
        const int g = static_cast<int>(60 + 140 * v);
        const int b = static_cast<int>(200 - 160 * v);
        char color[8];
        std::snprintf(color, sizeof(color), "#%02x%02x%02x", r, g, b);
        fill = color;
        label = fmt4(*cell);
      }
      svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCellW
          << "\" height=\"" << kCellH << "\" fill=\"" << fill
          << "\" stroke=\"white\" stroke-width=\"3\"/>\n";
      svg << "<text x=\"" << x + kCellW / 2 << "\" y=\"" << y + kCellH / 2 + 5
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"15\">" << label << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

void report(const std::string& table_path, const std::string& out_dir) {
  const analysis::SweepTable table = load_sweep_csv(table_path);

  std::map<DatasetKey, analysis::SweepTable> datasets;
  Index diverged = 0;
  Index usable_total = 0;
  for (const analysis::SweepRow& row : table) {
    if (row.diverged) {
      ++diverged;
      continue;
    }
    if (!row.mae || !row.mse || !row.mftm || !row.fit_to_mean || !row.mfgt) continue;
    datasets[{row.archetype, row.replicate}].push_back(row);
    ++usable_total;
  }
  if (usable_total == 0) {
    throw std::runtime_error("report: table holds no usable measure rows");
  }

  // All analysis happens before any file is written.
  std::map<DatasetKey, DatasetAnalysis> analyses;
  for (const auto& [key, rows] : datasets) {
    DatasetAnalysis entry;
    entry.usable_rows = rows;

    const auto column = [&](auto&& get) {
      Vec v(static_cast<Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        v[static_cast<Index>(i)] = get(rows[i]);
      }
      return v;
    };
    try {
      entry.normalized["mfgt"] =
          analysis::normalize(column([](const auto& r) { return *r.mfgt; }));
      for (analysis::Measure measure : analysis::kAllMeasures) {
        entry.normalized[analysis::measure_name(measure)] = analysis::normalize(
            column([&](const auto& r) { return *analysis::measure_value(r, measure); }));
      }
    } catch (const std::invalid_argument&) {
      entry.normalized.clear();  // constant column; dataset kept without scatter
    }

    if (rows.size() >= 30) {
      entry.summaries = analysis::compare_measures(rows);
      if (!entry.normalized.empty()) {
        entry.mae_on_mftm_slope =
            analysis::regress(entry.normalized["mftm"], entry.normalized["mae"]).slope;
      }
      const analysis::BifurcationReport bif = analysis::bifurcation_report(rows);
      if (auto it = bif.complexity_correlation.find("mfgt");
          it != bif.complexity_correlation.end()) {
        entry.complexity_mfgt_correlation = it->second;
      }
    }
    analyses[key] = std::move(entry);
  }

  std::vector<analysis::ArchetypeSummaries> by_archetype;
  for (const auto& [key, entry] : analyses) {
    if (entry.summaries.empty()) continue;
    if (by_archetype.empty() || by_archetype.back().archetype != key.archetype) {
      by_archetype.push_back({key.archetype, {}});
    }
    by_archetype.back().replicates.push_back(entry.summaries);
  }
  const std::vector<analysis::HeatmapGrid> grids = analysis::grid_heatmap(by_archetype);

  fs::create_directories(out_dir);
  const auto path = [&](const std::string& name) {
    return (fs::path(out_dir) / name).string();
  };

  {
    std::ofstream out(path("heatmap.csv"));
    out << "archetype,sigma,degree_range,measure,mean_r2,n_replicates\n";
    for (const analysis::ArchetypeSummaries& arch : by_archetype) {
      const int row = (arch.archetype - 'a') / 3;
      const int col = (arch.archetype - 'a') % 3;
      for (const analysis::HeatmapGrid& grid : grids) {
        const auto& cell =
            grid.mean_r2[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
        if (!cell.has_value()) continue;
        out << arch.archetype << ',' << sigma_string(arch.archetype) << ','
            << degree_range_string(arch.archetype) << ',' << grid.measure << ','
            << fmt17(*cell) << ','
            << grid.n_replicates[static_cast<std::size_t>(row)]
                               [static_cast<std::size_t>(col)]
            << '\n';
      }
    }
  }

  {
    std::ofstream out(path("scatter.csv"));
    out << "run_id,measure,value_normalized,mfgt_normalized,complexity,"
           "mftm_minus_fitmean\n";
    for (const auto& [key, entry] : analyses) {
      if (entry.normalized.empty()) continue;
      const Vec& mfgt_norm = entry.normalized.at("mfgt");
      for (analysis::Measure measure : analysis::kAllMeasures) {
        const Vec& value_norm = entry.normalized.at(analysis::measure_name(measure));
        for (std::size_t i = 0; i < entry.usable_rows.size(); ++i) {
          const analysis::SweepRow& row = entry.usable_rows[i];
          out << row.run_id << ',' << analysis::measure_name(measure) << ','
              << fmt17(value_norm[static_cast<Index>(i)]) << ','
              << fmt17(mfgt_norm[static_cast<Index>(i)]) << ',' << row.complexity
              << ',' << fmt17(*row.mftm - *row.fit_to_mean) << '\n';
        }
      }
    }
  }

  for (const analysis::HeatmapGrid& grid : grids) {
    if (grid.measure != "mae" && grid.measure != "mftm") continue;
    std::ofstream out(path("heatmap_" + grid.measure + ".svg"));
    out << svg_heatmap(grid);
  }

  for (const auto& [key, entry] : analyses) {
    if (key.replicate != 0 || entry.summaries.empty() || entry.normalized.empty()) {
      continue;
    }
    for (const analysis::RegressionSummary& summary : entry.summaries) {
      if (summary.measure_name != "mae" && summary.measure_name != "mftm") continue;
      const std::string name =
          std::string("scatter_") + key.archetype + "_" + summary.measure_name + ".svg";
      std::ofstream out(path(name));
      out << svg_scatter(
          std::string("archetype ") + key.archetype + ": " + summary.measure_name +
              " vs mean fit to ground truth",
          "normalized " + summary.measure_name, entry.normalized.at(summary.measure_name),
          entry.normalized.at("mfgt"), &summary);
    }
  }

  {
    std::ofstream out(path("summary.txt"));
    out << "sweep report\n";
    out << "table: " << fs::path(table_path).filename().string() << '\n';
    out << "rows: " << table.size() << " (diverged: " << diverged << ")\n\n";

    out << "per-dataset R^2 against mean fit to ground truth\n";
    out << "archetype replicate sigma degrees   r2_mae   r2_mse  r2_mftm r2_fitmean\n";
    std::map<char, std::pair<Scalar, Scalar>> archetype_r2;  // sums of (mae, mftm)
    std::map<char, int> archetype_n;
    std::vector<Scalar> improvements_by_dataset;
    int positive_slopes = 0, slope_count = 0;
    Scalar abs_corr_sum = 0.0;
    int corr_count = 0;
    int skipped = 0;
    for (const auto& [key, entry] : analyses) {
      if (entry.summaries.empty()) {
        ++skipped;
        continue;
      }
      Scalar r2_mae = 0, r2_mse = 0, r2_mftm = 0, r2_fitmean = 0;
      for (const analysis::RegressionSummary& s : entry.summaries) {
        if (s.measure_name == "mae") r2_mae = s.r_squared;
        if (s.measure_name == "mse") r2_mse = s.r_squared;
        if (s.measure_name == "mftm") r2_mftm = s.r_squared;
        if (s.measure_name == "fit_to_mean") r2_fitmean = s.r_squared;
      }
      char line[160];
      std::snprintf(line, sizeof(line), "%c         %-9d %-5s %-7s %8.4f %8.4f %8.4f %10.4f\n",
                    key.archetype, key.replicate, sigma_string(key.archetype).c_str(),
                    degree_range_string(key.archetype).c_str(), r2_mae, r2_mse,
                    r2_mftm, r2_fitmean);
      out << line;
      improvements_by_dataset.push_back(r2_mftm - r2_mae);
      archetype_r2[key.archetype].first += r2_mae;
      archetype_r2[key.archetype].second += r2_mftm;
      archetype_n[key.archetype] += 1;
      if (entry.mae_on_mftm_slope.has_value()) {
        ++slope_count;
        if (*entry.mae_on_mftm_slope > 0.0) ++positive_slopes;
      }
      if (entry.complexity_mfgt_correlation.has_value()) {
        abs_corr_sum += std::abs(*entry.complexity_mfgt_correlation);
        ++corr_count;
      }
    }
    if (skipped > 0) {
      out << "(" << skipped << " dataset(s) below the 30-row regression minimum)\n";
    }

    out << "\nper-archetype mean R^2 (over replicates)\n";
    out << "archetype  r2_mae  r2_mftm  improvement\n";
    Scalar improvement_by_archetype_sum = 0.0;
    for (const auto& [archetype, sums] : archetype_r2) {
      const Scalar n = static_cast<Scalar>(archetype_n[archetype]);
      const Scalar mean_mae = sums.first / n;
      const Scalar mean_mftm = sums.second / n;
      improvement_by_archetype_sum += mean_mftm - mean_mae;
      char line[96];
      std::snprintf(line, sizeof(line), "%c          %6.4f  %6.4f  %10.4f\n", archetype,
                    mean_mae, mean_mftm, mean_mftm - mean_mae);
      out << line;
    }

    if (!improvements_by_dataset.empty()) {
      Scalar sum = 0.0;
      for (Scalar v : improvements_by_dataset) sum += v;
      out << "\nmean R^2 improvement (mftm over mae), by dataset: "
          << fmt4(sum / static_cast<Scalar>(improvements_by_dataset.size())) << " (n="
          << improvements_by_dataset.size() << ")\n";
    }
    if (!archetype_r2.empty()) {
      out << "mean R^2 improvement (mftm over mae), by archetype: "
          << fmt4(improvement_by_archetype_sum /
                  static_cast<Scalar>(archetype_r2.size()))
          << " (n=" << archetype_r2.size() << ")\n";
    }
    if (slope_count > 0) {
      out << "datasets where MAE falls as MFTM falls: " << positive_slopes << " of "
          << slope_count << " ("
          << fmt4(static_cast<Scalar>(positive_slopes) /
                  static_cast<Scalar>(slope_count))
          << ")\n";
    }
    if (corr_count > 0) {
      out << "mean |corr(complexity, mfgt)| over datasets: "
          << fmt4(abs_corr_sum / static_cast<Scalar>(corr_count)) << "\n";
    }
  }
}

}  // namespace gtbench::harness
