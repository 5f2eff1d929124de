#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gtbench/analysis.hpp"
#include "gtbench/types.hpp"

namespace gtbench::harness {

struct ExperimentConfig {
  std::vector<char> archetypes{'a', 'b', 'c', 'd', 'e', 'f',
                               'g', 'h', 'i', 'j', 'k', 'l'};
  int replicates_per_archetype = 3;
  Index n_obs = 100000;
  int networks_per_dataset = 150;
  int max_layers = 3;
  int max_width = 128;
  Index n_bins = 100;
  Index min_occupancy = 5;
  std::uint64_t master_seed = 0;
  int worker_count = 0;  // 0 = hardware concurrency
  std::string output_directory;
};

void validate(const ExperimentConfig& cfg);

std::string to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

// Stable per-run seed so scheduling order can never change results.
std::uint64_t run_seed(std::uint64_t master_seed, char archetype, int replicate,
                       int net_index);
std::uint64_t dataset_seed(std::uint64_t master_seed, char archetype, int replicate);

// Trains and evaluates every (archetype, replicate, network) task, writing
// an append-only CSV journal under cfg.output_directory. Tasks already in
// the journal are skipped, so an interrupted sweep resumes where it
// stopped. Honors GT_BENCH_THREADS over cfg.worker_count.
analysis::SweepTable run_sweep(const ExperimentConfig& cfg);

std::string sweep_csv_header();
std::string sweep_csv_line(const analysis::SweepRow& row);
void write_sweep_csv(const analysis::SweepTable& table, const std::string& path);
analysis::SweepTable load_sweep_csv(const std::string& path);

// Emits heatmap/scatter CSVs, SVG plots and a text summary for a sweep
// table into out_dir.
void report(const std::string& table_path, const std::string& out_dir);

}  // namespace gtbench::harness
