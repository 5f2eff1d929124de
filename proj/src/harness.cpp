#include "gtbench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "gtbench/measures.hpp"
#include "gtbench/mlp.hpp"
#include "gtbench/rng.hpp"
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

std::string shape_string(const std::vector<int>& widths) {
  std::string out;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i > 0) out += 'x';
    out += std::to_string(widths[i]);
  }
  return out;
}

std::vector<int> parse_shape(const std::string& text) {
  std::vector<int> widths;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) widths.push_back(std::stoi(part));
  return widths;
}

std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, sep)) cells.push_back(cell);
  if (!line.empty() && line.back() == sep) cells.emplace_back();
  return cells;
}

constexpr const char* kSweepHeader =
    "run_id,archetype,replicate,dataset_seed,net_seed,shape,complexity,"
    "epochs_run,diverged,mae,mse,mftm,fit_to_mean,mfgt";

std::optional<Scalar> parse_optional(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  return std::stod(cell);
}

analysis::SweepRow parse_row(const std::string& line) {
  const auto cells = split_line(line, ',');
  if (cells.size() != 14) {
    throw std::runtime_error("expected 14 cells, found " +
                             std::to_string(cells.size()));
  }
  analysis::SweepRow row;
  row.run_id = std::stoll(cells[0]);
  if (cells[1].size() != 1) throw std::runtime_error("bad archetype cell");
  row.archetype = cells[1][0];
  row.replicate = std::stoi(cells[2]);
  row.dataset_seed = std::stoull(cells[3]);
  row.net_seed = std::stoull(cells[4]);
  row.shape = parse_shape(cells[5]);
  row.complexity = std::stoll(cells[6]);
  row.epochs_run = std::stoi(cells[7]);
  row.diverged = cells[8] == "1";
  row.mae = parse_optional(cells[9]);
  row.mse = parse_optional(cells[10]);
  row.mftm = parse_optional(cells[11]);
  row.fit_to_mean = parse_optional(cells[12]);
  row.mfgt = parse_optional(cells[13]);
  return row;
}

int resolve_worker_count(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("GT_BENCH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  if (cfg.worker_count > 0) return cfg.worker_count;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  if (cfg.archetypes.empty()) throw std::invalid_argument("config: no archetypes");
  for (char a : cfg.archetypes) {
    synthdata::archetype_noise_std(a);  // throws on unknown letters
  }
  if (cfg.replicates_per_archetype < 1 || cfg.n_obs < 1 ||
      cfg.networks_per_dataset < 1 || cfg.n_bins < 2 || cfg.min_occupancy < 1) {
    throw std::invalid_argument("config: counts must be positive");
  }
  if (cfg.max_layers < 1 || cfg.max_layers > 3) {
    throw std::invalid_argument("config: max_layers must lie in [1,3]");
  }
  if (cfg.max_width < 1 || cfg.max_width > 1000) {
    throw std::invalid_argument("config: max_width must lie in [1,1000]");
  }
  if (cfg.worker_count < 0) throw std::invalid_argument("config: negative workers");
  if (cfg.output_directory.empty()) {
    throw std::invalid_argument("config: output_directory required");
  }
}

std::string to_json(const ExperimentConfig& cfg) {
  std::vector<std::string> archetypes;
  for (char a : cfg.archetypes) archetypes.emplace_back(1, a);
  const nlohmann::json doc{
      {"archetypes", archetypes},
      {"replicates_per_archetype", cfg.replicates_per_archetype},
      {"n_obs", cfg.n_obs},
      {"networks_per_dataset", cfg.networks_per_dataset},
      {"max_layers", cfg.max_layers},
      {"max_width", cfg.max_width},
      {"n_bins", cfg.n_bins},
      {"min_occupancy", cfg.min_occupancy},
      {"master_seed", cfg.master_seed},
      {"worker_count", cfg.worker_count},
      {"output_directory", cfg.output_directory},
  };
  return doc.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  ExperimentConfig cfg;
  cfg.archetypes.clear();
  for (const auto& entry : doc.at("archetypes")) {
    const auto s = entry.get<std::string>();
    if (s.size() != 1) throw std::runtime_error("config: bad archetype " + s);
    cfg.archetypes.push_back(s[0]);
  }
  cfg.replicates_per_archetype = doc.at("replicates_per_archetype").get<int>();
  cfg.n_obs = doc.at("n_obs").get<Index>();
  cfg.networks_per_dataset = doc.at("networks_per_dataset").get<int>();
  cfg.max_layers = doc.at("max_layers").get<int>();
  cfg.max_width = doc.at("max_width").get<int>();
  cfg.n_bins = doc.at("n_bins").get<Index>();
  cfg.min_occupancy = doc.at("min_occupancy").get<Index>();
  cfg.master_seed = doc.at("master_seed").get<std::uint64_t>();
  cfg.worker_count = doc.at("worker_count").get<int>();
  cfg.output_directory = doc.at("output_directory").get<std::string>();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return config_from_json(text);
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_json(cfg) << '\n';
}

std::uint64_t dataset_seed(std::uint64_t master_seed, char archetype, int replicate) {
  return rng::derive(master_seed, rng::tag("dataset"),
                     static_cast<std::uint64_t>(archetype),
                     static_cast<std::uint64_t>(replicate));
}

std::uint64_t run_seed(std::uint64_t master_seed, char archetype, int replicate,
                       int net_index) {
  return rng::derive(master_seed, rng::tag("run"),
                     static_cast<std::uint64_t>(archetype),
                     static_cast<std::uint64_t>(replicate)) ^
         rng::mix64(static_cast<std::uint64_t>(net_index) + 0x51ed270b);
}

std::string sweep_csv_header() { return kSweepHeader; }

std::string sweep_csv_line(const analysis::SweepRow& row) {
  const auto opt = [](const std::optional<Scalar>& v) {
    return v.has_value() ? fmt17(*v) : std::string();
  };
  std::string line;
  line += std::to_string(row.run_id);
  line += ',';
  line += row.archetype;
  line += ',' + std::to_string(row.replicate);
  line += ',' + std::to_string(row.dataset_seed);
  line += ',' + std::to_string(row.net_seed);
  line += ',' + shape_string(row.shape);
  line += ',' + std::to_string(row.complexity);
  line += ',' + std::to_string(row.epochs_run);
  line += row.diverged ? ",1" : ",0";
  line += ',' + opt(row.mae);
  line += ',' + opt(row.mse);
  line += ',' + opt(row.mftm);
  line += ',' + opt(row.fit_to_mean);
  line += ',' + opt(row.mfgt);
  return line;
}

void write_sweep_csv(const analysis::SweepTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << kSweepHeader << '\n';
  for (const analysis::SweepRow& row : table) out << sweep_csv_line(row) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

analysis::SweepTable load_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader) {
    throw std::runtime_error(path + ": missing or unexpected header");
  }
  analysis::SweepTable table;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      table.push_back(parse_row(line));
    } catch (const std::exception& err) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                               err.what());
    }
  }
  return table;
}

namespace {

// Journal loader for resuming: a malformed final line is treated as an
// interrupted write and dropped (the file is rewritten without it); a
// malformed interior line is a real error.
analysis::SweepTable load_journal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader) {
    throw std::runtime_error(path + ": missing or unexpected header");
  }
  analysis::SweepTable table;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  in.close();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      table.push_back(parse_row(lines[i]));
    } catch (const std::exception& err) {
      if (i + 1 == lines.size()) {
        lines.pop_back();
        std::ofstream out(path);
        out << kSweepHeader << '\n';
        for (const std::string& keep : lines) out << keep << '\n';
        break;
      }
      throw std::runtime_error(path + ":" + std::to_string(i + 2) + ": " +
                               err.what());
    }
  }
  return table;
}

}  // namespace

analysis::SweepTable run_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  fs::create_directories(cfg.output_directory);
  const std::string journal_path =
      (fs::path(cfg.output_directory) / "sweep.csv").string();
  const std::string config_path =
      (fs::path(cfg.output_directory) / "config.json").string();
  if (!fs::exists(config_path)) save_config(cfg, config_path);

  analysis::SweepTable table;
  if (fs::exists(journal_path)) {
    table = load_journal(journal_path);
  } else {
    std::ofstream out(journal_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + journal_path);
    out << kSweepHeader << '\n';
  }
  std::vector<bool> done;
  const std::size_t total = cfg.archetypes.size() *
                            static_cast<std::size_t>(cfg.replicates_per_archetype) *
                            static_cast<std::size_t>(cfg.networks_per_dataset);
  done.assign(total, false);
  for (const analysis::SweepRow& row : table) {
    if (row.run_id >= 0 && static_cast<std::size_t>(row.run_id) < total) {
      done[static_cast<std::size_t>(row.run_id)] = true;
    }
  }

  std::ofstream journal(journal_path, std::ios::app);
  if (!journal) throw std::runtime_error("cannot append to: " + journal_path);
  std::mutex write_mutex;
  const int workers = resolve_worker_count(cfg);

  for (std::size_t arch_index = 0; arch_index < cfg.archetypes.size(); ++arch_index) {
    const char archetype = cfg.archetypes[arch_index];
    for (int replicate = 0; replicate < cfg.replicates_per_archetype; ++replicate) {
      std::vector<int> pending;
      const std::int64_t base =
          (static_cast<std::int64_t>(arch_index) * cfg.replicates_per_archetype +
           replicate) *
          cfg.networks_per_dataset;
      for (int i = 0; i < cfg.networks_per_dataset; ++i) {
        if (!done[static_cast<std::size_t>(base + i)]) pending.push_back(i);
      }
      if (pending.empty()) continue;

      const std::uint64_t data_seed =
          dataset_seed(cfg.master_seed, archetype, replicate);
      const synthdata::DatasetSpec spec =
          synthdata::make_spec(archetype, data_seed, cfg.n_obs);
      const synthdata::Dataset data = synthdata::generate(spec);
      const measures::EvalContext ctx =
          measures::make_context(data, cfg.n_bins, cfg.min_occupancy);

      std::atomic<std::size_t> next{0};
      std::exception_ptr failure;
      std::mutex failure_mutex;

      const auto worker = [&]() {
        try {
          while (true) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= pending.size()) return;
            const int net_index = pending[slot];
            const std::uint64_t seed =
                run_seed(cfg.master_seed, archetype, replicate, net_index);

            const mlp::NetworkShape shape =
                mlp::draw_shape(cfg.max_layers, cfg.max_width, seed);
            mlp::Network net = mlp::init_network(shape, spec.m, seed);
            mlp::TrainConfig train_cfg;
            train_cfg.seed = seed;
            const mlp::TrainReport trained = mlp::train(net, data, train_cfg);

            analysis::SweepRow row;
            row.run_id = base + net_index;
            row.archetype = archetype;
            row.replicate = replicate;
            row.dataset_seed = data_seed;
            row.net_seed = seed;
            row.shape = shape.neurons;
            row.complexity = mlp::complexity(net);
            row.epochs_run = trained.epochs_run;
            row.diverged = trained.diverged;
            if (!trained.diverged) {
              measures::ModelUnderTest model{
                  [&net](const Vec& x) { return mlp::forward(net, x); },
                  mlp::complexity(net), false};
              const measures::MeasureReport report =
                  measures::evaluate(model, data, ctx, &spec);
              row.mae = report.mae;
              row.mse = report.mse;
              row.mftm = report.mftm;
              row.fit_to_mean = report.fit_to_mean;
              row.mfgt = report.mfgt;
            }

            const std::lock_guard<std::mutex> lock(write_mutex);
            journal << sweep_csv_line(row) << '\n';
            journal.flush();
            if (!journal) throw std::runtime_error("journal write failed");
            table.push_back(std::move(row));
          }
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      };

      std::vector<std::thread> threads;
      const int n_threads = std::min<int>(workers, static_cast<int>(pending.size()));
      threads.reserve(static_cast<std::size_t>(n_threads));
      for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
      for (std::thread& t : threads) t.join();
      if (failure) std::rethrow_exception(failure);
    }
  }

  std::sort(table.begin(), table.end(),
            [](const analysis::SweepRow& a, const analysis::SweepRow& b) {
              return a.run_id < b.run_id;
            });
  return table;
}

}  // namespace gtbench::harness
