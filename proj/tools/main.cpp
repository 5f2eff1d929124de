// Command-line front end: dataset generation, single-network training,
// sweep execution, report emission and curve export.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gtbench/harness.hpp"
#include "gtbench/measures.hpp"
#include "gtbench/mlp.hpp"
#include "gtbench/synthdata.hpp"

namespace {

using namespace gtbench;

char parse_archetype(const std::string& text) {
  if (text.size() != 1) {
    throw std::invalid_argument("archetype must be a single letter a..l");
  }
  synthdata::archetype_noise_std(text[0]);
  return text[0];
}

synthdata::Dataset load_dataset(const std::string& prefix) {
  const synthdata::DatasetSpec spec =
      synthdata::read_spec_json(prefix + ".spec.json");
  return synthdata::read_csv(spec, prefix + ".csv");
}

int run(int argc, char** argv) {
  CLI::App app{"ground-truth fidelity benchmark for regression error measures"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a dataset and its spec sidecar");
  std::string gen_archetype;
  std::uint64_t gen_seed = 1;
  Index gen_n_obs = 100000;
  std::string gen_out;
  gen->add_option("--archetype", gen_archetype, "table row/column letter a..l")
      ->required();
  gen->add_option("--seed", gen_seed, "dataset seed");
  gen->add_option("--n-obs", gen_n_obs, "observation count");
  gen->add_option("--out", gen_out, "output prefix (writes <out>.csv and <out>.spec.json)")
      ->required();

  // train
  auto* train = app.add_subcommand("train", "train one network, print its measures as JSON");
  std::string train_data;
  std::uint64_t train_net_seed = 1;
  std::vector<int> train_widths;
  int train_max_layers = 3, train_max_width = 128;
  mlp::TrainConfig train_cfg;
  Index train_n_bins = 100, train_min_occupancy = 5;
  std::string train_save_model;
  train->add_option("--data", train_data, "dataset prefix from `gen`")->required();
  train->add_option("--net-seed", train_net_seed, "network seed");
  train->add_option("--widths", train_widths,
                    "explicit hidden widths (default: drawn from the seed)");
  train->add_option("--max-layers", train_max_layers, "shape bound when drawing");
  train->add_option("--max-width", train_max_width, "shape bound when drawing");
  train->add_option("--epochs", train_cfg.max_epochs, "epoch cap");
  train->add_option("--batch-size", train_cfg.batch_size, "batch size");
  train->add_option("--patience", train_cfg.patience, "early-stopping patience");
  train->add_option("--alpha", train_cfg.alpha, "AdaMax step size");
  train->add_option("--validation-fraction", train_cfg.validation_fraction,
                    "share of the training pool held for validation");
  train->add_option("--init-std", train_cfg.init_std, "parameter init stddev");
  train->add_option("--n-bins", train_n_bins, "partition bins");
  train->add_option("--min-occupancy", train_min_occupancy, "bin occupancy threshold");
  train->add_option("--save-model", train_save_model, "write the trained model JSON here");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run a full experiment from a config file");
  std::string sweep_config;
  sweep->add_option("--config", sweep_config, "experiment config JSON")->required();

  // report
  auto* report = app.add_subcommand("report", "emit analyses for a sweep table");
  std::string report_table, report_out;
  report->add_option("--table", report_table, "sweep.csv path")->required();
  report->add_option("--out-dir", report_out, "output directory")->required();

  // curves
  auto* curves = app.add_subcommand("curves", "export proxy/learnt curves for one model");
  std::string curves_data, curves_model, curves_out;
  Index curves_n_bins = 100, curves_min_occupancy = 5;
  curves->add_option("--data", curves_data, "dataset prefix from `gen`")->required();
  curves->add_option("--model", curves_model, "trained model JSON")->required();
  curves->add_option("--out", curves_out, "output CSV path")->required();
  curves->add_option("--n-bins", curves_n_bins, "partition bins");
  curves->add_option("--min-occupancy", curves_min_occupancy, "bin occupancy threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (gen->parsed()) {
    const char archetype = parse_archetype(gen_archetype);
    const synthdata::DatasetSpec spec =
        synthdata::make_spec(archetype, gen_seed, gen_n_obs);
    const synthdata::Dataset data = synthdata::generate(spec);
    synthdata::write_csv(data, gen_out + ".csv");
    synthdata::write_spec_json(spec, gen_out + ".spec.json");
    std::cout << "wrote " << gen_out << ".csv (" << data.rows() << " rows) and "
              << gen_out << ".spec.json\n";
    return 0;
  }

  if (train->parsed()) {
    const synthdata::Dataset data = load_dataset(train_data);
    mlp::NetworkShape shape;
    if (!train_widths.empty()) {
      shape.hidden_layers = static_cast<int>(train_widths.size());
      shape.neurons = train_widths;
    } else {
      shape = mlp::draw_shape(train_max_layers, train_max_width, train_net_seed);
    }
    train_cfg.seed = train_net_seed;
    mlp::Network net =
        mlp::init_network(shape, data.spec().m, train_net_seed, train_cfg.init_std);
    const mlp::TrainReport trained = mlp::train(net, data, train_cfg);

    measures::ModelUnderTest model{
        [&net](const Vec& x) { return mlp::forward(net, x); },
        mlp::complexity(net), trained.diverged};
    const synthdata::DatasetSpec& spec = data.spec();
    const measures::MeasureReport report =
        measures::evaluate(model, data, &spec, train_n_bins, train_min_occupancy);
    if (!train_save_model.empty()) mlp::save_network(net, train_save_model);
    std::cout << measures::to_json(report) << '\n';
    return 0;
  }

  if (sweep->parsed()) {
    const harness::ExperimentConfig cfg = harness::load_config(sweep_config);
    const analysis::SweepTable table = harness::run_sweep(cfg);
    std::cout << "sweep complete: " << table.size() << " rows in "
              << cfg.output_directory << "/sweep.csv\n";
    return 0;
  }

  if (report->parsed()) {
    harness::report(report_table, report_out);
    std::cout << "report written to " << report_out << '\n';
    return 0;
  }

  if (curves->parsed()) {
    const synthdata::Dataset data = load_dataset(curves_data);
    const mlp::Network net = mlp::load_network(curves_model);
    const measures::EvalContext ctx =
        measures::make_context(data, curves_n_bins, curves_min_occupancy);
    const measures::LearntCurve learnt = measures::probe(
        [&net](const Vec& x) { return mlp::forward(net, x); }, ctx.part,
        ctx.input_medians);
    measures::write_curves_csv(ctx.part, ctx.proxy, learnt, curves_out);
    std::cout << "curves written to " << curves_out << '\n';
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
}
