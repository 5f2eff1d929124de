#include "gtbench/synthdata.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gtbench/rng.hpp"

namespace gtbench::synthdata {

namespace {

constexpr std::array<Scalar, 4> kNoiseRows{0.1, 1.0, 10.0, 100.0};
constexpr std::array<std::array<int, 2>, 3> kDegreeColumns{
    {{0, 1}, {2, 3}, {4, 5}}};

int archetype_index(char archetype) {
  if (archetype < 'a' || archetype > 'l') {
    throw std::invalid_argument(std::string("unknown archetype letter '") +
                                archetype + "' (expected a..l)");
  }
  return archetype - 'a';
}

std::string fmt17(Scalar v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Scalar archetype_noise_std(char archetype) {
  return kNoiseRows[static_cast<std::size_t>(archetype_index(archetype) / 3)];
}

std::array<int, 2> archetype_degree_range(char archetype) {
  return kDegreeColumns[static_cast<std::size_t>(archetype_index(archetype) % 3)];
}

Scalar eval_polynomial(const PolynomialSpec& p, Scalar x) {
  Scalar acc = 0.0;
  for (std::size_t i = p.coefficients.size(); i-- > 0;) {
    acc = acc * x + p.coefficients[i];
  }
  return acc;
}

void validate(const DatasetSpec& spec, bool check_archetype) {
  archetype_index(spec.archetype);
  if (spec.m < 1) throw std::invalid_argument("input count must be >= 1");
  if (spec.n_obs < 1) throw std::invalid_argument("n_obs must be >= 1");
  if (spec.input_std <= 0.0) throw std::invalid_argument("input_std must be > 0");
  const auto sz = static_cast<std::size_t>(spec.m);
  if (spec.input_means.size() != sz || spec.weights.size() != sz ||
      spec.polynomials.size() != sz) {
    throw std::invalid_argument("means/weights/polynomials must have one entry per input");
  }
  Scalar weight_sum = 0.0;
  for (Scalar w : spec.weights) {
    if (w < 0.0 || w > 1.0) throw std::invalid_argument("weights must lie in [0,1]");
    weight_sum += w;
  }
  if (std::abs(weight_sum - 1.0) > 1e-12) {
    throw std::invalid_argument("weights must sum to 1 within 1e-12");
  }
  for (const PolynomialSpec& p : spec.polynomials) {
    if (p.degree < 0 || p.degree > 5) throw std::invalid_argument("degree must lie in [0,5]");
    if (p.coefficients.size() != static_cast<std::size_t>(p.degree) + 1) {
      throw std::invalid_argument("coefficient count must equal degree + 1");
    }
    for (Scalar c : p.coefficients) {
      if (!(c > -10.0 && c < 10.0)) {
        throw std::invalid_argument("coefficients must lie in (-10,10)");
      }
    }
    if (p.coefficients.back() == 0.0) {
      throw std::invalid_argument("leading coefficient must be nonzero");
    }
    if (p.degree < spec.degree_range[0] || p.degree > spec.degree_range[1]) {
      throw std::invalid_argument("polynomial degree outside the spec degree range");
    }
  }
  if (check_archetype) {
    if (spec.noise_std != archetype_noise_std(spec.archetype) ||
        spec.degree_range != archetype_degree_range(spec.archetype)) {
      throw std::invalid_argument("(noise_std, degree_range) do not match the archetype");
    }
  }
}

DatasetSpec make_spec(char archetype, std::uint64_t seed, Index n_obs) {
  archetype_index(archetype);
  if (n_obs < 1) throw std::invalid_argument("n_obs must be >= 1");

  DatasetSpec spec;
  spec.archetype = archetype;
  spec.n_obs = n_obs;
  spec.noise_std = archetype_noise_std(archetype);
  spec.degree_range = archetype_degree_range(archetype);
  spec.seed = seed;

  // Draw order is part of the format: means, then per-input degree and
  // coefficients, then weights.
  rng::Stream stream(rng::derive(seed, rng::tag("spec")));
  const auto m = static_cast<std::size_t>(spec.m);
  spec.input_means.resize(m);
  for (Scalar& mu : spec.input_means) mu = stream.uniform(0.0, 10.0);

  spec.polynomials.resize(m);
  for (PolynomialSpec& p : spec.polynomials) {
    p.degree = static_cast<int>(
        stream.uniform_int(spec.degree_range[0], spec.degree_range[1]));
    p.coefficients.resize(static_cast<std::size_t>(p.degree) + 1);
    for (Scalar& c : p.coefficients) c = stream.uniform(-10.0, 10.0);
    while (p.coefficients.back() == 0.0) {
      p.coefficients.back() = stream.uniform(-10.0, 10.0);
    }
  }

  spec.weights.resize(m);
  Scalar weight_sum = 0.0;
  for (Scalar& w : spec.weights) {
    w = stream.uniform();
    weight_sum += w;
  }
  for (Scalar& w : spec.weights) w /= weight_sum;

  return spec;
}

Scalar ground_truth(const DatasetSpec& spec, const Vec& x) {
  if (x.size() != spec.m) {
    throw std::invalid_argument("ground_truth: input vector has wrong length");
  }
  Scalar y = 0.0;
  for (int j = 0; j < spec.m; ++j) {
    y += spec.weights[static_cast<std::size_t>(j)] *
         eval_polynomial(spec.polynomials[static_cast<std::size_t>(j)], x[j]);
  }
  return y;
}

Dataset::Dataset(DatasetSpec spec, Mat inputs, Vec outputs)
    : spec_(std::move(spec)), inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
  if (inputs_.rows() != outputs_.size() || inputs_.cols() != spec_.m) {
    throw std::invalid_argument("Dataset: inputs/outputs dimensions disagree with spec");
  }
}

Dataset generate(const DatasetSpec& spec) {
  validate(spec, /*check_archetype=*/false);

  Mat inputs(spec.n_obs, spec.m);
  Vec outputs = Vec::Zero(spec.n_obs);

  // One stream per input column for values and one for noise, so columns
  // never perturb each other's draws.
  for (int j = 0; j < spec.m; ++j) {
    const auto js = static_cast<std::size_t>(j);
    rng::Stream values(rng::derive(spec.seed, rng::tag("inputs"),
                                   static_cast<std::uint64_t>(j)));
    rng::Stream noise(rng::derive(spec.seed, rng::tag("noise"),
                                  static_cast<std::uint64_t>(j)));
    for (Index k = 0; k < spec.n_obs; ++k) {
      const Scalar x = values.normal(spec.input_means[js], spec.input_std);
      inputs(k, j) = x;
      const Scalar eps = noise.normal(0.0, spec.noise_std);
      outputs[k] += spec.weights[js] * (eval_polynomial(spec.polynomials[js], x) + eps);
    }
  }

  for (Index k = 0; k < spec.n_obs; ++k) {
    if (!std::isfinite(outputs[k])) {
      throw std::runtime_error("generate: non-finite output at observation " +
                               std::to_string(k));
    }
  }
  return Dataset(spec, std::move(inputs), std::move(outputs));
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (int j = 0; j < data.num_inputs(); ++j) out << 'x' << j << ',';
  out << "y\n";
  for (Index k = 0; k < data.rows(); ++k) {
    for (int j = 0; j < data.num_inputs(); ++j) {
      out << fmt17(data.inputs()(k, j)) << ',';
    }
    out << fmt17(data.outputs()[k]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_spec_json(const DatasetSpec& spec, const std::string& path) {
  nlohmann::json polys = nlohmann::json::array();
  for (const PolynomialSpec& p : spec.polynomials) {
    polys.push_back({{"degree", p.degree}, {"coefficients", p.coefficients}});
  }
  const nlohmann::json doc{
      {"archetype", std::string(1, spec.archetype)},
      {"m", spec.m},
      {"n_obs", spec.n_obs},
      {"input_means", spec.input_means},
      {"input_std", spec.input_std},
      {"noise_std", spec.noise_std},
      {"degree_range", spec.degree_range},
      {"weights", spec.weights},
      {"polynomials", polys},
      {"seed", spec.seed},
  };
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

DatasetSpec read_spec_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);

  DatasetSpec spec;
  const auto archetype = doc.at("archetype").get<std::string>();
  if (archetype.size() != 1) throw std::runtime_error("bad archetype in " + path);
  spec.archetype = archetype[0];
  spec.m = doc.at("m").get<int>();
  spec.n_obs = doc.at("n_obs").get<Index>();
  spec.input_means = doc.at("input_means").get<std::vector<Scalar>>();
  spec.input_std = doc.at("input_std").get<Scalar>();
  spec.noise_std = doc.at("noise_std").get<Scalar>();
  spec.degree_range = doc.at("degree_range").get<std::array<int, 2>>();
  spec.weights = doc.at("weights").get<std::vector<Scalar>>();
  for (const auto& p : doc.at("polynomials")) {
    spec.polynomials.push_back(
        {p.at("degree").get<int>(), p.at("coefficients").get<std::vector<Scalar>>()});
  }
  spec.seed = doc.at("seed").get<std::uint64_t>();
  return spec;
}

Dataset read_csv(const DatasetSpec& spec, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);

  std::vector<Scalar> cells;
  cells.reserve(static_cast<std::size_t>(spec.n_obs) *
                (static_cast<std::size_t>(spec.m) + 1));
  Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int got = 0;
    while (std::getline(ss, cell, ',')) {
      cells.push_back(std::stod(cell));
      ++got;
    }
    if (got != spec.m + 1) {
      throw std::runtime_error("row " + std::to_string(rows + 1) + " of " + path +
                               " has " + std::to_string(got) + " cells");
    }
    ++rows;
  }

  Mat inputs(rows, spec.m);
  Vec outputs(rows);
  for (Index k = 0; k < rows; ++k) {
    const std::size_t base = static_cast<std::size_t>(k) *
                             (static_cast<std::size_t>(spec.m) + 1);
    for (int j = 0; j < spec.m; ++j) {
      inputs(k, j) = cells[base + static_cast<std::size_t>(j)];
    }
    outputs[k] = cells[base + static_cast<std::size_t>(spec.m)];
  }
  DatasetSpec realized = spec;
  realized.n_obs = rows;
  return Dataset(std::move(realized), std::move(inputs), std::move(outputs));
}

}  // namespace gtbench::synthdata
