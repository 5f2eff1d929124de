#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gtbench/types.hpp"

namespace gtbench::synthdata {

// One isolated input-output relationship: a dense polynomial of degree
// 0..5 with coefficients in (-10, 10) and a nonzero leading coefficient.
struct PolynomialSpec {
  int degree = 0;
  std::vector<Scalar> coefficients;  // coefficients[i] multiplies x^i
};

Scalar eval_polynomial(const PolynomialSpec& p, Scalar x);

// Generative parameters for one artificial regression dataset. The
// archetype letter indexes the (noise level, polynomial degree range)
// grid; everything realized from it is kept so the noiseless target is
// always recoverable.
struct DatasetSpec {
  char archetype = 'a';
  int m = 6;
  Index n_obs = 0;
  std::vector<Scalar> input_means;          // mu_j in [0,10]
  Scalar input_std = 1.0;
  Scalar noise_std = 0.1;                   // sigma, per archetype row
  std::array<int, 2> degree_range{0, 1};    // per archetype column
  std::vector<Scalar> weights;              // simplex, one per input
  std::vector<PolynomialSpec> polynomials;  // one per input
  std::uint64_t seed = 0;
};

Scalar archetype_noise_std(char archetype);
std::array<int, 2> archetype_degree_range(char archetype);

// Structural invariants always hold; the archetype consistency check is
// optional so tests may override noise_std (e.g. a noiseless variant).
void validate(const DatasetSpec& spec, bool check_archetype = true);

DatasetSpec make_spec(char archetype, std::uint64_t seed, Index n_obs);

// The noiseless generating function phi(x) = sum_j w_j f_j(x_j).
Scalar ground_truth(const DatasetSpec& spec, const Vec& x);

class Dataset {
 public:
  Dataset(DatasetSpec spec, Mat inputs, Vec outputs);

  const DatasetSpec& spec() const { return spec_; }
  const Mat& inputs() const { return inputs_; }
  const Vec& outputs() const { return outputs_; }
  Index rows() const { return inputs_.rows(); }
  int num_inputs() const { return static_cast<int>(inputs_.cols()); }

 private:
  DatasetSpec spec_;
  Mat inputs_;   // n_obs x m
  Vec outputs_;  // n_obs
};

Dataset generate(const DatasetSpec& spec);

// Persistence: data as CSV (x0,...,x{m-1},y at 17 significant digits),
// spec as a JSON sidecar carrying every realized parameter.
void write_csv(const Dataset& data, const std::string& path);
void write_spec_json(const DatasetSpec& spec, const std::string& path);
DatasetSpec read_spec_json(const std::string& path);
Dataset read_csv(const DatasetSpec& spec, const std::string& path);

}  // namespace gtbench::synthdata
