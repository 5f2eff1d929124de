#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gtbench/synthdata.hpp"
#include "gtbench/types.hpp"

namespace gtbench::mlp {

struct NetworkShape {
  int hidden_layers = 1;
  std::vector<int> neurons;  // one width per hidden layer

  void validate(int max_neurons = 1000) const;
};

NetworkShape draw_shape(int max_layers, int max_width, std::uint64_t seed);

// Per-feature affine standardization. scale is always > 0 so the map is
// invertible; a constant feature gets scale 1.
struct FeatureScaler {
  Vec mean;
  Vec scale;

  static FeatureScaler identity(int size);
};

// Feedforward ReLU regressor with a linear output unit. Inputs are
// standardized on the way in and the output de-standardized on the way
// out, so predictions live in original target units.
struct Network {
  NetworkShape shape;
  int inputs = 0;
  std::vector<Mat> weights;  // weights[l] is (fan_in x fan_out)
  std::vector<Vec> biases;
  FeatureScaler input_scaler;
  Scalar output_mean = 0.0;
  Scalar output_scale = 1.0;

  int layer_count() const { return static_cast<int>(weights.size()); }
};

Network init_network(const NetworkShape& shape, int inputs, std::uint64_t seed,
                     Scalar init_std = 0.1);

Scalar forward(const Network& net, const Vec& x);

// Batched prediction; rows of X are observations. Same arithmetic per row
// as forward().
Vec predict(const Network& net, const Mat& X);

// Number of weight connections, biases excluded.
std::int64_t complexity(const Network& net);

struct TrainConfig {
  int max_epochs = 20;
  int batch_size = 50;
  int patience = 5;
  Scalar alpha = 0.002;  // AdaMax step size
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar init_std = 0.1;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct TrainReport {
  int epochs_run = 0;
  Scalar best_validation_loss = 0.0;
  bool stopped_early = false;
  bool diverged = false;
};

struct Gradients {
  std::vector<Mat> weights;
  std::vector<Vec> biases;
};

// Gradient of the batch MAE in original target units, with subgradient 0
// at zero residuals and at ReLU kinks.
Gradients gradient(const Network& net, const Mat& X, const Vec& y);

// Mean |prediction - y| over the batch, original units.
Scalar batch_loss(const Network& net, const Mat& X, const Vec& y);

struct AdaMaxState {
  std::vector<Mat> m_weights, u_weights;
  std::vector<Vec> m_biases, u_biases;

  static AdaMaxState zeros_like(const Network& net);
};

void adamax_step(Network& net, AdaMaxState& state, const Gradients& grads,
                 int t, const TrainConfig& cfg);

// Stop once validation loss has gone patience-1 consecutive epochs
// without improving on the best seen. Epochs are 1-indexed.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  bool observe(int epoch, Scalar validation_loss);
  int best_epoch() const { return best_epoch_; }
  Scalar best_loss() const { return best_loss_; }
  bool improved() const { return improved_; }

 private:
  int patience_;
  int best_epoch_ = 0;
  Scalar best_loss_ = std::numeric_limits<Scalar>::infinity();
  bool improved_ = false;
};

// Table-2 protocol: fit scalers on the training split, shuffle per epoch,
// AdaMax on batch MAE, early stopping with best-parameter restore. Rows
// in the dataset's evaluation holdout are never touched.
TrainReport train(Network& net, const synthdata::Dataset& data,
                  const TrainConfig& cfg);

// Recomputes the validation loss train() reports, on the same split.
Scalar validation_loss(const Network& net, const synthdata::Dataset& data,
                       const TrainConfig& cfg);

std::string to_json(const Network& net);
Network network_from_json(const std::string& text);
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace gtbench::mlp
