#include "gtbench/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gtbench/rng.hpp"
#include "gtbench/split.hpp"

namespace gtbench::mlp {

namespace {

// sign with the MAE subgradient convention: 0 at 0
inline Scalar sign0(Scalar v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Mat standardized(const FeatureScaler& scaler, const Mat& X) {
  return (X.rowwise() - scaler.mean.transpose()).array().rowwise() /
         scaler.scale.transpose().array();
}

// Forward pass on standardized activations, keeping pre-activations for
// the backward pass. pre[l] is (batch x width_l); the final layer is
// linear.
struct ForwardCache {
  std::vector<Mat> pre;
};

Mat forward_std(const Network& net, const Mat& X_std, ForwardCache* cache) {
  Mat act = X_std;
  if (cache != nullptr) cache->pre.resize(net.weights.size());
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Mat z = act * net.weights[l];
    z.rowwise() += net.biases[l].transpose();
    if (cache != nullptr) cache->pre[l] = z;
    if (l + 1 < net.weights.size()) {
      act = z.cwiseMax(0.0);
    } else {
      act = std::move(z);
    }
  }
  return act;
}

}  // namespace

void NetworkShape::validate(int max_neurons) const {
  if (hidden_layers < 1 || hidden_layers > 3) {
    throw std::invalid_argument("hidden_layers must lie in [1,3]");
  }
  if (neurons.size() != static_cast<std::size_t>(hidden_layers)) {
    throw std::invalid_argument("neurons must list one width per hidden layer");
  }
  for (int width : neurons) {
    if (width < 1 || width > max_neurons) {
      throw std::invalid_argument("layer width outside [1," +
                                  std::to_string(max_neurons) + "]");
    }
  }
}

NetworkShape draw_shape(int max_layers, int max_width, std::uint64_t seed) {
  rng::Stream stream(rng::derive(seed, rng::tag("shape")));
  NetworkShape shape;
  shape.hidden_layers = static_cast<int>(stream.uniform_int(1, max_layers));
  shape.neurons.resize(static_cast<std::size_t>(shape.hidden_layers));
  for (int& width : shape.neurons) {
    width = static_cast<int>(stream.uniform_int(1, max_width));
  }
  return shape;
}

FeatureScaler FeatureScaler::identity(int size) {
  return {Vec::Zero(size), Vec::Ones(size)};
}

Network init_network(const NetworkShape& shape, int inputs, std::uint64_t seed,
                     Scalar init_std) {
  shape.validate();
  if (inputs < 1) throw std::invalid_argument("init_network: inputs must be >= 1");

  Network net;
  net.shape = shape;
  net.inputs = inputs;
  net.input_scaler = FeatureScaler::identity(inputs);

  std::vector<int> dims;
  dims.push_back(inputs);
  dims.insert(dims.end(), shape.neurons.begin(), shape.neurons.end());
  dims.push_back(1);

  rng::Stream stream(rng::derive(seed, rng::tag("init")));
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Mat w(dims[l], dims[l + 1]);
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index c = 0; c < w.cols(); ++c) w(r, c) = stream.normal(0.0, init_std);
    }
    Vec b(dims[l + 1]);
    for (Index i = 0; i < b.size(); ++i) b[i] = stream.normal(0.0, init_std);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

Scalar forward(const Network& net, const Vec& x) {
  if (x.size() != net.inputs) {
    throw std::invalid_argument("forward: input has wrong length");
  }
  Vec act = (x - net.input_scaler.mean).cwiseQuotient(net.input_scaler.scale);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Vec z = net.weights[l].transpose() * act + net.biases[l];
    if (!z.allFinite()) {
      throw std::runtime_error("forward: non-finite activation in layer " +
                               std::to_string(l));
    }
    act = (l + 1 < net.weights.size()) ? z.cwiseMax(0.0).eval() : std::move(z);
  }
  return net.output_mean + net.output_scale * act[0];
}

Vec predict(const Network& net, const Mat& X) {
  Vec out(X.rows());
  for (Index k = 0; k < X.rows(); ++k) {
    out[k] = forward(net, X.row(k).transpose());
  }
  return out;
}

std::int64_t complexity(const Network& net) {
  std::int64_t connections = 0;
  for (const Mat& w : net.weights) connections += w.size();
  return connections;
}

Scalar batch_loss(const Network& net, const Mat& X, const Vec& y) {
  if (X.rows() != y.size() || X.rows() < 1) {
    throw std::invalid_argument("batch_loss: bad batch");
  }
  const Mat X_std = standardized(net.input_scaler, X);
  const Mat pred_std = forward_std(net, X_std, nullptr);
  Scalar sum = 0.0;
  for (Index k = 0; k < y.size(); ++k) {
    sum += std::abs(net.output_mean + net.output_scale * pred_std(k, 0) - y[k]);
  }
  return sum / static_cast<Scalar>(y.size());
}

Gradients gradient(const Network& net, const Mat& X, const Vec& y) {
  if (X.rows() != y.size() || X.rows() < 1) {
    throw std::invalid_argument("gradient: batch must be non-empty");
  }
  const Mat X_std = standardized(net.input_scaler, X);
  ForwardCache cache;
  const Mat pred_std = forward_std(net, X_std, &cache);

  const Index batch = X.rows();
  // d/d(pred_std) of mean |output_scale * (pred_std - z)| where z is the
  // standardized target; output_scale > 0.
  Mat delta(batch, 1);
  for (Index k = 0; k < batch; ++k) {
    const Scalar z = (y[k] - net.output_mean) / net.output_scale;
    delta(k, 0) = sign0(pred_std(k, 0) - z) * net.output_scale /
                  static_cast<Scalar>(batch);
  }
  if (!delta.allFinite()) throw std::runtime_error("gradient: non-finite residuals");

  Gradients grads;
  const auto layers = net.weights.size();
  grads.weights.resize(layers);
  grads.biases.resize(layers);
  for (std::size_t l = layers; l-- > 0;) {
    Mat input_act;
    if (l == 0) {
      input_act = X_std;
    } else {
      input_act = cache.pre[l - 1].cwiseMax(0.0);
    }
    grads.weights[l].noalias() = input_act.transpose() * delta;
    grads.biases[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      Mat back = delta * net.weights[l].transpose();
      delta = back.cwiseProduct(
          (cache.pre[l - 1].array() > 0.0).cast<Scalar>().matrix());
    }
  }
  return grads;
}

AdaMaxState AdaMaxState::zeros_like(const Network& net) {
  AdaMaxState state;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    state.m_weights.push_back(Mat::Zero(net.weights[l].rows(), net.weights[l].cols()));
    state.u_weights.push_back(Mat::Zero(net.weights[l].rows(), net.weights[l].cols()));
    state.m_biases.push_back(Vec::Zero(net.biases[l].size()));
    state.u_biases.push_back(Vec::Zero(net.biases[l].size()));
  }
  return state;
}

namespace {

template <typename Param>
void adamax_update(Param& theta, Param& m, Param& u, const Param& g, Scalar step,
                   const TrainConfig& cfg) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  u = (cfg.beta2 * u).cwiseMax(g.cwiseAbs());
  theta -= step * m.cwiseQuotient(u.cwiseMax(1e-12));
}

}  // namespace

void adamax_step(Network& net, AdaMaxState& state, const Gradients& grads, int t,
                 const TrainConfig& cfg) {
  if (t < 1) throw std::invalid_argument("adamax_step: t must be >= 1");
  const Scalar step = cfg.alpha / (1.0 - std::pow(cfg.beta1, t));
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    adamax_update(net.weights[l], state.m_weights[l], state.u_weights[l],
                  grads.weights[l], step, cfg);
    adamax_update(net.biases[l], state.m_biases[l], state.u_biases[l],
                  grads.biases[l], step, cfg);
  }
}

bool EarlyStopper::observe(int epoch, Scalar validation_loss) {
  improved_ = validation_loss < best_loss_;
  if (improved_) {
    best_loss_ = validation_loss;
    best_epoch_ = epoch;
    return false;
  }
  return epoch - best_epoch_ >= patience_ - 1;
}

namespace {

struct TrainSplit {
  std::vector<Index> train;
  std::vector<Index> validation;
};

// The evaluation holdout (a function of the dataset seed) is removed
// first; the remaining pool is split train/validation from cfg.seed.
TrainSplit train_validation_split(const synthdata::Dataset& data,
                                  const TrainConfig& cfg) {
  EvaluationSplit eval = evaluation_split(data.spec().seed, data.rows());
  rng::Stream stream(rng::derive(cfg.seed, rng::tag("split")));
  stream.shuffle(eval.pool);
  const auto n_val = static_cast<std::size_t>(
      static_cast<double>(eval.pool.size()) * cfg.validation_fraction);
  if (n_val == 0 || n_val >= eval.pool.size()) {
    throw std::invalid_argument("train: validation_fraction leaves an empty split");
  }
  TrainSplit split;
  split.validation.assign(eval.pool.end() - static_cast<std::ptrdiff_t>(n_val),
                          eval.pool.end());
  split.train.assign(eval.pool.begin(),
                     eval.pool.end() - static_cast<std::ptrdiff_t>(n_val));
  return split;
}

FeatureScaler fit_input_scaler(const Mat& X) {
  FeatureScaler scaler;
  scaler.mean = X.colwise().mean();
  Vec var = (X.rowwise() - scaler.mean.transpose())
                .array()
                .square()
                .colwise()
                .mean();
  scaler.scale = var.cwiseSqrt();
  for (Index j = 0; j < scaler.scale.size(); ++j) {
    if (scaler.scale[j] <= 0.0) scaler.scale[j] = 1.0;
  }
  return scaler;
}

Mat gather_rows(const Mat& X, const std::vector<Index>& rows) {
  Mat out(static_cast<Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Index>(i)) = X.row(rows[i]);
  }
  return out;
}

Vec gather(const Vec& v, const std::vector<Index>& rows) {
  Vec out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Index>(i)] = v[rows[i]];
  return out;
}

// Validation MAE in original units, computed batched on standardized data.
Scalar validation_mae(const Network& net, const Mat& X_std, const Vec& z) {
  const Mat pred = forward_std(net, X_std, nullptr);
  return net.output_scale * (pred.col(0) - z).cwiseAbs().mean();
}

}  // namespace

TrainReport train(Network& net, const synthdata::Dataset& data,
                  const TrainConfig& cfg) {
  if (data.rows() < cfg.batch_size) {
    throw std::invalid_argument("train: dataset smaller than one batch");
  }
  const TrainSplit split = train_validation_split(data, cfg);

  const Mat X_train_raw = gather_rows(data.inputs(), split.train);
  const Vec y_train = gather(data.outputs(), split.train);

  net.input_scaler = fit_input_scaler(X_train_raw);
  net.output_mean = y_train.mean();
  const Scalar y_var = (y_train.array() - net.output_mean).square().mean();
  net.output_scale = y_var > 0.0 ? std::sqrt(y_var) : 1.0;

  const Mat X_train = standardized(net.input_scaler, X_train_raw);
  const Vec z_train = (y_train.array() - net.output_mean) / net.output_scale;
  const Mat X_val =
      standardized(net.input_scaler, gather_rows(data.inputs(), split.validation));
  const Vec z_val = (gather(data.outputs(), split.validation).array() -
                     net.output_mean) /
                    net.output_scale;

  AdaMaxState state = AdaMaxState::zeros_like(net);
  EarlyStopper stopper(cfg.patience);
  std::vector<Mat> best_weights;
  std::vector<Vec> best_biases;

  std::vector<Index> order(split.train.size());
  std::iota(order.begin(), order.end(), Index{0});
  rng::Stream shuffler(rng::derive(cfg.seed, rng::tag("shuffle")));

  TrainReport report;
  const Index n_train = static_cast<Index>(split.train.size());
  Mat batch_x(cfg.batch_size, net.inputs);
  Vec batch_z(cfg.batch_size);
  ForwardCache cache;
  int step_index = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs && !report.diverged; ++epoch) {
    shuffler.shuffle(order);
    for (Index start = 0; start < n_train; start += cfg.batch_size) {
      const Index rows = std::min<Index>(cfg.batch_size, n_train - start);
      for (Index i = 0; i < rows; ++i) {
        batch_x.row(i) = X_train.row(order[static_cast<std::size_t>(start + i)]);
        batch_z[i] = z_train[order[static_cast<std::size_t>(start + i)]];
      }
      const auto Xb = batch_x.topRows(rows);
      const Mat pred = forward_std(net, Xb, &cache);
      if (!pred.allFinite()) {
        report.diverged = true;
        break;
      }

      Mat delta(rows, 1);
      for (Index k = 0; k < rows; ++k) {
        delta(k, 0) = sign0(pred(k, 0) - batch_z[k]) * net.output_scale /
                      static_cast<Scalar>(rows);
      }
      Gradients grads;
      grads.weights.resize(net.weights.size());
      grads.biases.resize(net.weights.size());
      for (std::size_t l = net.weights.size(); l-- > 0;) {
        if (l == 0) {
          grads.weights[l].noalias() = Xb.transpose() * delta;
        } else {
          grads.weights[l].noalias() =
              cache.pre[l - 1].cwiseMax(0.0).transpose() * delta;
        }
        grads.biases[l] = delta.colwise().sum().transpose();
        if (l > 0) {
          Mat back = delta * net.weights[l].transpose();
          delta = back.cwiseProduct(
              (cache.pre[l - 1].array() > 0.0).cast<Scalar>().matrix());
        }
      }
      adamax_step(net, state, grads, ++step_index, cfg);
    }
    if (report.diverged) break;

    const Scalar val = validation_mae(net, X_val, z_val);
    if (!std::isfinite(val)) {
      report.diverged = true;
      break;
    }
    report.epochs_run = epoch;
    const bool stop = stopper.observe(epoch, val);
    if (stopper.improved()) {
      best_weights = net.weights;
      best_biases = net.biases;
    }
    if (stop) {
      report.stopped_early = true;
      break;
    }
  }

  if (!best_weights.empty()) {
    net.weights = std::move(best_weights);
    net.biases = std::move(best_biases);
  }
  report.best_validation_loss = stopper.best_loss();
  return report;
}

Scalar validation_loss(const Network& net, const synthdata::Dataset& data,
                       const TrainConfig& cfg) {
  const TrainSplit split = train_validation_split(data, cfg);
  const Mat X_val =
      standardized(net.input_scaler, gather_rows(data.inputs(), split.validation));
  const Vec z_val = (gather(data.outputs(), split.validation).array() -
                     net.output_mean) /
                    net.output_scale;
  return validation_mae(net, X_val, z_val);
}

std::string to_json(const Network& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const Mat& w = net.weights[l];
    std::vector<Scalar> data(static_cast<std::size_t>(w.size()));
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index c = 0; c < w.cols(); ++c) {
        data[static_cast<std::size_t>(r * w.cols() + c)] = w(r, c);
      }
    }
    layers.push_back({{"rows", w.rows()},
                      {"cols", w.cols()},
                      {"weights", data},
                      {"biases", std::vector<Scalar>(net.biases[l].begin(),
                                                     net.biases[l].end())}});
  }
  const nlohmann::json doc{
      {"hidden_layers", net.shape.hidden_layers},
      {"neurons", net.shape.neurons},
      {"inputs", net.inputs},
      {"layers", layers},
      {"input_mean", std::vector<Scalar>(net.input_scaler.mean.begin(),
                                         net.input_scaler.mean.end())},
      {"input_scale", std::vector<Scalar>(net.input_scaler.scale.begin(),
                                          net.input_scaler.scale.end())},
      {"output_mean", net.output_mean},
      {"output_scale", net.output_scale},
  };
  return doc.dump(2);
}

Network network_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  Network net;
  net.shape.hidden_layers = doc.at("hidden_layers").get<int>();
  net.shape.neurons = doc.at("neurons").get<std::vector<int>>();
  net.inputs = doc.at("inputs").get<int>();
  for (const auto& layer : doc.at("layers")) {
    const Index rows = layer.at("rows").get<Index>();
    const Index cols = layer.at("cols").get<Index>();
    const auto data = layer.at("weights").get<std::vector<Scalar>>();
    if (static_cast<Index>(data.size()) != rows * cols) {
      throw std::runtime_error("network_from_json: weight payload size mismatch");
    }
    Mat w(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      for (Index c = 0; c < cols; ++c) {
        w(r, c) = data[static_cast<std::size_t>(r * cols + c)];
      }
    }
    const auto biases = layer.at("biases").get<std::vector<Scalar>>();
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::Map<const Vec>(biases.data(),
                                               static_cast<Index>(biases.size())));
  }
  const auto in_mean = doc.at("input_mean").get<std::vector<Scalar>>();
  const auto in_scale = doc.at("input_scale").get<std::vector<Scalar>>();
  net.input_scaler.mean =
      Eigen::Map<const Vec>(in_mean.data(), static_cast<Index>(in_mean.size()));
  net.input_scaler.scale =
      Eigen::Map<const Vec>(in_scale.data(), static_cast<Index>(in_scale.size()));
  net.output_mean = doc.at("output_mean").get<Scalar>();
  net.output_scale = doc.at("output_scale").get<Scalar>();
  return net;
}

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_json(net) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return network_from_json(text);
}

}  // namespace gtbench::mlp
