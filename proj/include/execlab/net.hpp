#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "execlab/rng.hpp"

namespace execlab::net {

/// Shape of the Q-function approximator: `hidden_layers` leaky-ReLU layers
/// of `hidden_width` units followed by a linear scalar output.
struct NetConfig {
  int input_dim = 3;
  int hidden_layers = 5;
  int hidden_width = 30;
  double leaky_slope = 0.01;

  void validate() const;
  int layer_count() const { return hidden_layers + 1; }
  int layer_rows(int layer) const { return layer == hidden_layers ? 1 : hidden_width; }
  int layer_cols(int layer) const { return layer == 0 ? input_dim : hidden_width; }
  long parameter_count() const;
};

/// Dense feed-forward network; weights[l] is row-major rows x cols.
struct QNetwork {
  NetConfig config;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

/// Xavier-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases.
/// Draw order is fixed (layer by layer, row-major), so a seed pins the init.
QNetwork init_network(const NetConfig& config, rng::Rng& rng);

/// Copies parameters between structurally identical networks (target sync).
void copy_weights(const QNetwork& src, QNetwork& dst);

/// Reusable activation buffers so the hot loops never allocate.
struct Workspace {
  std::vector<std::vector<double>> act;

  void resize(const NetConfig& config);
};

double forward(const QNetwork& net, std::span<const double> input, Workspace& ws);
double forward(const QNetwork& net, std::span<const double> input);

/// ADAM first/second moment accumulators, one slot per parameter tensor.
struct AdamState {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
};

AdamState adam_for(const QNetwork& net, double learning_rate);

/// Gradient accumulators plus forward/backward scratch for one batch.
struct TrainScratch {
  Workspace ws;
  std::vector<std::vector<double>> gw, gb;
  std::vector<double> delta_a, delta_b;

  void resize(const NetConfig& config);
};

/// MSE loss over `batch` rows of `inputs` against `targets` plus parameter
/// gradients, accumulated into scratch.gw / scratch.gb. No update.
double loss_and_gradients(const QNetwork& net, std::span<const double> inputs,
                          std::span<const double> targets, TrainScratch& scratch);

/// One mini-batch step: loss_and_gradients followed by a single ADAM
/// update. Returns the pre-update loss. Throws if the loss is non-finite
/// (diverged training must be loud).
double train_batch(QNetwork& net, AdamState& adam, std::span<const double> inputs,
                   std::span<const double> targets, TrainScratch& scratch);
double train_batch(QNetwork& net, AdamState& adam, std::span<const double> inputs,
                   std::span<const double> targets);

/// Binary little-endian parameter block; see README for the byte layout.
void write_network(std::ostream& os, const QNetwork& net);
QNetwork read_network(std::istream& is);

/// File checkpoint: the binary block plus a human-readable `.meta` sidecar.
/// Round trip is bit-exact.
void save_network(const std::string& path, const QNetwork& net);
QNetwork load_network(const std::string& path);

}  // namespace execlab::net
