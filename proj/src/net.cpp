#include "execlab/net.hpp"

#include "execlab/binio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace execlab::net {

namespace {

constexpr char kMagic[8] = {'E', 'X', 'L', 'Q', 'N', 'E', 'T', '1'};

}  // namespace

void NetConfig::validate() const {
  if (input_dim < 1) throw std::invalid_argument("net config: input_dim must be positive");
  if (hidden_layers < 1) throw std::invalid_argument("net config: need at least one hidden layer");
  if (hidden_width < 1) throw std::invalid_argument("net config: hidden_width must be positive");
  if (leaky_slope < 0.0 || leaky_slope >= 1.0)
    throw std::invalid_argument("net config: leaky slope must lie in [0,1)");
}

long NetConfig::parameter_count() const {
  long total = 0;
  for (int l = 0; l < layer_count(); ++l)
    total += static_cast<long>(layer_rows(l)) * layer_cols(l) + layer_rows(l);
  return total;
}

QNetwork init_network(const NetConfig& config, rng::Rng& rng) {
  config.validate();
  QNetwork net;
  net.config = config;
  net.weights.resize(static_cast<std::size_t>(config.layer_count()));
  net.biases.resize(static_cast<std::size_t>(config.layer_count()));
  for (int l = 0; l < config.layer_count(); ++l) {
    const int rows = config.layer_rows(l);
    const int cols = config.layer_cols(l);
    const double limit = std::sqrt(6.0 / (rows + cols));
    auto& w = net.weights[static_cast<std::size_t>(l)];
    w.resize(static_cast<std::size_t>(rows) * cols);
    for (double& x : w) x = (2.0 * rng.uniform01() - 1.0) * limit;
    net.biases[static_cast<std::size_t>(l)].assign(static_cast<std::size_t>(rows), 0.0);
  }
  return net;
}

void copy_weights(const QNetwork& src, QNetwork& dst) {
  if (src.config.input_dim != dst.config.input_dim || src.config.hidden_layers != dst.config.hidden_layers ||
      src.config.hidden_width != dst.config.hidden_width)
    throw std::invalid_argument("copy_weights: mismatched architectures");
  dst.weights = src.weights;
  dst.biases = src.biases;
}

void Workspace::resize(const NetConfig& config) {
  const auto layers = static_cast<std::size_t>(config.layer_count());
  if (act.size() == layers + 1 && static_cast<int>(act[0].size()) == config.input_dim &&
      static_cast<int>(act[1].size()) == config.layer_rows(0))
    return;
  act.assign(layers + 1, {});
  act[0].resize(static_cast<std::size_t>(config.input_dim));
  for (std::size_t l = 0; l < layers; ++l)
    act[l + 1].resize(static_cast<std::size_t>(config.layer_rows(static_cast<int>(l))));
}

double forward(const QNetwork& net, std::span<const double> input, Workspace& ws) {
  const NetConfig& c = net.config;
  if (static_cast<int>(input.size()) != c.input_dim)
    throw std::invalid_argument("forward: input dimension mismatch");
  ws.resize(c);
  std::copy(input.begin(), input.end(), ws.act[0].begin());
  const double slope = c.leaky_slope;
  const int layers = c.layer_count();
  for (int l = 0; l < layers; ++l) {
    const int rows = c.layer_rows(l);
    const int cols = c.layer_cols(l);
    const double* w = net.weights[static_cast<std::size_t>(l)].data();
    const double* b = net.biases[static_cast<std::size_t>(l)].data();
    const double* src = ws.act[static_cast<std::size_t>(l)].data();
    double* dst = ws.act[static_cast<std::size_t>(l) + 1].data();
    const bool last = l == layers - 1;
    for (int i = 0; i < rows; ++i) {
      const double* row = w + static_cast<std::size_t>(i) * cols;
      double acc = b[i];
      for (int j = 0; j < cols; ++j) acc += row[j] * src[j];
      dst[i] = last || acc > 0.0 ? acc : slope * acc;
    }
  }
  return ws.act[static_cast<std::size_t>(layers)][0];
}

double forward(const QNetwork& net, std::span<const double> input) {
  Workspace ws;
  return forward(net, input, ws);
}

AdamState adam_for(const QNetwork& net, double learning_rate) {
  if (learning_rate <= 0.0) throw std::invalid_argument("adam_for: learning rate must be positive");
  AdamState state;
  state.learning_rate = learning_rate;
  const auto layers = net.weights.size();
  state.m_w.resize(layers);
  state.v_w.resize(layers);
  state.m_b.resize(layers);
  state.v_b.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    state.m_w[l].assign(net.weights[l].size(), 0.0);
    state.v_w[l].assign(net.weights[l].size(), 0.0);
    state.m_b[l].assign(net.biases[l].size(), 0.0);
    state.v_b[l].assign(net.biases[l].size(), 0.0);
  }
  return state;
}

void TrainScratch::resize(const NetConfig& config) {
  ws.resize(config);
  const auto layers = static_cast<std::size_t>(config.layer_count());
  if (gw.size() == layers && static_cast<int>(gw[0].size()) == config.layer_rows(0) * config.layer_cols(0) &&
      static_cast<int>(gw[layers - 1].size()) ==
          config.layer_rows(config.layer_count() - 1) * config.layer_cols(config.layer_count() - 1))
    return;
  gw.assign(layers, {});
  gb.assign(layers, {});
  for (std::size_t l = 0; l < layers; ++l) {
    const int li = static_cast<int>(l);
    gw[l].resize(static_cast<std::size_t>(config.layer_rows(li)) * config.layer_cols(li));
    gb[l].resize(static_cast<std::size_t>(config.layer_rows(li)));
  }
  const auto width = static_cast<std::size_t>(std::max(config.hidden_width, config.input_dim));
  delta_a.resize(width);
  delta_b.resize(width);
}

double loss_and_gradients(const QNetwork& net, std::span<const double> inputs,
                          std::span<const double> targets, TrainScratch& scratch) {
  const NetConfig& c = net.config;
  const auto batch = targets.size();
  if (batch == 0) throw std::invalid_argument("train_batch: empty batch");
  if (inputs.size() != batch * static_cast<std::size_t>(c.input_dim))
    throw std::invalid_argument("train_batch: inputs/targets size mismatch");
  scratch.resize(c);

  const int layers = c.layer_count();
  for (int l = 0; l < layers; ++l) {
    std::fill(scratch.gw[static_cast<std::size_t>(l)].begin(), scratch.gw[static_cast<std::size_t>(l)].end(), 0.0);
    std::fill(scratch.gb[static_cast<std::size_t>(l)].begin(), scratch.gb[static_cast<std::size_t>(l)].end(), 0.0);
  }

  const double slope = c.leaky_slope;
  double loss = 0.0;
  for (std::size_t s = 0; s < batch; ++s) {
    const double out =
        forward(net, inputs.subspan(s * static_cast<std::size_t>(c.input_dim), static_cast<std::size_t>(c.input_dim)),
                scratch.ws);
    const double err = out - targets[s];
    loss += err * err;

    // Output error scaled so accumulated gradients equal d(mean sq err)/dp.
    double* delta = scratch.delta_a.data();
    double* delta_next = scratch.delta_b.data();
    delta[0] = 2.0 * err / static_cast<double>(batch);
    for (int l = layers - 1; l >= 0; --l) {
      const int rows = c.layer_rows(l);
      const int cols = c.layer_cols(l);
      const double* src = scratch.ws.act[static_cast<std::size_t>(l)].data();
      double* gw = scratch.gw[static_cast<std::size_t>(l)].data();
      double* gb = scratch.gb[static_cast<std::size_t>(l)].data();
      const double* w = net.weights[static_cast<std::size_t>(l)].data();
      for (int j = 0; j < cols; ++j) delta_next[j] = 0.0;
      for (int i = 0; i < rows; ++i) {
        const double d = delta[i];
        gb[i] += d;
        double* grow = gw + static_cast<std::size_t>(i) * cols;
        const double* wrow = w + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) {
          grow[j] += d * src[j];
          delta_next[j] += d * wrow[j];
        }
      }
      if (l > 0) {
        // Post-activation sign determines the leaky-ReLU derivative.
        for (int j = 0; j < cols; ++j) delta_next[j] *= src[j] > 0.0 ? 1.0 : slope;
      }
      std::swap(delta, delta_next);
    }
  }
  loss /= static_cast<double>(batch);
  return loss;
}

double train_batch(QNetwork& net, AdamState& adam, std::span<const double> inputs,
                   std::span<const double> targets, TrainScratch& scratch) {
  const double loss = loss_and_gradients(net, inputs, targets, scratch);
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "train_batch: non-finite loss after " << adam.step << " optimiser steps";
    throw std::runtime_error(msg.str());
  }

  const int layers = net.config.layer_count();
  adam.step += 1;
  const double bc1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.step));
  const double bc2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.step));
  const auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                          std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = adam.beta1 * m[i] + (1.0 - adam.beta1) * g[i];
      v[i] = adam.beta2 * v[i] + (1.0 - adam.beta2) * g[i] * g[i];
      p[i] -= adam.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + adam.epsilon);
    }
  };
  for (int l = 0; l < layers; ++l) {
    const auto li = static_cast<std::size_t>(l);
    update(net.weights[li], scratch.gw[li], adam.m_w[li], adam.v_w[li]);
    update(net.biases[li], scratch.gb[li], adam.m_b[li], adam.v_b[li]);
  }
  return loss;
}

double train_batch(QNetwork& net, AdamState& adam, std::span<const double> inputs,
                   std::span<const double> targets) {
  TrainScratch scratch;
  return train_batch(net, adam, inputs, targets, scratch);
}

void write_network(std::ostream& os, const QNetwork& net) {
  os.write(kMagic, sizeof(kMagic));
  binio::put_u32(os, static_cast<std::uint32_t>(net.config.input_dim));
  binio::put_u32(os, static_cast<std::uint32_t>(net.config.hidden_layers));
  binio::put_u32(os, static_cast<std::uint32_t>(net.config.hidden_width));
  binio::put_u32(os, 1);  // output width, fixed
  binio::put_f64(os, net.config.leaky_slope);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (double x : net.weights[l]) binio::put_f64(os, x);
    for (double x : net.biases[l]) binio::put_f64(os, x);
  }
  if (!os) throw std::runtime_error("network checkpoint: write failed");
}

QNetwork read_network(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || !std::equal(magic, magic + 8, kMagic))
    throw std::runtime_error("network checkpoint: bad magic");
  NetConfig config;
  config.input_dim = static_cast<int>(binio::get_u32(is));
  config.hidden_layers = static_cast<int>(binio::get_u32(is));
  config.hidden_width = static_cast<int>(binio::get_u32(is));
  const std::uint32_t out_dim = binio::get_u32(is);
  config.leaky_slope = binio::get_f64(is);
  if (out_dim != 1) throw std::runtime_error("network checkpoint: unsupported output width");
  config.validate();

  QNetwork net;
  net.config = config;
  net.weights.resize(static_cast<std::size_t>(config.layer_count()));
  net.biases.resize(static_cast<std::size_t>(config.layer_count()));
  for (int l = 0; l < config.layer_count(); ++l) {
    auto& w = net.weights[static_cast<std::size_t>(l)];
    auto& b = net.biases[static_cast<std::size_t>(l)];
    w.resize(static_cast<std::size_t>(config.layer_rows(l)) * config.layer_cols(l));
    b.resize(static_cast<std::size_t>(config.layer_rows(l)));
    for (double& x : w) x = binio::get_f64(is);
    for (double& x : b) x = binio::get_f64(is);
  }
  return net;
}

void save_network(const std::string& path, const QNetwork& net) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_network: cannot open " + path);
  write_network(os, net);
  os.close();

  std::ofstream meta(path + ".meta", std::ios::trunc);
  meta << "format: qnet-binary-v1\n"
       << "input_dim: " << net.config.input_dim << "\n"
       << "hidden_layers: " << net.config.hidden_layers << "\n"
       << "hidden_width: " << net.config.hidden_width << "\n"
       << "leaky_slope: " << net.config.leaky_slope << "\n"
       << "parameters: " << net.config.parameter_count() << "\n";
}

QNetwork load_network(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_network: cannot open " + path);
  return read_network(is);
}

}  // namespace execlab::net
