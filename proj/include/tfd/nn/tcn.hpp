#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tfd/core.hpp"
#include "tfd/nn/autograd.hpp"
#include "tfd/nn/tensor.hpp"

namespace tfd::nn {

/// Dilated causal convolutional encoder configuration. Block i runs at
/// dilation 2^i; each block applies two convolutions, so the receptive
/// field is 1 + 2 * (kernel_size - 1) * (2^num_blocks - 1).
struct TcnConfig {
  std::size_t in_channels = 1;
  std::size_t hidden_channels = 32;
  std::size_t num_blocks = 4;
  std::size_t kernel_size = 3;
  std::size_t embedding_dim = 16;

  void validate() const {
    if (in_channels == 0 || hidden_channels == 0 || num_blocks == 0 || embedding_dim == 0)
      fail(ErrorKind::InvalidConfig, "all TCN dimensions must be positive");
    if (kernel_size < 2) fail(ErrorKind::InvalidConfig, "kernel_size must be >= 2");
  }

  std::size_t dilation(std::size_t block) const { return std::size_t{1} << block; }

  std::size_t receptive_field() const {
    return 1 + 2 * (kernel_size - 1) * ((std::size_t{1} << num_blocks) - 1);
  }

  std::size_t param_count() const {
    std::size_t count = 0;
    std::size_t c_in = in_channels;
    for (std::size_t b = 0; b < num_blocks; ++b) {
      count += hidden_channels * c_in * kernel_size;           // conv1
      count += hidden_channels * hidden_channels * kernel_size; // conv2
      if (c_in != hidden_channels) count += hidden_channels * c_in;  // 1x1 skip
      c_in = hidden_channels;
    }
    count += embedding_dim * hidden_channels + embedding_dim;  // output projection
    return count;
  }

  bool operator==(const TcnConfig&) const = default;
};

/// Encoder weights. Convolutions carry no bias (a zero input then embeds to
/// exactly out_b for any weights, which keeps identical full/context windows
/// at zero distance); the output projection is affine.
struct TcnParams {
  TcnConfig config;
  std::vector<Tensor> conv1_w;  // per block: hidden x c_in x K
  std::vector<Tensor> conv2_w;  // per block: hidden x hidden x K
  std::vector<Tensor> skip_w;   // per block: hidden x c_in (empty when identity)
  Tensor out_w;                 // embedding_dim x hidden
  Tensor out_b;                 // embedding_dim

  static TcnParams init(const TcnConfig& cfg, Rng& rng) {
    cfg.validate();
    TcnParams p;
    p.config = cfg;
    std::size_t c_in = cfg.in_channels;
    for (std::size_t b = 0; b < cfg.num_blocks; ++b) {
      p.conv1_w.push_back(he_tensor({cfg.hidden_channels, c_in, cfg.kernel_size}, rng));
      p.conv2_w.push_back(
          he_tensor({cfg.hidden_channels, cfg.hidden_channels, cfg.kernel_size}, rng));
      if (c_in != cfg.hidden_channels) {
        p.skip_w.push_back(he_tensor({cfg.hidden_channels, c_in, 1}, rng));
      } else {
        p.skip_w.emplace_back();
      }
      c_in = cfg.hidden_channels;
    }
    p.out_w = he_tensor({cfg.embedding_dim, cfg.hidden_channels}, rng);
    // nonzero bias keeps all-zero inputs away from the degenerate-norm
    // cosine branch: identical windows then embed identically, distance 0
    p.out_b = Tensor({cfg.embedding_dim});
    for (double& v : p.out_b.data) v = rng.normal(0.0, 0.1);
    return p;
  }

  void collect(std::vector<Tensor*>& out) {
    for (std::size_t b = 0; b < conv1_w.size(); ++b) {
      out.push_back(&conv1_w[b]);
      out.push_back(&conv2_w[b]);
      if (skip_w[b].numel() > 0) out.push_back(&skip_w[b]);
    }
    out.push_back(&out_w);
    out.push_back(&out_b);
  }

 private:
  static Tensor he_tensor(std::vector<std::size_t> shape, Rng& rng) {
    Tensor t(std::move(shape));
    std::size_t fan_in = 1;
    for (std::size_t i = 1; i < t.shape.size(); ++i) fan_in *= t.shape[i];
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& v : t.data) v = rng.normal(0.0, stddev);
    return t;
  }
};

/// Stacked residual blocks of relu(conv(relu(conv(x)))) + skip(x). Returns
/// the pre-pooling C x L activations (used directly by causality tests).
inline Graph::NodeId tcn_features(Graph& g, const TcnParams& p, Graph::NodeId input) {
  const TcnConfig& cfg = p.config;
  if (g.value(input).rows() != cfg.in_channels)
    fail(ErrorKind::ChannelMismatch,
         "encoder expects " + std::to_string(cfg.in_channels) + " channels, got " +
             std::to_string(g.value(input).rows()));
  Graph::NodeId x = input;
  for (std::size_t b = 0; b < cfg.num_blocks; ++b) {
    const std::size_t dil = cfg.dilation(b);
    Graph::NodeId h = g.relu(g.conv1d_causal(x, g.param(&p.conv1_w[b]), dil));
    h = g.relu(g.conv1d_causal(h, g.param(&p.conv2_w[b]), dil));
    Graph::NodeId skip = x;
    if (p.skip_w[b].numel() > 0) skip = g.conv1d_causal(x, g.param(&p.skip_w[b]), 1);
    x = g.add(h, skip);
  }
  return x;
}

/// Full encoder: block stack, temporal mean pooling, affine projection to
/// the {embedding_dim} vector.
inline Graph::NodeId tcn_encode(Graph& g, const TcnParams& p, Graph::NodeId input) {
  Graph::NodeId pooled = g.mean_cols(tcn_features(g, p, input));
  return g.linear(g.param(&p.out_w), pooled, g.param(&p.out_b));
}

}  // namespace tfd::nn
