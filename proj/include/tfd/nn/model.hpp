#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "tfd/core.hpp"
#include "tfd/decompose.hpp"
#include "tfd/nn/autograd.hpp"
#include "tfd/nn/tcn.hpp"
#include "tfd/nn/tensor.hpp"
#include "tfd/spectral.hpp"

namespace tfd::nn {

/// The four representation branches. Time branches consume trend/residual
/// components directly; frequency branches consume their interleaved DFT.
enum class BranchId : std::size_t {
  TimeTrend = 0,
  TimeResidual = 1,
  FreqTrend = 2,
  FreqResidual = 3,
};

inline constexpr std::array<BranchId, 4> kAllBranches = {
    BranchId::TimeTrend, BranchId::TimeResidual, BranchId::FreqTrend, BranchId::FreqResidual};

inline const char* branch_name(BranchId b) {
  switch (b) {
    case BranchId::TimeTrend: return "time_trend";
    case BranchId::TimeResidual: return "time_residual";
    case BranchId::FreqTrend: return "freq_trend";
    case BranchId::FreqResidual: return "freq_residual";
  }
  return "?";
}

struct ModelConfig {
  std::array<TcnConfig, 4> tcn;
  std::array<bool, 4> branch_enabled = {true, true, true, true};
  // When false the series is not decomposed: the trend-slot encoders see the
  // raw window and the residual branches are inactive.
  bool use_decomposition = true;

  bool branch_active(BranchId b) const {
    const std::size_t i = static_cast<std::size_t>(b);
    if (!branch_enabled[i]) return false;
    if (!use_decomposition &&
        (b == BranchId::TimeResidual || b == BranchId::FreqResidual))
      return false;
    return true;
  }

  void validate() const {
    bool any = false;
    for (BranchId b : kAllBranches) {
      tcn[static_cast<std::size_t>(b)].validate();
      any = any || branch_active(b);
    }
    if (!any) fail(ErrorKind::InvalidConfig, "no active branch");
  }

  bool operator==(const ModelConfig&) const = default;
};

/// Four encoders plus the affine score head. Within a branch the same
/// encoder embeds both the full and the context window, so distances
/// compare points in one representation space.
struct ModelParams {
  ModelConfig config;
  std::array<TcnParams, 4> encoders;
  Tensor head_w;  // {4}, one weight per branch distance
  Tensor head_b;  // {1}

  static ModelParams init(const ModelConfig& cfg, RngSeed seed) {
    cfg.validate();
    ModelParams p;
    p.config = cfg;
    Rng rng(seed);
    for (std::size_t i = 0; i < 4; ++i) {
      Rng branch_rng = rng.fork(i);
      p.encoders[i] = TcnParams::init(cfg.tcn[i], branch_rng);
    }
    p.head_w = Tensor({4});
    for (double& v : p.head_w.data) v = 1.0;
    p.head_b = Tensor({1});
    return p;
  }

  std::vector<Tensor*> parameters() {
    std::vector<Tensor*> out;
    for (auto& enc : encoders) enc.collect(out);
    out.push_back(&head_w);
    out.push_back(&head_b);
    return out;
  }

  std::size_t param_count() const {
    std::size_t n = 5;  // head
    for (std::size_t i = 0; i < 4; ++i) n += config.tcn[i].param_count();
    return n;
  }
};

/// Parameter-independent encoder inputs of one window pair: standardized,
/// decomposed, transformed. Computed once and reused across epochs.
struct BranchInputs {
  std::array<Tensor, 4> full;
  std::array<Tensor, 4> context;
};

namespace detail {

inline Tensor spectrum_rows(const Matrix& m) {
  const std::size_t dims = m.rows();
  Tensor out({dims, 2 * m.cols()});
  for (std::size_t d = 0; d < dims; ++d) {
    SpectralVector spec = dft_interleaved(m.row(d));
    for (std::size_t i = 0; i < spec.data.size(); ++i) out.data[d * out.cols() + i] = spec.data[i];
  }
  return out;
}

}  // namespace detail

/// Standardizes both windows with the context window's per-dimension
/// mean/std (std floored at 1e-8; the suspect span never leaks into the
/// normalizer), then decomposes and transforms per branch.
inline BranchInputs prepare_branch_inputs(const WindowPair& pair, double lambda,
                                          const ModelConfig& cfg) {
  const std::size_t dims = pair.full.rows();
  const std::size_t full_len = pair.full.cols();
  const std::size_t ctx_len = pair.context.cols();

  Matrix full_n(dims, full_len);
  Matrix ctx_n(dims, ctx_len);
  for (std::size_t d = 0; d < dims; ++d) {
    double mean = 0.0;
    for (std::size_t t = 0; t < ctx_len; ++t) mean += pair.context(d, t);
    mean /= static_cast<double>(ctx_len);
    double var = 0.0;
    for (std::size_t t = 0; t < ctx_len; ++t) {
      double c = pair.context(d, t) - mean;
      var += c * c;
    }
    double stddev = std::sqrt(var / static_cast<double>(ctx_len));
    if (stddev < 1e-8) stddev = 1e-8;
    for (std::size_t t = 0; t < full_len; ++t)
      full_n(d, t) = (pair.full(d, t) - mean) / stddev;
    for (std::size_t t = 0; t < ctx_len; ++t)
      ctx_n(d, t) = (pair.context(d, t) - mean) / stddev;
  }

  BranchInputs inputs;
  auto assign = [&](BranchId b, const Matrix& full_m, const Matrix& ctx_m, bool spectral) {
    const std::size_t i = static_cast<std::size_t>(b);
    if (!cfg.branch_active(b)) return;
    if (spectral) {
      inputs.full[i] = detail::spectrum_rows(full_m);
      inputs.context[i] = detail::spectrum_rows(ctx_m);
    } else {
      inputs.full[i] = Tensor::from_matrix(full_m);
      inputs.context[i] = Tensor::from_matrix(ctx_m);
    }
  };

  if (cfg.use_decomposition) {
    DecomposedSeries full_dec = hp_filter(full_n, lambda);
    DecomposedSeries ctx_dec = hp_filter(ctx_n, lambda);
    assign(BranchId::TimeTrend, full_dec.trend, ctx_dec.trend, false);
    assign(BranchId::TimeResidual, full_dec.residual, ctx_dec.residual, false);
    assign(BranchId::FreqTrend, full_dec.trend, ctx_dec.trend, true);
    assign(BranchId::FreqResidual, full_dec.residual, ctx_dec.residual, true);
  } else {
    assign(BranchId::TimeTrend, full_n, ctx_n, false);
    assign(BranchId::FreqTrend, full_n, ctx_n, true);
  }
  return inputs;
}

/// Appends the scoring graph for one pair: per-branch cosine distances
/// between full and context embeddings, combined by the affine head.
/// Returns the pre-sigmoid logit node.
inline Graph::NodeId build_logit(Graph& g, const ModelParams& params,
                                 const BranchInputs& inputs) {
  std::vector<Graph::NodeId> distances;
  distances.reserve(4);
  for (BranchId b : kAllBranches) {
    const std::size_t i = static_cast<std::size_t>(b);
    if (!params.config.branch_active(b)) {
      distances.push_back(g.constant(Tensor::scalar(0.0)));
      continue;
    }
    Graph::NodeId full_in = g.constant(inputs.full[i]);
    Graph::NodeId ctx_in = g.constant(inputs.context[i]);
    Graph::NodeId emb_full = tcn_encode(g, params.encoders[i], full_in);
    Graph::NodeId emb_ctx = tcn_encode(g, params.encoders[i], ctx_in);
    distances.push_back(g.cosine_distance(emb_full, emb_ctx));
  }
  Graph::NodeId stacked = g.stack_scalars(distances);
  return g.add(g.dot(g.param(&params.head_w), stacked), g.param(&params.head_b));
}

namespace detail {

// Scratch-buffer forward pass for scoring. Mirrors the graph ops kernel for
// kernel (same shared conv kernel, same accumulation order), so its output
// is bit-identical to build_logit; it just skips the tape.
struct InferScratch {
  std::vector<double> x, h1, h2, skip;
  std::vector<double> pooled, emb_a, emb_b;
};

inline void tcn_embed_fast(const TcnParams& p, const Tensor& input, std::vector<double>& emb,
                           InferScratch& s) {
  const TcnConfig& cfg = p.config;
  if (input.rows() != cfg.in_channels)
    fail(ErrorKind::ChannelMismatch,
         "encoder expects " + std::to_string(cfg.in_channels) + " channels, got " +
             std::to_string(input.rows()));
  const std::size_t len = input.cols();
  const std::size_t hidden = cfg.hidden_channels;
  const std::size_t buf = std::max(cfg.in_channels, hidden) * len;
  s.x.assign(input.data.begin(), input.data.end());
  s.x.resize(buf);
  s.h1.resize(buf);
  s.h2.resize(buf);
  s.skip.resize(buf);

  std::size_t c_in = cfg.in_channels;
  for (std::size_t b = 0; b < cfg.num_blocks; ++b) {
    const std::size_t dil = cfg.dilation(b);
    conv1d_forward(s.x.data(), c_in, len, p.conv1_w[b].data.data(), hidden, cfg.kernel_size,
                   dil, s.h1.data());
    for (std::size_t i = 0; i < hidden * len; ++i) s.h1[i] = s.h1[i] > 0.0 ? s.h1[i] : 0.0;
    conv1d_forward(s.h1.data(), hidden, len, p.conv2_w[b].data.data(), hidden, cfg.kernel_size,
                   dil, s.h2.data());
    for (std::size_t i = 0; i < hidden * len; ++i) s.h2[i] = s.h2[i] > 0.0 ? s.h2[i] : 0.0;
    if (p.skip_w[b].numel() > 0) {
      conv1d_forward(s.x.data(), c_in, len, p.skip_w[b].data.data(), hidden, 1, 1,
                     s.skip.data());
      for (std::size_t i = 0; i < hidden * len; ++i) s.h2[i] += s.skip[i];
    } else {
      for (std::size_t i = 0; i < hidden * len; ++i) s.h2[i] += s.x[i];
    }
    std::swap(s.x, s.h2);
    c_in = hidden;
  }

  s.pooled.resize(hidden);
  for (std::size_t r = 0; r < hidden; ++r) {
    double acc = 0.0;
    const double* row = s.x.data() + r * len;
    for (std::size_t t = 0; t < len; ++t) acc += row[t];
    s.pooled[r] = acc / static_cast<double>(len);
  }
  emb.resize(cfg.embedding_dim);
  for (std::size_t r = 0; r < cfg.embedding_dim; ++r) {
    double acc = p.out_b.data[r];
    const double* w_row = p.out_w.row(r);
    for (std::size_t i = 0; i < hidden; ++i) acc += w_row[i] * s.pooled[i];
    emb[r] = acc;
  }
}

inline double cosine_distance_fast(const std::vector<double>& u, const std::vector<double>& v) {
  double dot = 0.0, nu2 = 0.0, nv2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu2 += u[i] * u[i];
    nv2 += v[i] * v[i];
  }
  const double nu = std::sqrt(nu2), nv = std::sqrt(nv2);
  if (nu < 1e-12 || nv < 1e-12) return 1.0;
  return 1.0 - dot / std::max(nu * nv, 1e-12);
}

inline double sigmoid_scalar(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

/// Tape-free logit, bit-identical to evaluating build_logit.
inline double model_logit(const ModelParams& params, const BranchInputs& inputs) {
  static thread_local detail::InferScratch scratch;
  double distances[4] = {0.0, 0.0, 0.0, 0.0};
  for (BranchId b : kAllBranches) {
    const std::size_t i = static_cast<std::size_t>(b);
    if (!params.config.branch_active(b)) continue;
    detail::tcn_embed_fast(params.encoders[i], inputs.full[i], scratch.emb_a, scratch);
    detail::tcn_embed_fast(params.encoders[i], inputs.context[i], scratch.emb_b, scratch);
    distances[i] = detail::cosine_distance_fast(scratch.emb_a, scratch.emb_b);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < 4; ++i) acc += params.head_w.data[i] * distances[i];
  return acc + params.head_b.data[0];
}

/// Anomaly probability of the pair's suspect window under the model; higher
/// means more dissimilar from the context.
inline double model_score(const ModelParams& params, const WindowPair& pair, double lambda) {
  if (pair.full.cols() < 3)
    fail(ErrorKind::SeriesTooShort, "window too short to decompose");
  BranchInputs inputs = prepare_branch_inputs(pair, lambda, params.config);
  return detail::sigmoid_scalar(model_logit(params, inputs));
}

}  // namespace tfd::nn
