#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tfd/core.hpp"
#include "tfd/nn/tensor.hpp"

namespace tfd::nn {

namespace detail {

// Shared numeric kernels: the autograd ops and the allocation-free scoring
// path both call these, so the two routes agree bit for bit.

inline void conv1d_forward(const double* x, std::size_t c_in, std::size_t len, const double* w,
                           std::size_t c_out, std::size_t ksize, std::size_t dilation,
                           double* out) {
  std::fill(out, out + c_out * len, 0.0);
  const std::size_t maxoff = (ksize - 1) * dilation;
  for (std::size_t o = 0; o < c_out; ++o) {
    double* __restrict out_row = out + o * len;
    for (std::size_t c = 0; c < c_in; ++c) {
      const double* __restrict x_row = x + c * len;
      const double* w_row = w + (o * c_in + c) * ksize;
      // warm-up region: only the taps reaching valid data
      const std::size_t head = std::min(maxoff, len);
      for (std::size_t t = 0; t < head; ++t) {
        double acc = out_row[t];
        for (std::size_t k = 0; k < ksize; ++k) {
          const std::size_t off = (ksize - 1 - k) * dilation;
          if (t >= off) acc += w_row[k] * x_row[t - off];
        }
        out_row[t] = acc;
      }
      if (ksize == 3) {
        const double w0 = w_row[0], w1 = w_row[1], w2 = w_row[2];
        const double* __restrict a = x_row;
        const double* __restrict b = x_row + dilation;
        const double* __restrict cpos = x_row + 2 * dilation;
        for (std::size_t i = 0; i + maxoff < len; ++i)
          out_row[i + maxoff] += w0 * a[i] + w1 * b[i] + w2 * cpos[i];
      } else {
        for (std::size_t k = 0; k < ksize; ++k) {
          const double weight = w_row[k];
          const std::size_t off = (ksize - 1 - k) * dilation;
          for (std::size_t t = std::max(off, maxoff); t < len; ++t)
            out_row[t] += weight * x_row[t - off];
        }
      }
    }
  }
}

inline void conv1d_backward(const double* x, const double* w, const double* gout,
                            std::size_t c_in, std::size_t len, std::size_t c_out,
                            std::size_t ksize, std::size_t dilation, double* gx, double* gw) {
  const std::size_t maxoff = (ksize - 1) * dilation;
  for (std::size_t o = 0; o < c_out; ++o) {
    const double* __restrict go_row = gout + o * len;
    for (std::size_t c = 0; c < c_in; ++c) {
      const double* __restrict x_row = x + c * len;
      double* __restrict gx_row = gx + c * len;
      const double* w_row = w + (o * c_in + c) * ksize;
      double* gw_row = gw + (o * c_in + c) * ksize;
      if (ksize == 3 && len > maxoff) {
        // gx[s] += sum_k w_k * go[s + off_k]; off = (2d, d, 0)
        const double w0 = w_row[0], w1 = w_row[1], w2 = w_row[2];
        const double* __restrict g0 = go_row + 2 * dilation;
        const double* __restrict g1 = go_row + dilation;
        const double* __restrict g2 = go_row;
        const std::size_t steady = len - maxoff;
        double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0;
        for (std::size_t s = 0; s < steady; ++s) {
          gx_row[s] += w0 * g0[s] + w1 * g1[s] + w2 * g2[s];
          acc0 += g0[s] * x_row[s];
          acc1 += g1[s] * x_row[s];
          acc2 += g2[s] * x_row[s];
        }
        // tail: taps whose gout index would run past the end
        for (std::size_t s = steady; s < len; ++s) {
          double acc = gx_row[s];
          if (s + 2 * dilation < len) {
            acc += w0 * go_row[s + 2 * dilation];
            acc0 += go_row[s + 2 * dilation] * x_row[s];
          }
          if (s + dilation < len) {
            acc += w1 * go_row[s + dilation];
            acc1 += go_row[s + dilation] * x_row[s];
          }
          acc += w2 * go_row[s];
          acc2 += go_row[s] * x_row[s];
          gx_row[s] = acc;
        }
        gw_row[0] += acc0;
        gw_row[1] += acc1;
        gw_row[2] += acc2;
      } else {
        for (std::size_t k = 0; k < ksize; ++k) {
          const double weight = w_row[k];
          const std::size_t off = (ksize - 1 - k) * dilation;
          double acc = 0.0;
          for (std::size_t t = off; t < len; ++t) {
            gx_row[t - off] += weight * go_row[t];
            acc += go_row[t] * x_row[t - off];
          }
          gw_row[k] += acc;
        }
      }
    }
  }
}

}  // namespace detail

/// Reverse-mode tape. Nodes are appended in evaluation order, so the reverse
/// of creation order is a valid topological order for backpropagation; both
/// passes therefore run in a fixed, reproducible sequence.
///
/// Parameter leaves reference external tensors instead of copying them; the
/// graph never mutates them and reads their current contents at build time.
class Graph {
 public:
  using NodeId = std::int32_t;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  NodeId constant(Tensor value) { return push(std::move(value), nullptr, {}); }

  /// Leaf bound to external storage. The same tensor may be bound several
  /// times (shared weights); its total gradient is the sum over bindings.
  NodeId param(const Tensor* storage) {
    NodeId id = push(Tensor{}, storage, {});
    param_bindings_.emplace_back(storage, id);
    return id;
  }

  const std::vector<std::pair<const Tensor*, NodeId>>& param_bindings() const {
    return param_bindings_;
  }

  /// Causal dilated convolution without bias: x is C_in x L, w is
  /// C_out x C_in x K. Output position t sees x[t - (K-1)*d .. t] only
  /// (implicit left zero padding).
  NodeId conv1d_causal(NodeId x, NodeId w, std::size_t dilation) {
    const Tensor& xv = val(x);
    const Tensor& wv = val(w);
    const std::size_t c_out = wv.shape[0], c_in = wv.shape[1], ksize = wv.shape[2];
    const std::size_t len = xv.cols();
    if (xv.rows() != c_in)
      fail(ErrorKind::ChannelMismatch, "input channels " + std::to_string(xv.rows()) +
                                           " vs kernel expecting " + std::to_string(c_in));
    Tensor out({c_out, len});
    detail::conv1d_forward(xv.data.data(), c_in, len, wv.data.data(), c_out, ksize, dilation,
                           out.data.data());
    NodeId id = push(std::move(out), nullptr, [this, x, w, dilation](NodeId self) {
      const Tensor& xv = val(x);
      const Tensor& wv = val(w);
      const Tensor& gout = nodes_[self].grad;
      detail::conv1d_backward(xv.data.data(), wv.data.data(), gout.data.data(), wv.shape[1],
                              xv.cols(), wv.shape[0], wv.shape[2], dilation,
                              nodes_[x].grad.data.data(), nodes_[w].grad.data.data());
    });
    return id;
  }

  NodeId relu(NodeId x) {
    Tensor out = val(x);
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return push(std::move(out), nullptr, [this, x](NodeId self) {
      const Tensor& xv = val(x);
      const Tensor& gout = nodes_[self].grad;
      Tensor& gx = nodes_[x].grad;
      for (std::size_t i = 0; i < xv.numel(); ++i)
        if (xv.data[i] > 0.0) gx.data[i] += gout.data[i];
    });
  }

  NodeId add(NodeId a, NodeId b) {
    const Tensor& av = val(a);
    const Tensor& bv = val(b);
    if (av.shape != bv.shape) fail(ErrorKind::DimensionMismatch, "add on mismatched shapes");
    Tensor out = av;
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] += bv.data[i];
    return push(std::move(out), nullptr, [this, a, b](NodeId self) {
      const Tensor& gout = nodes_[self].grad;
      Tensor& ga = nodes_[a].grad;
      Tensor& gb = nodes_[b].grad;
      for (std::size_t i = 0; i < gout.numel(); ++i) {
        ga.data[i] += gout.data[i];
        gb.data[i] += gout.data[i];
      }
    });
  }

  NodeId mul(NodeId a, NodeId b) {
    const Tensor& av = val(a);
    const Tensor& bv = val(b);
    if (av.shape != bv.shape) fail(ErrorKind::DimensionMismatch, "mul on mismatched shapes");
    Tensor out = av;
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] *= bv.data[i];
    return push(std::move(out), nullptr, [this, a, b](NodeId self) {
      const Tensor& gout = nodes_[self].grad;
      const Tensor& av = val(a);
      const Tensor& bv = val(b);
      Tensor& ga = nodes_[a].grad;
      Tensor& gb = nodes_[b].grad;
      for (std::size_t i = 0; i < gout.numel(); ++i) {
        ga.data[i] += gout.data[i] * bv.data[i];
        gb.data[i] += gout.data[i] * av.data[i];
      }
    });
  }

  NodeId scale(NodeId x, double c) {
    Tensor out = val(x);
    for (double& v : out.data) v *= c;
    return push(std::move(out), nullptr, [this, x, c](NodeId self) {
      const Tensor& gout = nodes_[self].grad;
      Tensor& gx = nodes_[x].grad;
      for (std::size_t i = 0; i < gout.numel(); ++i) gx.data[i] += c * gout.data[i];
    });
  }

  NodeId sum(NodeId x) {
    double acc = 0.0;
    for (double v : val(x).data) acc += v;
    return push(Tensor::scalar(acc), nullptr, [this, x](NodeId self) {
      const double g = nodes_[self].grad.data[0];
      Tensor& gx = nodes_[x].grad;
      for (double& v : gx.data) v += g;
    });
  }

  /// Temporal mean pooling: C x L -> {C}.
  NodeId mean_cols(NodeId x) {
    const Tensor& xv = val(x);
    const std::size_t c = xv.rows(), len = xv.cols();
    Tensor out({c});
    for (std::size_t r = 0; r < c; ++r) {
      double acc = 0.0;
      const double* row = xv.row(r);
      for (std::size_t t = 0; t < len; ++t) acc += row[t];
      out.data[r] = acc / static_cast<double>(len);
    }
    return push(std::move(out), nullptr, [this, x, len](NodeId self) {
      const Tensor& gout = nodes_[self].grad;
      Tensor& gx = nodes_[x].grad;
      const double inv = 1.0 / static_cast<double>(len);
      for (std::size_t r = 0; r < gout.numel(); ++r) {
        double g = gout.data[r] * inv;
        double* row = gx.row(r);
        for (std::size_t t = 0; t < len; ++t) row[t] += g;
      }
    });
  }

  /// y = W x + b, with W: {E, C}, x: {C}, b: {E}.
  NodeId linear(NodeId w, NodeId x, NodeId b) {
    const Tensor& wv = val(w);
    const Tensor& xv = val(x);
    const Tensor& bv = val(b);
    const std::size_t e = wv.rows(), c = wv.cols();
    if (xv.numel() != c || bv.numel() != e)
      fail(ErrorKind::DimensionMismatch, "linear shape mismatch");
    Tensor out({e});
    for (std::size_t r = 0; r < e; ++r) {
      double acc = bv.data[r];
      const double* w_row = wv.row(r);
      for (std::size_t i = 0; i < c; ++i) acc += w_row[i] * xv.data[i];
      out.data[r] = acc;
    }
    return push(std::move(out), nullptr, [this, w, x, b](NodeId self) {
      const Tensor& gout = nodes_[self].grad;
      const Tensor& wv = val(w);
      const Tensor& xv = val(x);
      Tensor& gw = nodes_[w].grad;
      Tensor& gx = nodes_[x].grad;
      Tensor& gb = nodes_[b].grad;
      const std::size_t e = wv.rows(), c = wv.cols();
      for (std::size_t r = 0; r < e; ++r) {
        const double g = gout.data[r];
        gb.data[r] += g;
        const double* w_row = wv.row(r);
        double* gw_row = gw.row(r);
        for (std::size_t i = 0; i < c; ++i) {
          gw_row[i] += g * xv.data[i];
          gx.data[i] += g * w_row[i];
        }
      }
    });
  }

  /// Packs scalar nodes into one {n} vector.
  NodeId stack_scalars(const std::vector<NodeId>& parts) {
    Tensor out({parts.size()});
    for (std::size_t i = 0; i < parts.size(); ++i) out.data[i] = val(parts[i]).data[0];
    return push(std::move(out), nullptr, [this, parts](NodeId self) {
      const Tensor& gout = nodes_[self].grad;
      for (std::size_t i = 0; i < parts.size(); ++i)
        nodes_[parts[i]].grad.data[0] += gout.data[i];
    });
  }

  NodeId dot(NodeId a, NodeId b) {
    const Tensor& av = val(a);
    const Tensor& bv = val(b);
    if (av.numel() != bv.numel()) fail(ErrorKind::DimensionMismatch, "dot length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < av.numel(); ++i) acc += av.data[i] * bv.data[i];
    return push(Tensor::scalar(acc), nullptr, [this, a, b](NodeId self) {
      const double g = nodes_[self].grad.data[0];
      const Tensor& av = val(a);
      const Tensor& bv = val(b);
      Tensor& ga = nodes_[a].grad;
      Tensor& gb = nodes_[b].grad;
      for (std::size_t i = 0; i < av.numel(); ++i) {
        ga.data[i] += g * bv.data[i];
        gb.data[i] += g * av.data[i];
      }
    });
  }

  /// d = 1 - cos(u, v). cos is 0 whenever either norm falls below 1e-12
  /// (dead embeddings would otherwise produce NaN), which also zeroes the
  /// gradient there.
  NodeId cosine_distance(NodeId u, NodeId v) {
    const Tensor& uv = val(u);
    const Tensor& vv = val(v);
    if (uv.numel() != vv.numel())
      fail(ErrorKind::DimensionMismatch, "cosine on mismatched lengths");
    double dot = 0.0, nu2 = 0.0, nv2 = 0.0;
    for (std::size_t i = 0; i < uv.numel(); ++i) {
      dot += uv.data[i] * vv.data[i];
      nu2 += uv.data[i] * uv.data[i];
      nv2 += vv.data[i] * vv.data[i];
    }
    const double nu = std::sqrt(nu2), nv = std::sqrt(nv2);
    const bool dead = nu < 1e-12 || nv < 1e-12;
    const double cos = dead ? 0.0 : dot / std::max(nu * nv, 1e-12);
    return push(Tensor::scalar(1.0 - cos), nullptr, [this, u, v, dead, cos, nu, nv](NodeId self) {
      if (dead) return;
      const double g = nodes_[self].grad.data[0];
      const Tensor& uv = val(u);
      const Tensor& vv = val(v);
      Tensor& gu = nodes_[u].grad;
      Tensor& gv = nodes_[v].grad;
      const double inv_uv = 1.0 / (nu * nv);
      for (std::size_t i = 0; i < uv.numel(); ++i) {
        // d(1 - cos)/du = -(v/(|u||v|) - cos * u/|u|^2)
        gu.data[i] += -g * (vv.data[i] * inv_uv - cos * uv.data[i] / (nu * nu));
        gv.data[i] += -g * (uv.data[i] * inv_uv - cos * vv.data[i] / (nv * nv));
      }
    });
  }

  NodeId sigmoid(NodeId x) {
    Tensor out = val(x);
    for (double& v : out.data) {
      if (v >= 0.0) {
        v = 1.0 / (1.0 + std::exp(-v));
      } else {
        double e = std::exp(v);
        v = e / (1.0 + e);
      }
    }
    return push(std::move(out), nullptr, [this, x](NodeId self) {
      const Tensor& sv = nodes_[self].value;
      const Tensor& gout = nodes_[self].grad;
      Tensor& gx = nodes_[x].grad;
      for (std::size_t i = 0; i < sv.numel(); ++i)
        gx.data[i] += gout.data[i] * sv.data[i] * (1.0 - sv.data[i]);
    });
  }

  /// Numerically stable binary cross-entropy on a scalar logit:
  /// loss = max(z, 0) - z * y + log(1 + exp(-|z|)).
  NodeId bce_with_logits(NodeId logit, double target) {
    const double z = val(logit).data[0];
    const double loss = std::max(z, 0.0) - z * target + std::log1p(std::exp(-std::abs(z)));
    return push(Tensor::scalar(loss), nullptr, [this, logit, target](NodeId self) {
      const double g = nodes_[self].grad.data[0];
      const double z = val(logit).data[0];
      double p;
      if (z >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-z));
      } else {
        double e = std::exp(z);
        p = e / (1.0 + e);
      }
      nodes_[logit].grad.data[0] += g * (p - target);
    });
  }

  /// Reverse pass from a scalar loss. Grads of every node at or below the
  /// loss are (re)computed; repeated calls give identical results.
  void backward(NodeId loss) {
    if (nodes_.empty() || loss < 0 || static_cast<std::size_t>(loss) >= nodes_.size())
      fail(ErrorKind::NoForwardRecorded, "backward without a recorded forward pass");
    if (val(loss).numel() != 1)
      fail(ErrorKind::DimensionMismatch, "backward requires a scalar loss");
    for (NodeId id = 0; id <= loss; ++id) {
      Node& n = nodes_[id];
      n.grad = Tensor::zeros_like(n.external ? *n.external : n.value);
    }
    nodes_[loss].grad.data[0] = 1.0;
    for (NodeId id = loss; id >= 0; --id)
      if (nodes_[id].backprop) nodes_[id].backprop(id);
  }

  const Tensor& value(NodeId id) const { return val(id); }

  const Tensor& grad(NodeId id) const {
    if (nodes_[id].grad.numel() == 0)
      fail(ErrorKind::NoForwardRecorded, "gradients not computed for this node");
    return nodes_[id].grad;
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    std::function<void(NodeId)> backprop;
  };

  const Tensor& val(NodeId id) const {
    const Node& n = nodes_[id];
    return n.external ? *n.external : n.value;
  }

  NodeId push(Tensor value, const Tensor* external, std::function<void(NodeId)> backprop) {
    Node n;
    n.value = std::move(value);
    n.external = external;
    n.backprop = std::move(backprop);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
  std::vector<std::pair<const Tensor*, NodeId>> param_bindings_;
};

}  // namespace tfd::nn
