#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sggsr/graph.hpp"
#include "sggsr/rng.hpp"

namespace sggsr::gsr {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kLeakySlope = 0.2;

template <class T>
T leaky_relu(T x) {
  return x > T(0) ? x : T(kLeakySlope) * x;
}

template <class T>
T leaky_relu_grad(T x) {
  return x > T(0) ? T(1) : T(kLeakySlope);
}

struct Architecture {
  std::size_t in_dim = 0;
  std::size_t hidden_dim = 16;
  std::size_t num_classes = 0;
  std::size_t num_layers = 2;
  std::size_t num_heads = 8;
};

/// Per-layer, per-head projection matrices (out x in). Hidden layers
/// concatenate heads; the output layer averages them into class scores.
template <class T>
struct ModelParams {
  Architecture arch;
  std::vector<std::vector<Mat<T>>> weights;  // [layer][head]
  /// Bumped on every in-place update so stale forward caches are detected.
  std::uint64_t generation = 0;

  std::size_t num_layers() const { return weights.size(); }
  std::size_t num_heads() const { return arch.num_heads; }
  bool is_output(std::size_t layer) const { return layer + 1 == weights.size(); }
  std::size_t out_dim(std::size_t layer) const { return static_cast<std::size_t>(weights[layer][0].rows()); }
  std::size_t in_dim(std::size_t layer) const { return static_cast<std::size_t>(weights[layer][0].cols()); }

  static ModelParams init(const Architecture& arch, std::uint64_t seed) {
    if (arch.num_layers < 1 || arch.num_heads < 1 || arch.in_dim < 1 || arch.num_classes < 1)
      throw ConfigError("invalid architecture");
    ModelParams p;
    p.arch = arch;
    std::size_t in = arch.in_dim;
    for (std::size_t l = 0; l < arch.num_layers; ++l) {
      const bool last = l + 1 == arch.num_layers;
      const std::size_t out = last ? arch.num_classes : arch.hidden_dim;
      Rng rng = make_rng(seed, {stream::kModelInit, l});
      const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
      std::uniform_real_distribution<double> u(-bound, bound);
      std::vector<Mat<T>> heads;
      for (std::size_t h = 0; h < arch.num_heads; ++h) {
        Mat<T> w(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<T>(u(rng));
        heads.push_back(std::move(w));
      }
      p.weights.push_back(std::move(heads));
      in = out * arch.num_heads;
    }
    return p;
  }

  template <class U>
  ModelParams<U> cast() const {
    ModelParams<U> p;
    p.arch = arch;
    p.generation = generation;
    for (const auto& layer : weights) {
      std::vector<Mat<U>> heads;
      for (const auto& w : layer) heads.push_back(w.template cast<U>());
      p.weights.push_back(std::move(heads));
    }
    return p;
  }

  bool operator==(const ModelParams& o) const {
    if (weights.size() != o.weights.size()) return false;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (weights[l].size() != o.weights[l].size()) return false;
      for (std::size_t h = 0; h < weights[l].size(); ++h)
        if (weights[l][h].rows() != o.weights[l][h].rows() || weights[l][h].cols() != o.weights[l][h].cols() ||
            weights[l][h] != o.weights[l][h])
          return false;
    }
    return true;
  }
};

/// Attention neighborhoods N_i ∪ {i} in CSR form. Each row is sorted and
/// includes the self-loop.
struct MessageGraph {
  std::size_t num_nodes = 0;
  std::vector<std::size_t> offsets;
  std::vector<NodeId> targets;

  MessageGraph() = default;
  MessageGraph(std::size_t n, std::span<const Edge> edges) : num_nodes(n), offsets(n + 1, 0) {
    for (const Edge& e : edges) {
      if (e.v >= n || e.u == e.v) throw GraphError("message graph: invalid edge");
      ++offsets[e.u + 1];
      ++offsets[e.v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i] + 1;
    targets.resize(offsets.back());
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (NodeId i = 0; i < n; ++i) targets[cursor[i]++] = i;
    for (const Edge& e : edges) {
      targets[cursor[e.u]++] = e.v;
      targets[cursor[e.v]++] = e.u;
    }
    for (std::size_t i = 0; i < n; ++i)
      std::sort(targets.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                targets.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]));
  }

  std::size_t num_arcs() const { return targets.size(); }

  /// Position of arc i -> j.
  std::size_t arc(NodeId i, NodeId j) const {
    auto b = targets.begin() + static_cast<std::ptrdiff_t>(offsets[i]);
    auto e = targets.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]);
    auto it = std::lower_bound(b, e, j);
    if (it == e || *it != j) throw GraphError("no arc " + std::to_string(i) + "->" + std::to_string(j));
    return static_cast<std::size_t>(it - targets.begin());
  }
};

struct ForwardOptions {
  bool dropout_active = false;
  double dropout = 0.0;
  std::uint64_t seed = 0;
};

template <class T>
struct LayerCache {
  Mat<T> input;      // after dropout
  Mat<T> keep;       // dropout scale per input entry; empty when inactive
  std::vector<Mat<T>> z;                 // [head] N x out
  std::vector<std::vector<T>> e;         // [head][arc] raw dot-product score
  std::vector<std::vector<T>> alpha;     // [head][arc]
  std::vector<Mat<T>> agg;               // [head] N x out, before activation
  Mat<T> output;
};

/// Everything the backward pass needs, plus the per-layer attention state.
template <class T>
struct ForwardCache {
  MessageGraph graph;
  std::vector<LayerCache<T>> layers;
  Mat<T> logits;
  std::uint64_t generation = 0;
  const void* owner = nullptr;
};

namespace model_detail {

template <class T>
void check_finite(const Mat<T>& m, std::size_t layer, const char* what) {
  if (!m.allFinite())
    throw NumericError("non-finite " + std::string(what) + " in layer " + std::to_string(layer));
}

}  // namespace model_detail

template <class T>
ForwardCache<T> forward(const ModelParams<T>& params, const Mat<T>& features, MessageGraph graph,
                        const ForwardOptions& opt = {}) {
  const std::size_t n = graph.num_nodes;
  if (static_cast<std::size_t>(features.rows()) != n) throw ConfigError("feature rows differ from node count");
  if (static_cast<std::size_t>(features.cols()) != params.in_dim(0))
    throw ConfigError("feature dimension " + std::to_string(features.cols()) + " differs from model input " +
                      std::to_string(params.in_dim(0)));
  ForwardCache<T> cache;
  cache.generation = params.generation;
  cache.owner = &params;
  const std::size_t heads = params.num_heads();
  const Mat<T>* x = &features;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    LayerCache<T> lc;
    lc.input = *x;
    if (opt.dropout_active && opt.dropout > 0) {
      Rng rng = make_rng(opt.seed, {stream::kDropout, l});
      std::bernoulli_distribution keep(1.0 - opt.dropout);
      const T scale = static_cast<T>(1.0 / (1.0 - opt.dropout));
      lc.keep.resize(lc.input.rows(), lc.input.cols());
      for (Eigen::Index i = 0; i < lc.keep.size(); ++i) lc.keep.data()[i] = keep(rng) ? scale : T(0);
      lc.input = lc.input.cwiseProduct(lc.keep);
    }
    const std::size_t out = params.out_dim(l);
    const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(out));
    const bool last = params.is_output(l);
    lc.output = last ? Mat<T>::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out))
                     : Mat<T>(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out * heads));
    for (std::size_t h = 0; h < heads; ++h) {
      Mat<T> z = lc.input * params.weights[l][h].transpose();
      std::vector<T> e(graph.num_arcs()), alpha(graph.num_arcs());
      Mat<T> agg = Mat<T>::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out));
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b = graph.offsets[i], en = graph.offsets[i + 1];
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t a = b; a < en; ++a) {
          e[a] = z.row(static_cast<Eigen::Index>(i)).dot(z.row(graph.targets[a])) * inv_sqrt;
          alpha[a] = leaky_relu(e[a]);
          mx = std::max(mx, alpha[a]);
        }
        T sum = 0;
        for (std::size_t a = b; a < en; ++a) {
          alpha[a] = std::exp(alpha[a] - mx);
          sum += alpha[a];
        }
        for (std::size_t a = b; a < en; ++a) {
          alpha[a] /= sum;
          agg.row(static_cast<Eigen::Index>(i)) += alpha[a] * z.row(graph.targets[a]);
        }
      }
      if (last) {
        lc.output += agg / static_cast<T>(heads);
      } else {
        lc.output.middleCols(static_cast<Eigen::Index>(h * out), static_cast<Eigen::Index>(out)) =
            agg.unaryExpr([](T v) { return leaky_relu(v); });
      }
      lc.z.push_back(std::move(z));
      lc.e.push_back(std::move(e));
      lc.alpha.push_back(std::move(alpha));
      lc.agg.push_back(std::move(agg));
    }
    model_detail::check_finite(lc.output, l, "activation");
    cache.layers.push_back(std::move(lc));
    x = &cache.layers.back().output;
  }
  cache.logits = cache.layers.back().output;
  cache.graph = std::move(graph);
  return cache;
}

/// Head-averaged dot-product score e_ij of layer `layer` for arbitrary pairs
/// (edges or sampled non-edges).
template <class T>
std::vector<T> pair_scores(const ForwardCache<T>& cache, std::size_t layer, std::span<const Edge> pairs) {
  const LayerCache<T>& lc = cache.layers.at(layer);
  const std::size_t heads = lc.z.size();
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(lc.z[0].cols()));
  std::vector<T> s(pairs.size(), T(0));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    T acc = 0;
    for (std::size_t h = 0; h < heads; ++h) acc += lc.z[h].row(pairs[k].u).dot(lc.z[h].row(pairs[k].v)) * inv_sqrt;
    s[k] = acc / static_cast<T>(heads);
  }
  return s;
}

/// Head-averaged attention of undirected edges, averaging both directions.
template <class T>
std::vector<double> edge_attention(const ForwardCache<T>& cache, std::size_t layer, std::span<const Edge> edges) {
  const LayerCache<T>& lc = cache.layers.at(layer);
  std::vector<double> out(edges.size(), 0.0);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::size_t ab = cache.graph.arc(edges[k].u, edges[k].v);
    const std::size_t ba = cache.graph.arc(edges[k].v, edges[k].u);
    double acc = 0;
    for (const auto& alpha : lc.alpha) acc += 0.5 * (static_cast<double>(alpha[ab]) + static_cast<double>(alpha[ba]));
    out[k] = acc / static_cast<double>(lc.alpha.size());
  }
  return out;
}

/// Upstream gradient of the loss with respect to the head-averaged score of
/// each pair in one layer.
template <class T>
struct PairGradient {
  std::vector<Edge> pairs;
  std::vector<T> grad;
};

template <class T>
using Gradients = std::vector<std::vector<Mat<T>>>;  // shaped like ModelParams::weights

/// Exact reverse-mode differentiation of `forward`. `dlogits` is dL/dlogits;
/// `link` holds, per layer, dL/d(score) for pairs scored with pair_scores.
template <class T>
Gradients<T> backward(const ModelParams<T>& params, const ForwardCache<T>& cache, const Mat<T>& dlogits,
                      std::span<const std::vector<PairGradient<T>>> link = {}) {
  if (cache.owner != &params || cache.generation != params.generation)
    throw Error("stale forward cache: parameters changed since the forward pass");
  if (!link.empty() && link.size() != params.num_layers())
    throw ConfigError("link gradients must be given for every layer");
  const MessageGraph& graph = cache.graph;
  const std::size_t n = graph.num_nodes;
  const std::size_t heads = params.num_heads();
  Gradients<T> grads(params.num_layers());
  Mat<T> dout = dlogits;
  for (std::size_t li = params.num_layers(); li-- > 0;) {
    const LayerCache<T>& lc = cache.layers[li];
    const bool last = params.is_output(li);
    const std::size_t out = params.out_dim(li);
    const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(out));
    Mat<T> dinput = Mat<T>::Zero(lc.input.rows(), lc.input.cols());
    grads[li].resize(heads);
    std::vector<T> dalpha;
    for (std::size_t h = 0; h < heads; ++h) {
      const Mat<T>& z = lc.z[h];
      const std::vector<T>& e = lc.e[h];
      const std::vector<T>& alpha = lc.alpha[h];
      Mat<T> dagg;
      if (last) {
        dagg = dout / static_cast<T>(heads);
      } else {
        dagg = dout.middleCols(static_cast<Eigen::Index>(h * out), static_cast<Eigen::Index>(out))
                   .cwiseProduct(lc.agg[h].unaryExpr([](T v) { return leaky_relu_grad(v); }));
      }
      Mat<T> dz = Mat<T>::Zero(z.rows(), z.cols());
      dalpha.resize(graph.num_arcs());
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const std::size_t b = graph.offsets[i], en = graph.offsets[i + 1];
        T weighted = 0;
        for (std::size_t a = b; a < en; ++a) {
          const NodeId j = graph.targets[a];
          dz.row(j) += alpha[a] * dagg.row(ii);
          dalpha[a] = dagg.row(ii).dot(z.row(j));
          weighted += alpha[a] * dalpha[a];
        }
        for (std::size_t a = b; a < en; ++a) {
          const NodeId j = graph.targets[a];
          const T de = alpha[a] * (dalpha[a] - weighted) * leaky_relu_grad(e[a]) * inv_sqrt;
          dz.row(ii) += de * z.row(j);
          dz.row(j) += de * z.row(ii);
        }
      }
      if (!link.empty()) {
        for (const PairGradient<T>& pg : link[li]) {
          for (std::size_t k = 0; k < pg.pairs.size(); ++k) {
            const T de = pg.grad[k] / static_cast<T>(heads) * inv_sqrt;
            const NodeId u = pg.pairs[k].u, v = pg.pairs[k].v;
            dz.row(u) += de * z.row(v);
            dz.row(v) += de * z.row(u);
          }
        }
      }
      grads[li][h] = dz.transpose() * lc.input;
      dinput += dz * params.weights[li][h];
    }
    if (lc.keep.size() > 0) dinput = dinput.cwiseProduct(lc.keep);
    dout = std::move(dinput);
  }
  return grads;
}

}  // namespace sggsr::gsr
