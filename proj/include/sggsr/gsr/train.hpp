#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sggsr/augment.hpp"
#include "sggsr/extract.hpp"
#include "sggsr/graph.hpp"
#include "sggsr/gsr/groups.hpp"
#include "sggsr/gsr/loss.hpp"
#include "sggsr/gsr/model.hpp"
#include "sggsr/gsr/sampling.hpp"

namespace sggsr::gsr {

struct TrainConfig {
  double lr = 0.01;
  double dropout = 0.6;
  double weight_decay = 5e-4;
  double lambda_E = 3.0;
  double p_n = 0.5;
  double lambda_aug = 0.9;
  std::size_t epochs = 1000;
  std::size_t patience = 200;
  std::uint64_t seed = 0;
  GroupScheme scheme = GroupScheme::kLowMidHigh;
  std::size_t hidden_dim = 16;
  std::size_t num_heads = 8;
  std::size_t num_layers = 2;

  void validate() const {
    if (!(lr > 0)) throw ConfigError("lr must be > 0");
    if (!(dropout >= 0 && dropout < 1)) throw ConfigError("dropout must be in [0,1)");
    if (!(p_n > 0)) throw ConfigError("p_n must be > 0");
    if (!(weight_decay >= 0)) throw ConfigError("weight_decay must be >= 0");
    if (!(lambda_E >= 0)) throw ConfigError("lambda_E must be >= 0");
    if (!(lambda_aug >= 0 && lambda_aug <= 1)) throw ConfigError("lambda_aug must be in [0,1]");
    if (num_layers < 1 || num_heads < 1 || hidden_dim < 1) throw ConfigError("invalid architecture");
  }
};

/// Phase-1 output consumed by training.
struct SubgraphArtifacts {
  EdgeList subgraph;
  KnnCandidates candidates;
};

template <class T>
Mat<T> to_matrix(const FeatureMatrix& x) {
  return x.cast<T>();
}

template <class T>
Mat<T> softmax_rows(const Mat<T>& logits) {
  Mat<T> p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const T mx = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - mx).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

template <class T>
std::vector<int> argmax_rows(const Mat<T>& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index c;
    logits.row(i).maxCoeff(&c);
    out[static_cast<std::size_t>(i)] = static_cast<int>(c);
  }
  return out;
}

inline double accuracy(std::span<const int> pred, std::span<const int> labels, std::span<const NodeId> nodes) {
  if (nodes.empty()) return 0.0;
  std::size_t hit = 0;
  for (NodeId n : nodes) hit += pred[n] == labels[n];
  return static_cast<double>(hit) / static_cast<double>(nodes.size());
}

/// Inputs of one evaluation of L_final = L_node + lambda_E * sum_l L_link^l.
template <class T>
struct ObjectiveInputs {
  const Mat<T>* features = nullptr;
  std::span<const Edge> positives;       // message-passing edges, also link positives
  std::span<const int> positive_group;   // aligned with positives
  std::span<const Edge> negatives;
  std::span<const int> negative_group;
  std::size_t num_groups = 1;
  std::span<const int> labels;
  std::span<const NodeId> mask;
  double lambda_E = 0.0;
  bool include_node = true;
  std::optional<std::size_t> link_layer;  // restrict the link term to one layer
  ForwardOptions forward;
};

template <class T>
struct Objective {
  T total = 0;
  T node = 0;
  std::vector<T> link;  // per layer, before lambda_E
  Gradients<T> grads;
  ForwardCache<T> cache;
};

template <class T>
Objective<T> evaluate_objective(const ModelParams<T>& params, const ObjectiveInputs<T>& in, bool with_grad = true) {
  Objective<T> obj;
  obj.cache = forward(params, *in.features, MessageGraph(in.features->rows(), in.positives), in.forward);
  Mat<T> dlogits = Mat<T>::Zero(obj.cache.logits.rows(), obj.cache.logits.cols());
  if (in.include_node) {
    auto nl = loss_node<T>(obj.cache.logits, in.labels, in.mask);
    obj.node = nl.value;
    obj.total += nl.value;
    dlogits = std::move(nl.dlogits);
  }
  std::vector<std::vector<PairGradient<T>>> link;
  obj.link.assign(params.num_layers(), T(0));
  const bool use_link = in.lambda_E > 0;
  if (use_link) link.resize(params.num_layers());
  for (std::size_t l = 0; use_link && l < params.num_layers(); ++l) {
    if (in.link_layer && *in.link_layer != l) continue;
    const auto pos = pair_scores(obj.cache, l, in.positives);
    const auto neg = pair_scores(obj.cache, l, in.negatives);
    auto ll = loss_link_grouped<T>(pos, in.positive_group, neg, in.negative_group, in.num_groups);
    obj.link[l] = ll.value;
    obj.total += static_cast<T>(in.lambda_E) * ll.value;
    const T scale = static_cast<T>(in.lambda_E);
    PairGradient<T> gp{{in.positives.begin(), in.positives.end()}, std::move(ll.grad_pos)};
    PairGradient<T> gn{{in.negatives.begin(), in.negatives.end()}, std::move(ll.grad_neg)};
    for (T& g : gp.grad) g *= scale;
    for (T& g : gn.grad) g *= scale;
    link[l].push_back(std::move(gp));
    link[l].push_back(std::move(gn));
  }
  if (with_grad) obj.grads = backward<T>(params, obj.cache, dlogits, link);
  return obj;
}

/// Adaptive-moment optimizer with L2 weight decay folded into the gradient.
template <class T>
struct Adam {
  double lr = 0.01;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t steps = 0;
  Gradients<T> m, v;

  void step(ModelParams<T>& params, const Gradients<T>& grads) {
    if (m.empty()) {
      m = v = grads;
      for (auto& layer : m)
        for (auto& w : layer) w.setZero();
      v = m;
    }
    ++steps;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(steps));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(steps));
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
      for (std::size_t h = 0; h < params.weights[l].size(); ++h) {
        Mat<T>& w = params.weights[l][h];
        const Mat<T> g = grads[l][h] + static_cast<T>(weight_decay) * w;
        m[l][h] = static_cast<T>(beta1) * m[l][h] + static_cast<T>(1 - beta1) * g;
        v[l][h] = static_cast<T>(beta2) * v[l][h] + static_cast<T>(1 - beta2) * g.cwiseProduct(g);
        const T lr_t = static_cast<T>(lr / c1);
        const T inv_c2 = static_cast<T>(1.0 / c2);
        const T e = static_cast<T>(eps);
        w.array() -= lr_t * m[l][h].array() / ((v[l][h].array() * inv_c2).sqrt() + e);
      }
    }
    ++params.generation;
  }
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss_total = 0;
  double loss_node = 0;
  std::vector<double> loss_link;
  double val_accuracy = 0;
  double val_loss = 0;
  std::size_t augmented_edges = 0;
  std::size_t jsd_evaluations = 0;
  std::size_t negatives = 0;
  std::vector<std::size_t> group_sizes;
};

struct TrainResult {
  ModelParams<float> params;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0;
  EdgeList last_augmented;
  GroupPartition last_partition;
};

struct TrainHooks {
  std::function<void(std::size_t, const AugmentedEdgeSet&)> on_augment;
};

/// Phase 2: per epoch, augment the clean sub-graph, pass messages over the
/// augmented edges, and minimize node loss plus degree-grouped link loss.
/// Early stopping on validation accuracy (then loss) measured on the attacked graph.
inline TrainResult train(const GraphBundle& g, const SubgraphArtifacts& phase1, const TrainConfig& cfg,
                         const TrainHooks& hooks = {}) {
  using T = float;
  cfg.validate();
  if (phase1.subgraph.empty()) throw ConfigError("phase-1 sub-graph is empty");
  if (g.splits.train.empty()) throw ConfigError("no training nodes");
  const std::size_t n = g.num_nodes;
  const int classes = g.num_classes();
  const Mat<T> x = to_matrix<T>(g.features);

  Architecture arch{g.num_features(), cfg.hidden_dim, static_cast<std::size_t>(classes), cfg.num_layers,
                    cfg.num_heads};
  TrainResult result;
  result.params = ModelParams<T>::init(arch, cfg.seed);
  Adam<T> opt;
  opt.lr = cfg.lr;
  opt.weight_decay = cfg.weight_decay;

  const DegreeProfile deg = degree_profile(n, phase1.subgraph);
  const MessageGraph sub_graph(n, phase1.subgraph);
  const MessageGraph eval_graph(n, g.edges);
  ClassProbMatrix probs = ClassProbMatrix::uniform(n, static_cast<std::size_t>(classes));

  ModelParams<T> best = result.params;
  double best_val = -1;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    AugmentedEdgeSet aug;
    if (cfg.lambda_aug > 0) {
      if (epoch > 0) probs.probs = softmax_rows(forward(result.params, x, sub_graph).logits).cast<double>();
      aug = augment_subgraph(phase1.subgraph, probs, phase1.candidates, cfg.lambda_aug);
      if (hooks.on_augment) hooks.on_augment(epoch, aug);
    } else {
      aug.base = aug.edges = phase1.subgraph;
    }

    const GroupPartition part = split_groups(aug.edges, deg, cfg.scheme);
    std::vector<std::size_t> sizes;
    for (const auto& grp : part.groups) sizes.push_back(grp.size());
    const auto counts =
        apportion(sizes, static_cast<std::size_t>(std::floor(cfg.p_n * static_cast<double>(aug.edges.size()))));
    std::size_t total_neg = 0;
    for (std::size_t c : counts) total_neg += c;
    const auto negs = sample_non_edges(aug.edges, total_neg, n, cfg.seed, epoch);
    std::vector<int> neg_group;
    for (std::size_t grp = 0; grp < counts.size(); ++grp) neg_group.insert(neg_group.end(), counts[grp], static_cast<int>(grp));

    ObjectiveInputs<T> in;
    in.features = &x;
    in.positives = aug.edges;
    in.positive_group = part.edge_group;
    in.negatives = negs;
    in.negative_group = neg_group;
    in.num_groups = part.num_groups();
    in.labels = g.labels;
    in.mask = g.splits.train;
    in.lambda_E = cfg.lambda_E;
    in.forward = {true, cfg.dropout, derive_seed(cfg.seed, {stream::kDropout, epoch})};
    auto obj = evaluate_objective(result.params, in);
    if (!std::isfinite(obj.total))
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + " (loss " +
                         std::to_string(obj.total) + ")");
    opt.step(result.params, obj.grads);

    EpochLog log;
    log.epoch = epoch;
    log.loss_total = obj.total;
    log.loss_node = obj.node;
    log.loss_link.assign(obj.link.begin(), obj.link.end());
    log.augmented_edges = aug.edges.size();
    log.jsd_evaluations = aug.jsd_evaluations;
    log.negatives = negs.size();
    log.group_sizes = sizes;

    if (!g.splits.val.empty()) {
      const Mat<T> logits = forward(result.params, x, eval_graph).logits;
      log.val_accuracy = accuracy(argmax_rows(logits), g.labels, g.splits.val);
      log.val_loss = loss_node<T>(logits, g.labels, g.splits.val).value;
    }
    result.log.push_back(std::move(log));
    result.last_augmented = aug.edges;
    result.last_partition = part;

    // Accuracy ties on a small validation set are broken by validation loss.
    const double val = result.log.back().val_accuracy, val_loss = result.log.back().val_loss;
    if (g.splits.val.empty() || val > best_val || (val == best_val && val_loss < best_val_loss)) {
      best_val = val;
      best_val_loss = val_loss;
      best = result.params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  result.best_val_accuracy = std::max(0.0, best_val);
  result.params = std::move(best);
  return result;
}

struct Inference {
  std::vector<int> predictions;
  std::vector<double> alpha;  // final-layer attention per attacked edge
  Mat<float> logits;
};

/// Message passing over the attacked edge set with learned attention.
inline Inference infer_refined(const ModelParams<float>& params, const GraphBundle& g) {
  if (g.num_features() != params.in_dim(0))
    throw ConfigError("feature dimension " + std::to_string(g.num_features()) + " differs from trained model (" +
                      std::to_string(params.in_dim(0)) + ")");
  const Mat<float> x = to_matrix<float>(g.features);
  auto cache = forward(params, x, MessageGraph(g.num_nodes, g.edges));
  Inference out;
  out.predictions = argmax_rows(cache.logits);
  out.alpha = edge_attention(cache, params.num_layers() - 1, g.edges);
  out.logits = cache.logits;
  return out;
}

}  // namespace sggsr::gsr
