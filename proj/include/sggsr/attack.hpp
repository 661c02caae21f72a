#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "sggsr/graph.hpp"
#include "sggsr/rng.hpp"

namespace sggsr {

struct AttackConfig {
  double ptb_rate = 0.0;
  double gamma = 0.0;
  double noisy_node_frac = 0.0;
  std::uint64_t seed = 0;
  /// Probability that an injected edge is drawn from inter-class pairs.
  double inter_class_prob = 0.9;

  void validate() const {
    if (ptb_rate < 0) throw ConfigError("ptb_rate must be >= 0");
    if (gamma < 0) throw ConfigError("gamma must be >= 0");
    if (noisy_node_frac < 0 || noisy_node_frac > 1) throw ConfigError("noisy_node_frac must be in [0,1]");
    if (inter_class_prob < 0 || inter_class_prob > 1) throw ConfigError("inter_class_prob must be in [0,1]");
  }
};

struct FraudConfig {
  std::size_t num_fraudsters = 100;
  std::size_t reviews_per_fraudster = 100;
  std::uint64_t seed = 0;
  double blend = 0.5;

  void validate() const {
    if (num_fraudsters < 1 || reviews_per_fraudster < 1)
      throw ConfigError("fraudster and review counts must be >= 1");
    if (blend < 0 || blend > 1) throw ConfigError("blend must be in [0,1]");
  }
};

namespace attack_detail {

/// Merges new edges into a bundle's edge list. Tags of existing edges are
/// kept (clean when the input is untagged); new edges become adversarial.
inline void merge_tagged(GraphBundle& g, EdgeList added) {
  canonicalize(added);
  std::vector<Provenance> old_tags =
      g.provenance ? *g.provenance : std::vector<Provenance>(g.edges.size(), Provenance::kClean);
  EdgeList merged;
  std::vector<Provenance> tags;
  merged.reserve(g.edges.size() + added.size());
  tags.reserve(g.edges.size() + added.size());
  std::size_t i = 0, j = 0;
  while (i < g.edges.size() || j < added.size()) {
    if (j == added.size() || (i < g.edges.size() && g.edges[i] <= added[j])) {
      if (j < added.size() && g.edges[i] == added[j]) ++j;
      merged.push_back(g.edges[i]);
      tags.push_back(old_tags[i]);
      ++i;
    } else {
      merged.push_back(added[j++]);
      tags.push_back(Provenance::kAdversarial);
    }
  }
  g.edges = std::move(merged);
  g.provenance = std::move(tags);
}

}  // namespace attack_detail

/// Random label-aware structure poisoning: adds floor(ptb_rate*|E|) new
/// edges, preferring endpoints with different labels.
inline GraphBundle inject_structure_attack(const GraphBundle& in, const AttackConfig& cfg) {
  cfg.validate();
  GraphBundle out = in;
  if (!out.provenance) out.provenance = std::vector<Provenance>(out.edges.size(), Provenance::kClean);
  const auto count = static_cast<std::size_t>(std::floor(cfg.ptb_rate * static_cast<double>(in.edges.size())));
  if (count == 0) return out;

  const std::size_t n = in.num_nodes;
  const std::size_t capacity = n * (n - 1) / 2 - in.edges.size();
  if (count > capacity)
    throw GraphError("graph too dense: cannot place " + std::to_string(count) + " new edges, only " +
                     std::to_string(capacity) + " non-edges exist");

  std::vector<NodeId> labeled;
  for (NodeId i = 0; i < n; ++i)
    if (in.labels[i] != kNoLabel) labeled.push_back(i);
  if (labeled.size() < 2) throw ConfigError("structure attack needs labeled nodes for inter-class targeting");

  Rng rng = make_rng(cfg.seed, {stream::kStructureAttack});
  std::uniform_int_distribution<std::size_t> pick_labeled(0, labeled.size() - 1);
  std::uniform_int_distribution<NodeId> pick_any(0, static_cast<NodeId>(n - 1));
  std::bernoulli_distribution inter(cfg.inter_class_prob);

  EdgeList chosen;
  std::set<Edge> taken;
  const std::size_t max_attempts = 200 * count + 10000;
  std::size_t attempts = 0;
  while (chosen.size() < count) {
    if (++attempts > max_attempts)
      throw GraphError("graph too dense: could not place " + std::to_string(count) + " adversarial edges");
    NodeId a, b;
    if (inter(rng)) {
      a = labeled[pick_labeled(rng)];
      b = labeled[pick_labeled(rng)];
      if (in.labels[a] == in.labels[b]) continue;
    } else {
      a = pick_any(rng);
      b = pick_any(rng);
    }
    if (a == b) continue;
    const Edge e(a, b);
    if (contains(in.edges, e)) continue;
    if (!taken.insert(e).second) continue;
    chosen.push_back(e);
  }
  attack_detail::merge_tagged(out, std::move(chosen));
  return out;
}

/// Adds gamma * N(0, I) noise to floor(noisy_node_frac * N) uniformly chosen rows.
inline GraphBundle inject_feature_noise(const GraphBundle& in, const AttackConfig& cfg) {
  cfg.validate();
  if (!(cfg.gamma > 0)) throw ConfigError("feature noise requires gamma > 0");
  GraphBundle out = in;
  const auto count =
      static_cast<std::size_t>(std::floor(cfg.noisy_node_frac * static_cast<double>(in.num_nodes)));
  std::vector<NodeId> order(in.num_nodes);
  std::iota(order.begin(), order.end(), NodeId{0});
  Rng pick = make_rng(cfg.seed, {stream::kFeatureNoise});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> d(i, order.size() - 1);
    std::swap(order[i], order[d(pick)]);
  }
  for (std::size_t i = 0; i < count; ++i) {
    const NodeId node = order[i];
    Rng rng = make_rng(cfg.seed, {stream::kFeatureNoise, 1, node});
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index c = 0; c < out.features.cols(); ++c) out.features(node, c) += cfg.gamma * normal(rng);
  }
  return out;
}

/// Products each fraudster reviewed, in sampling order.
struct FraudTrace {
  std::vector<std::vector<NodeId>> product_sets;
};

/// E-commerce fraud simulation: every fraudster reviews a random product set,
/// adding the co-review clique, and each review copies (blends in) the
/// features of another product.
inline GraphBundle generate_fraud_graph(const GraphBundle& base, const FraudConfig& cfg,
                                        FraudTrace* trace = nullptr) {
  cfg.validate();
  const std::size_t n = base.num_nodes;
  if (cfg.reviews_per_fraudster > n)
    throw ConfigError("reviews_per_fraudster (" + std::to_string(cfg.reviews_per_fraudster) +
                      ") exceeds the number of products (" + std::to_string(n) + ")");
  GraphBundle out = base;
  if (!out.provenance) out.provenance = std::vector<Provenance>(out.edges.size(), Provenance::kClean);
  if (trace) trace->product_sets.clear();

  std::vector<NodeId> all(n);
  std::iota(all.begin(), all.end(), NodeId{0});
  EdgeList added;
  for (std::size_t f = 0; f < cfg.num_fraudsters; ++f) {
    Rng rng = make_rng(cfg.seed, {stream::kFraud, f});
    std::vector<NodeId> products;
    products.reserve(cfg.reviews_per_fraudster);
    std::sample(all.begin(), all.end(), std::back_inserter(products), cfg.reviews_per_fraudster, rng);
    for (std::size_t a = 0; a < products.size(); ++a)
      for (std::size_t b = a + 1; b < products.size(); ++b) added.emplace_back(products[a], products[b]);
    if (n > 1) {
      std::uniform_int_distribution<NodeId> donor_pick(0, static_cast<NodeId>(n - 2));
      for (NodeId p : products) {
        NodeId donor = donor_pick(rng);
        if (donor >= p) ++donor;
        out.features.row(p) = (1.0 - cfg.blend) * out.features.row(p) + cfg.blend * base.features.row(donor);
      }
    }
    if (trace) trace->product_sets.push_back(std::move(products));
  }
  attack_detail::merge_tagged(out, std::move(added));
  return out;
}

}  // namespace sggsr
