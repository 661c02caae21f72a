#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "sggsr/graph.hpp"
#include "sggsr/rng.hpp"

namespace sggsr::harness {

struct SbmConfig {
  std::size_t blocks = 2;
  std::size_t nodes_per_block = 100;
  double p_in = 0.1;
  double p_out = 0.002;
  std::size_t feature_dim = 16;
  double feature_shift = 1.0;
  std::uint64_t seed = 0;
};

/// Random 1:1:8 train/val/test split over the labeled nodes.
inline Splits random_split(const std::vector<int>& labels, Rng& rng) {
  std::vector<NodeId> nodes;
  for (NodeId i = 0; i < labels.size(); ++i)
    if (labels[i] != kNoLabel) nodes.push_back(i);
  std::shuffle(nodes.begin(), nodes.end(), rng);
  const std::size_t tenth = nodes.size() / 10;
  Splits s;
  s.train.assign(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(tenth));
  s.val.assign(nodes.begin() + static_cast<std::ptrdiff_t>(tenth), nodes.begin() + static_cast<std::ptrdiff_t>(2 * tenth));
  s.test.assign(nodes.begin() + static_cast<std::ptrdiff_t>(2 * tenth), nodes.end());
  for (auto* v : {&s.train, &s.val, &s.test}) std::sort(v->begin(), v->end());
  return s;
}

inline bool every_class_trained(const Splits& s, const std::vector<int>& labels, int classes) {
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(classes), 0);
  for (NodeId n : s.train) seen[static_cast<std::size_t>(labels[n])] = 1;
  return std::all_of(seen.begin(), seen.end(), [](std::uint8_t b) { return b != 0; });
}

/// Stochastic block model with Gaussian features. Block c has mean
/// feature_shift along axis (c mod feature_dim) and unit-variance noise.
inline GraphBundle generate_sbm(const SbmConfig& cfg) {
  if (cfg.blocks < 2) throw ConfigError("sbm needs at least 2 blocks");
  if (!(cfg.p_in > cfg.p_out)) throw ConfigError("sbm requires p_in > p_out");
  if (cfg.p_out < 0 || cfg.p_in > 1) throw ConfigError("sbm probabilities must lie in [0,1]");
  if (cfg.feature_dim < 1 || cfg.nodes_per_block < 1) throw ConfigError("sbm sizes must be >= 1");
  constexpr int kMaxTries = 10;
  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    GraphBundle g;
    g.num_nodes = cfg.blocks * cfg.nodes_per_block;
    g.labels.resize(g.num_nodes);
    for (NodeId i = 0; i < g.num_nodes; ++i) g.labels[i] = static_cast<int>(i / cfg.nodes_per_block);

    Rng edge_rng = make_rng(cfg.seed, {stream::kSbm, static_cast<std::uint64_t>(attempt), 0});
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (NodeId a = 0; a < g.num_nodes; ++a)
      for (NodeId b = a + 1; b < g.num_nodes; ++b)
        if (unif(edge_rng) < (g.labels[a] == g.labels[b] ? cfg.p_in : cfg.p_out)) g.edges.emplace_back(a, b);

    Rng feat_rng = make_rng(cfg.seed, {stream::kSbm, static_cast<std::uint64_t>(attempt), 1});
    std::normal_distribution<double> normal(0.0, 1.0);
    g.features.resize(static_cast<Eigen::Index>(g.num_nodes), static_cast<Eigen::Index>(cfg.feature_dim));
    for (NodeId i = 0; i < g.num_nodes; ++i) {
      for (std::size_t c = 0; c < cfg.feature_dim; ++c) g.features(i, static_cast<Eigen::Index>(c)) = normal(feat_rng);
      g.features(i, static_cast<Eigen::Index>(static_cast<std::size_t>(g.labels[i]) % cfg.feature_dim)) +=
          cfg.feature_shift;
    }

    Rng split_rng = make_rng(cfg.seed, {stream::kSbm, static_cast<std::uint64_t>(attempt), 2});
    g.splits = random_split(g.labels, split_rng);
    if (every_class_trained(g.splits, g.labels, static_cast<int>(cfg.blocks))) return g;
  }
  throw ConfigError("sbm: some class has no training node after " + std::to_string(kMaxTries) + " tries");
}

struct PrefAttachConfig {
  std::size_t num_nodes = 300;
  std::size_t edges_per_node = 2;
  std::size_t classes = 2;
  std::size_t feature_dim = 8;
  std::uint64_t seed = 0;
};

/// Barabasi-Albert preferential attachment with random labels and features;
/// a heavy-tailed degree test graph.
inline GraphBundle generate_preferential_attachment(const PrefAttachConfig& cfg) {
  const std::size_t m = cfg.edges_per_node;
  if (m < 1 || cfg.num_nodes <= m + 1) throw ConfigError("preferential attachment: need num_nodes > m + 1 >= 2");
  Rng rng = make_rng(cfg.seed, {stream::kPrefAttach});
  GraphBundle g;
  g.num_nodes = cfg.num_nodes;
  std::vector<NodeId> ends;  // each node once per incident edge
  for (NodeId a = 0; a <= m; ++a)
    for (NodeId b = a + 1; b <= m; ++b) {
      g.edges.emplace_back(a, b);
      ends.push_back(a);
      ends.push_back(b);
    }
  for (NodeId v = static_cast<NodeId>(m + 1); v < cfg.num_nodes; ++v) {
    std::vector<NodeId> targets;
    while (targets.size() < m) {
      std::uniform_int_distribution<std::size_t> d(0, ends.size() - 1);
      const NodeId t = ends[d(rng)];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) {
      g.edges.emplace_back(v, t);
      ends.push_back(v);
      ends.push_back(t);
    }
  }
  canonicalize(g.edges);
  std::uniform_int_distribution<int> label(0, static_cast<int>(cfg.classes) - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  g.labels.resize(g.num_nodes);
  g.features.resize(static_cast<Eigen::Index>(g.num_nodes), static_cast<Eigen::Index>(cfg.feature_dim));
  for (NodeId i = 0; i < g.num_nodes; ++i) {
    g.labels[i] = label(rng);
    for (Eigen::Index c = 0; c < g.features.cols(); ++c) g.features(i, c) = normal(rng);
  }
  g.splits = random_split(g.labels, rng);
  return g;
}

}  // namespace sggsr::harness
