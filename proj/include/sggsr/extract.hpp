#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sggsr/graph.hpp"
#include "sggsr/node2vec.hpp"

namespace sggsr {

/// Structural-proximity and feature-similarity scores for every existing edge.
struct ScoredEdgeSet {
  EdgeList edges;
  std::vector<double> s_sp;
  std::vector<double> s_fs;
};

struct KnnCandidates {
  EdgeList e_fs_k;
  EdgeList e_sp_k;
  std::size_t k = 0;
};

inline ScoredEdgeSet score_edges(const GraphBundle& g, const EmbeddingMatrix& h_sp) {
  if (h_sp.num_nodes() != g.num_nodes)
    throw ConfigError("embedding has " + std::to_string(h_sp.num_nodes()) + " rows, graph has " +
                      std::to_string(g.num_nodes) + " nodes");
  ScoredEdgeSet s;
  s.edges = g.edges;
  s.s_sp.reserve(g.edges.size());
  s.s_fs.reserve(g.edges.size());
  const auto f = static_cast<std::size_t>(g.features.cols());
  for (const Edge& e : g.edges) {
    s.s_sp.push_back(cosine(h_sp.row(e.u), h_sp.row(e.v)));
    s.s_fs.push_back(cosine(std::span<const double>(g.features.row(e.u).data(), f),
                            std::span<const double>(g.features.row(e.v).data(), f)));
  }
  return s;
}

/// Indices of the `count` largest scores; ties go to the earlier index,
/// which for a canonical edge list is the canonical edge order.
inline std::vector<std::size_t> top_indices(std::span<const double> scores, std::size_t count) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  count = std::min(count, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                    [&](std::size_t a, std::size_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); });
  idx.resize(count);
  return idx;
}

inline std::size_t fraction_count(std::size_t total, double lambda) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(total) * lambda));
}

struct Extraction {
  EdgeList top_sp;
  EdgeList top_fs;
  EdgeList subgraph;  // top_sp ∩ top_fs
};

inline Extraction extract_subgraph_detailed(const ScoredEdgeSet& scored, double lambda_sp, double lambda_fs) {
  if (!(lambda_sp > 0 && lambda_sp <= 1) || !(lambda_fs > 0 && lambda_fs <= 1))
    throw ConfigError("lambda_sp and lambda_fs must be in (0,1]");
  auto pick = [&](std::span<const double> scores, double lambda) {
    EdgeList out;
    for (std::size_t i : top_indices(scores, fraction_count(scored.edges.size(), lambda)))
      out.push_back(scored.edges[i]);
    canonicalize(out);
    return out;
  };
  Extraction x;
  x.top_sp = pick(scored.s_sp, lambda_sp);
  x.top_fs = pick(scored.s_fs, lambda_fs);
  x.subgraph = edge_intersection(x.top_sp, x.top_fs);
  if (x.subgraph.empty())
    throw ConfigError("extracted sub-graph is empty (|top_sp|=" + std::to_string(x.top_sp.size()) +
                      ", |top_fs|=" + std::to_string(x.top_fs.size()) + "); lambda_sp/lambda_fs too small");
  return x;
}

/// Confidently clean sub-graph: top-lambda_sp by structural proximity
/// intersected with top-lambda_fs by feature similarity.
inline EdgeList extract_subgraph(const ScoredEdgeSet& scored, double lambda_sp, double lambda_fs) {
  return extract_subgraph_detailed(scored, lambda_sp, lambda_fs).subgraph;
}

/// Sorted ids of nodes incident to at least one edge.
inline std::vector<NodeId> nodes_of(std::span<const Edge> edges) {
  std::vector<NodeId> nodes;
  nodes.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    nodes.push_back(e.u);
    nodes.push_back(e.v);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

namespace extract_detail {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class Source>
RowMat normalized_rows(const Source& src, std::span<const NodeId> nodes) {
  RowMat out(static_cast<Eigen::Index>(nodes.size()), src.cols());
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = src.row(nodes[r]).template cast<double>();
    const double norm = out.row(static_cast<Eigen::Index>(r)).norm();
    if (norm > 0) out.row(static_cast<Eigen::Index>(r)) /= norm;
  }
  return out;
}

/// Exact brute-force kNN by cosine within `nodes`; ties by node id.
inline EdgeList knn_pairs(const RowMat& unit, std::span<const NodeId> nodes, std::size_t k) {
  EdgeList pairs;
  const auto m = static_cast<std::size_t>(unit.rows());
  std::vector<std::size_t> order(m);
  Eigen::VectorXd sims;
  for (std::size_t i = 0; i < m; ++i) {
    sims = unit * unit.row(static_cast<Eigen::Index>(i)).transpose();
    std::iota(order.begin(), order.end(), std::size_t{0});
    order.erase(order.begin() + static_cast<std::ptrdiff_t>(i));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return sims(static_cast<Eigen::Index>(a)) > sims(static_cast<Eigen::Index>(b)) ||
                               (sims(static_cast<Eigen::Index>(a)) == sims(static_cast<Eigen::Index>(b)) && a < b);
                      });
    for (std::size_t t = 0; t < k; ++t) pairs.emplace_back(nodes[i], nodes[order[t]]);
    order.resize(m);
  }
  canonicalize(pairs);
  return pairs;
}

}  // namespace extract_detail

/// k-NN candidate graphs over `node_set` by feature cosine and by embedding
/// cosine. Computed once, before training.
inline KnnCandidates build_knn_candidates(const GraphBundle& g, const EmbeddingMatrix& h_sp,
                                          std::span<const NodeId> node_set, std::size_t k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (node_set.empty()) throw ConfigError("kNN node set is empty");
  if (h_sp.num_nodes() != g.num_nodes) throw ConfigError("embedding row count differs from node count");
  if (k >= node_set.size()) {
    warn("k=" + std::to_string(k) + " clamped to " + std::to_string(node_set.size() - 1) +
         " (node set has " + std::to_string(node_set.size()) + " nodes)");
    k = node_set.size() - 1;
  }
  KnnCandidates c;
  c.k = k;
  if (k == 0) return c;
  c.e_fs_k = extract_detail::knn_pairs(extract_detail::normalized_rows(g.features, node_set), node_set, k);
  c.e_sp_k = extract_detail::knn_pairs(extract_detail::normalized_rows(h_sp.vectors, node_set), node_set, k);
  return c;
}

}  // namespace sggsr
