#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sggsr/error.hpp"

namespace sggsr {

using NodeId = std::uint32_t;

/// Undirected edge stored with the smaller endpoint first.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  Edge() = default;
  Edge(NodeId a, NodeId b) : u(std::min(a, b)), v(std::max(a, b)) {}

  auto operator<=>(const Edge&) const = default;
};

/// Sorted, duplicate-free list of canonical edges.
using EdgeList = std::vector<Edge>;

inline void canonicalize(EdgeList& edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

inline bool contains(std::span<const Edge> sorted, Edge e) {
  return std::binary_search(sorted.begin(), sorted.end(), e);
}

inline EdgeList edge_union(std::span<const Edge> a, std::span<const Edge> b) {
  EdgeList out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline EdgeList edge_intersection(std::span<const Edge> a, std::span<const Edge> b) {
  EdgeList out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline EdgeList edge_difference(std::span<const Edge> a, std::span<const Edge> b) {
  EdgeList out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool is_subset(std::span<const Edge> sub, std::span<const Edge> super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

enum class Provenance : std::uint8_t { kClean, kAdversarial };

inline const char* to_string(Provenance p) {
  return p == Provenance::kClean ? "clean" : "adversarial";
}

/// Dense row-major feature matrix, one row per node.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kNoLabel = -1;

struct Splits {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;

  bool operator==(const Splits&) const = default;
};

/// Attacked or clean input graph with everything the pipeline needs.
/// Treated as a value: operations return modified copies.
struct GraphBundle {
  std::size_t num_nodes = 0;
  EdgeList edges;
  FeatureMatrix features;
  std::vector<int> labels;  // kNoLabel when absent
  Splits splits;
  std::optional<std::vector<Provenance>> provenance;  // aligned with `edges`

  std::size_t num_features() const { return static_cast<std::size_t>(features.cols()); }

  int num_classes() const {
    int c = 0;
    for (int y : labels) c = std::max(c, y + 1);
    return c;
  }

  bool operator==(const GraphBundle& o) const {
    return num_nodes == o.num_nodes && edges == o.edges && features.rows() == o.features.rows() &&
           features.cols() == o.features.cols() && features == o.features && labels == o.labels &&
           splits == o.splits && provenance == o.provenance;
  }

  /// Throws GraphError naming the first broken invariant.
  void validate() const {
    if (static_cast<std::size_t>(features.rows()) != num_nodes)
      throw GraphError("feature matrix has " + std::to_string(features.rows()) + " rows, expected " +
                       std::to_string(num_nodes));
    if (labels.size() != num_nodes) throw GraphError("label vector size differs from node count");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const Edge& e = edges[i];
      if (e.u == e.v) throw GraphError("self-loop on node " + std::to_string(e.u));
      if (e.u > e.v) throw GraphError("edge not canonical");
      if (e.v >= num_nodes) throw GraphError("edge endpoint " + std::to_string(e.v) + " out of range");
      if (i > 0 && !(edges[i - 1] < e)) throw GraphError("edges not sorted or duplicated");
    }
    std::vector<std::uint8_t> seen(num_nodes, 0);
    const std::vector<NodeId>* lists[] = {&splits.train, &splits.val, &splits.test};
    for (const auto* list : lists) {
      for (NodeId n : *list) {
        if (n >= num_nodes) throw GraphError("split node " + std::to_string(n) + " out of range");
        if (labels[n] == kNoLabel) throw GraphError("split node " + std::to_string(n) + " is unlabeled");
        if (seen[n]) throw GraphError("node " + std::to_string(n) + " appears in more than one split");
        seen[n] = 1;
      }
    }
    if (provenance && provenance->size() != edges.size())
      throw GraphError("provenance does not cover every edge exactly once");
  }
};

/// Compressed sparse row adjacency; neighbor lists are sorted.
struct Csr {
  std::vector<std::size_t> offsets;
  std::vector<NodeId> neighbors;

  Csr() = default;
  Csr(std::size_t num_nodes, std::span<const Edge> edges) : offsets(num_nodes + 1, 0) {
    for (const Edge& e : edges) {
      ++offsets[e.u + 1];
      ++offsets[e.v + 1];
    }
    for (std::size_t i = 0; i < num_nodes; ++i) offsets[i + 1] += offsets[i];
    neighbors.resize(offsets.back());
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const Edge& e : edges) {
      neighbors[cursor[e.u]++] = e.v;
      neighbors[cursor[e.v]++] = e.u;
    }
    for (std::size_t i = 0; i < num_nodes; ++i)
      std::sort(neighbors.begin() + offsets[i], neighbors.begin() + offsets[i + 1]);
  }

  std::size_t num_nodes() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::size_t degree(NodeId n) const { return offsets[n + 1] - offsets[n]; }
  std::span<const NodeId> neighbors_of(NodeId n) const {
    return {neighbors.data() + offsets[n], degree(n)};
  }
  bool adjacent(NodeId a, NodeId b) const {
    auto nb = neighbors_of(a);
    return std::binary_search(nb.begin(), nb.end(), b);
  }
};

/// Linear-interpolation quantile of an ascending-sorted sample, q in [0,1].
inline double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ConfigError("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct DegreeProfile {
  std::vector<std::size_t> degrees;
  double median = 0.0;           // over nodes with nonzero degree
  double imbalance_ratio = 0.0;  // max degree / min nonzero degree

  /// Ascending degrees of nodes that touch at least one edge.
  std::vector<double> nonzero_sorted() const {
    std::vector<double> d;
    for (std::size_t x : degrees)
      if (x > 0) d.push_back(static_cast<double>(x));
    std::sort(d.begin(), d.end());
    return d;
  }
};

inline DegreeProfile degree_profile(std::size_t num_nodes, std::span<const Edge> edges) {
  if (edges.empty()) throw ConfigError("degree profile of an empty edge set is undefined");
  DegreeProfile p;
  p.degrees.assign(num_nodes, 0);
  for (const Edge& e : edges) {
    if (e.v >= num_nodes) throw GraphError("edge endpoint out of range");
    ++p.degrees[e.u];
    ++p.degrees[e.v];
  }
  const auto sorted = p.nonzero_sorted();
  p.median = sorted_quantile(sorted, 0.5);
  p.imbalance_ratio = sorted.back() / sorted.front();
  return p;
}

inline DegreeProfile degree_profile(const GraphBundle& g,
                                    std::optional<std::span<const Edge>> subset = std::nullopt) {
  return degree_profile(g.num_nodes, subset ? *subset : std::span<const Edge>(g.edges));
}

/// Fraction of `subset` tagged clean, looking tags up in (tagged, tags).
inline double clean_rate(std::span<const Edge> subset, std::span<const Edge> tagged,
                         std::span<const Provenance> tags) {
  if (subset.empty()) throw ConfigError("clean rate of an empty edge set is undefined");
  if (tagged.size() != tags.size()) throw ConfigError("provenance size mismatch");
  std::size_t clean = 0;
  for (const Edge& e : subset) {
    auto it = std::lower_bound(tagged.begin(), tagged.end(), e);
    if (it == tagged.end() || *it != e)
      throw ConfigError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") has no provenance tag");
    if (tags[static_cast<std::size_t>(it - tagged.begin())] == Provenance::kClean) ++clean;
  }
  return static_cast<double>(clean) / static_cast<double>(subset.size());
}

inline double clean_rate(std::span<const Edge> subset, const GraphBundle& g) {
  if (!g.provenance) throw ConfigError("bundle carries no provenance");
  return clean_rate(subset, g.edges, *g.provenance);
}

}  // namespace sggsr
