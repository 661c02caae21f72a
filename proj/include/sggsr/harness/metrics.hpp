#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "sggsr/graph.hpp"

namespace sggsr::harness {

/// #edges with differently-labeled endpoints / #edges. Pass predicted labels
/// to measure against pseudo-labels.
inline double inter_class_edge_ratio(std::span<const int> labels, std::span<const Edge> edges) {
  if (edges.empty()) throw ConfigError("inter-class ratio of an empty edge set is undefined");
  std::size_t inter = 0;
  for (const Edge& e : edges) {
    if (e.v >= labels.size() || labels[e.u] == kNoLabel || labels[e.v] == kNoLabel)
      throw ConfigError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") has an unlabeled endpoint");
    inter += labels[e.u] != labels[e.v];
  }
  return static_cast<double>(inter) / static_cast<double>(edges.size());
}

inline double inter_class_edge_ratio(const GraphBundle& g, std::span<const Edge> edges) {
  return inter_class_edge_ratio(g.labels, edges);
}

/// Attention-weighted inter-class ratio: sum of weights on inter-class edges
/// over the total weight.
inline double weighted_inter_class_ratio(std::span<const int> labels, std::span<const Edge> edges,
                                         std::span<const double> weights) {
  double inter = 0, all = 0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    all += weights[k];
    if (labels[edges[k].u] != labels[edges[k].v]) inter += weights[k];
  }
  return all > 0 ? inter / all : 0.0;
}

struct Summary {
  std::size_t count = 0;
  double mean = 0, q25 = 0, median = 0, q75 = 0;
};

inline Summary summarize(std::vector<double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.q25 = sorted_quantile(values, 0.25);
  s.median = sorted_quantile(values, 0.5);
  s.q75 = sorted_quantile(values, 0.75);
  return s;
}

}  // namespace sggsr::harness
