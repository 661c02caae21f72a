#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sggsr/extract.hpp"
#include "sggsr/graph.hpp"

namespace sggsr {

/// Row-stochastic class prediction matrix, one row per node id.
struct ClassProbMatrix {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> probs;

  static ClassProbMatrix uniform(std::size_t num_nodes, std::size_t num_classes) {
    ClassProbMatrix m;
    m.probs.setConstant(static_cast<Eigen::Index>(num_nodes), static_cast<Eigen::Index>(num_classes),
                        1.0 / static_cast<double>(num_classes));
    return m;
  }

  std::span<const double> row(NodeId n) const {
    return {probs.data() + static_cast<std::size_t>(n) * static_cast<std::size_t>(probs.cols()),
            static_cast<std::size_t>(probs.cols())};
  }
};

namespace jsd_detail {
inline void check_distribution(std::span<const double> p) {
  double s = 0;
  for (double x : p) {
    if (!(x >= 0)) throw ConfigError("jsd: negative or non-finite probability");
    s += x;
  }
  if (std::abs(s - 1.0) > 1e-6) throw ConfigError("jsd: probabilities sum to " + std::to_string(s));
}
}  // namespace jsd_detail

/// Process-wide count of jsd() calls, for complexity checks.
inline std::atomic<std::uint64_t>& jsd_call_count() {
  static std::atomic<std::uint64_t> calls{0};
  return calls;
}

/// Jensen-Shannon divergence in bits, so the range is [0,1].
inline double jsd(std::span<const double> p, std::span<const double> q) {
  jsd_call_count().fetch_add(1, std::memory_order_relaxed);
  if (p.size() != q.size()) throw ConfigError("jsd: length mismatch");
  jsd_detail::check_distribution(p);
  jsd_detail::check_distribution(q);
  double sum = 0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    const double m = 0.5 * (p[c] + q[c]);
    if (p[c] > 0) sum += p[c] * std::log2(p[c] / m);
    if (q[c] > 0) sum += q[c] * std::log2(q[c] / m);
  }
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

struct AugmentedEdgeSet {
  EdgeList base;
  EdgeList added_fs;
  EdgeList added_sp;
  EdgeList edges;  // base ∪ added_fs ∪ added_sp
  std::size_t jsd_evaluations = 0;
};

/// Adds, from each kNN candidate set, the floor(|base|*lambda_aug) candidates
/// whose endpoints have the most similar class predictions. JSD is evaluated
/// on candidate edges only.
inline AugmentedEdgeSet augment_subgraph(std::span<const Edge> base, const ClassProbMatrix& probs,
                                         const KnnCandidates& candidates, double lambda_aug) {
  if (!(lambda_aug >= 0 && lambda_aug <= 1)) throw ConfigError("lambda_aug must be in [0,1]");
  AugmentedEdgeSet out;
  out.base.assign(base.begin(), base.end());
  const std::size_t count = fraction_count(base.size(), lambda_aug);
  const auto rows = static_cast<NodeId>(probs.probs.rows());

  auto select = [&](const EdgeList& cands) {
    std::vector<double> div(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (cands[i].v >= rows) throw ConfigError("candidate edge references a node without class probabilities");
      div[i] = jsd(probs.row(cands[i].u), probs.row(cands[i].v));
      ++out.jsd_evaluations;
    }
    std::vector<std::size_t> idx(cands.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const std::size_t take = std::min(count, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                      [&](std::size_t a, std::size_t b) { return div[a] < div[b] || (div[a] == div[b] && a < b); });
    EdgeList chosen;
    for (std::size_t t = 0; t < take; ++t) chosen.push_back(cands[idx[t]]);
    canonicalize(chosen);
    return chosen;
  };
  out.added_fs = select(candidates.e_fs_k);
  out.added_sp = select(candidates.e_sp_k);
  out.edges = edge_union(edge_union(out.base, out.added_fs), out.added_sp);
  return out;
}

}  // namespace sggsr
