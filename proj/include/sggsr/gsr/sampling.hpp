#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <unordered_set>
#include <vector>

#include "sggsr/graph.hpp"
#include "sggsr/rng.hpp"

namespace sggsr::gsr {

/// Draws `count` distinct node pairs uniformly from the complement of
/// `edges` (no self-loops). Returned in draw order. Stream is keyed by
/// (seed, epoch).
inline std::vector<Edge> sample_non_edges(std::span<const Edge> edges, std::size_t count, std::size_t num_nodes,
                                          std::uint64_t seed, std::uint64_t epoch) {
  const std::size_t pairs = num_nodes * (num_nodes - (num_nodes > 0 ? 1 : 0)) / 2;
  const std::size_t capacity = pairs - std::min(pairs, edges.size());
  if (count > capacity)
    throw ConfigError("cannot sample " + std::to_string(count) + " negatives: only " + std::to_string(capacity) +
                      " non-edges exist");
  Rng rng = make_rng(seed, {stream::kNegatives, epoch});
  std::vector<Edge> out;
  out.reserve(count);
  if (count == 0) return out;

  if (count * 2 > capacity) {
    // Dense regime: enumerate the complement and take a random prefix.
    std::vector<Edge> complement;
    complement.reserve(capacity);
    for (NodeId a = 0; a < num_nodes; ++a)
      for (NodeId b = a + 1; b < num_nodes; ++b)
        if (!contains(edges, Edge(a, b))) complement.emplace_back(a, b);
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> d(i, complement.size() - 1);
      std::swap(complement[i], complement[d(rng)]);
      out.push_back(complement[i]);
    }
    return out;
  }

  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(num_nodes - 1));
  std::unordered_set<std::uint64_t> taken;
  while (out.size() < count) {
    const NodeId a = pick(rng), b = pick(rng);
    if (a == b) continue;
    const Edge e(a, b);
    if (contains(edges, e)) continue;
    if (!taken.insert((std::uint64_t{e.u} << 32) | e.v).second) continue;
    out.push_back(e);
  }
  return out;
}

/// floor(p_n * |edges|) negatives, resampled per epoch.
inline std::vector<Edge> sample_negatives(std::span<const Edge> edges, double p_n, std::size_t num_nodes,
                                          std::uint64_t seed, std::uint64_t epoch) {
  if (!(p_n > 0)) throw ConfigError("negative sampling ratio must be > 0");
  const auto count = static_cast<std::size_t>(std::floor(p_n * static_cast<double>(edges.size())));
  return sample_non_edges(edges, count, num_nodes, seed, epoch);
}

}  // namespace sggsr::gsr
