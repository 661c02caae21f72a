#pragma once

#include <array>
#include <string>
#include <vector>

#include "sggsr/graph.hpp"

namespace sggsr::gsr {

enum class GroupScheme { kNone, kLowHigh, kLowMidHigh };

inline GroupScheme parse_scheme(const std::string& s) {
  if (s == "none") return GroupScheme::kNone;
  if (s == "L-H" || s == "LH") return GroupScheme::kLowHigh;
  if (s == "L-M-H" || s == "LMH") return GroupScheme::kLowMidHigh;
  throw ConfigError("unknown group scheme '" + s + "' (expected none, L-H or L-M-H)");
}

inline std::string to_string(GroupScheme s) {
  switch (s) {
    case GroupScheme::kNone: return "none";
    case GroupScheme::kLowHigh: return "L-H";
    case GroupScheme::kLowMidHigh: return "L-M-H";
  }
  return "?";
}

struct GroupPartition {
  GroupScheme scheme = GroupScheme::kNone;
  std::vector<std::string> labels;
  std::vector<EdgeList> groups;      // aligned with labels
  std::vector<int> edge_group;       // aligned with the input edge list
  std::vector<double> thresholds;    // degree cut points

  std::size_t num_groups() const { return labels.size(); }
};

/// Degree band of a node: 0 = low, 1 = mid/high, 2 = high.
inline int degree_band(double degree, std::span<const double> cuts) {
  int band = 0;
  for (double c : cuts) {
    if (degree < c) return band;
    ++band;
  }
  return band;
}

/// Splits edges by the degree bands of their endpoints. L-H uses the median
/// cut; L-M-H uses tertile cuts. A node is in the lower band when its degree
/// is strictly below the cut.
inline GroupPartition split_groups(std::span<const Edge> edges, const DegreeProfile& degrees, GroupScheme scheme) {
  GroupPartition p;
  p.scheme = scheme;
  p.edge_group.assign(edges.size(), 0);
  if (scheme == GroupScheme::kNone) {
    p.labels = {"ALL"};
    p.groups = {EdgeList(edges.begin(), edges.end())};
    return p;
  }
  const auto sorted = degrees.nonzero_sorted();
  if (scheme == GroupScheme::kLowHigh) {
    p.thresholds = {degrees.median};
    p.labels = {"LL", "HL", "HH"};
  } else {
    p.thresholds = {sorted_quantile(sorted, 1.0 / 3.0), sorted_quantile(sorted, 2.0 / 3.0)};
    p.labels = {"LL", "ML", "MM", "HL", "HM", "HH"};
  }
  p.groups.resize(p.labels.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    if (e.u >= degrees.degrees.size() || e.v >= degrees.degrees.size())
      throw ConfigError("degree profile does not cover edge endpoints");
    int a = degree_band(static_cast<double>(degrees.degrees[e.u]), p.thresholds);
    int b = degree_band(static_cast<double>(degrees.degrees[e.v]), p.thresholds);
    if (a > b) std::swap(a, b);
    // Unordered band pair (a <= b) -> group index; matches the label order.
    int g;
    if (scheme == GroupScheme::kLowHigh) g = a + b;
    else g = b * (b + 1) / 2 + a;
    p.edge_group[k] = g;
    p.groups[static_cast<std::size_t>(g)].push_back(e);
  }
  return p;
}

/// Splits `total` negatives across groups proportionally to group size
/// (largest remainder). Every nonempty group gets at least one.
inline std::vector<std::size_t> apportion(std::span<const std::size_t> group_sizes, std::size_t total) {
  std::size_t all = 0;
  for (std::size_t s : group_sizes) all += s;
  std::vector<std::size_t> out(group_sizes.size(), 0);
  if (all == 0) return out;
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t g = 0; g < group_sizes.size(); ++g) {
    const double exact = static_cast<double>(total) * static_cast<double>(group_sizes[g]) / static_cast<double>(all);
    out[g] = static_cast<std::size_t>(exact);
    used += out[g];
    rem.emplace_back(-(exact - static_cast<double>(out[g])), g);
  }
  std::sort(rem.begin(), rem.end());
  for (std::size_t k = 0; used < total && k < rem.size(); ++k, ++used) ++out[rem[k].second];
  for (std::size_t g = 0; g < group_sizes.size(); ++g)
    if (group_sizes[g] > 0 && out[g] == 0) out[g] = 1;
  return out;
}

}  // namespace sggsr::gsr
