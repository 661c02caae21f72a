#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sggsr/gsr/model.hpp"

namespace sggsr::gsr {

/// log(sigmoid(x)) without overflow.
template <class T>
T log_sigmoid(T x) {
  return x >= T(0) ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

template <class T>
T stable_sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T ex = std::exp(x);
  return ex / (T(1) + ex);
}

template <class T>
struct NodeLoss {
  T value = 0;
  Mat<T> dlogits;
};

/// Mean softmax cross-entropy over `mask`.
template <class T>
NodeLoss<T> loss_node(const Mat<T>& logits, std::span<const int> labels, std::span<const NodeId> mask) {
  if (mask.empty()) throw ConfigError("node loss mask is empty");
  NodeLoss<T> out;
  out.dlogits = Mat<T>::Zero(logits.rows(), logits.cols());
  const T inv = T(1) / static_cast<T>(mask.size());
  for (NodeId i : mask) {
    if (i >= labels.size() || labels[i] == kNoLabel)
      throw ConfigError("node loss mask references unlabeled node " + std::to_string(i));
    const auto row = logits.row(i);
    const T mx = row.maxCoeff();
    const T lse = mx + std::log((row.array() - mx).exp().sum());
    out.value += (lse - row(labels[i])) * inv;
    out.dlogits.row(i) = (row.array() - lse).exp() * inv;
    out.dlogits(i, labels[i]) -= inv;
  }
  return out;
}

template <class T>
struct LinkLoss {
  T value = 0;
  std::vector<T> group_values;  // per group; 0 for skipped groups
  std::vector<T> grad_pos;      // d value / d score, aligned with positives
  std::vector<T> grad_neg;
};

/// Ungrouped link loss: -(mean log s(pos) + mean log(1 - s(neg))).
template <class T>
LinkLoss<T> loss_link(std::span<const T> pos, std::span<const T> neg) {
  if (pos.empty() || neg.empty()) throw ConfigError("link loss needs positives and negatives");
  LinkLoss<T> out;
  out.grad_pos.resize(pos.size());
  out.grad_neg.resize(neg.size());
  const T np = static_cast<T>(pos.size()), nn = static_cast<T>(neg.size());
  T sp = 0, sn = 0;
  for (std::size_t k = 0; k < pos.size(); ++k) {
    sp += log_sigmoid(pos[k]);
    out.grad_pos[k] = -(T(1) - stable_sigmoid(pos[k])) / np;
  }
  for (std::size_t k = 0; k < neg.size(); ++k) {
    sn += log_sigmoid(-neg[k]);
    out.grad_neg[k] = stable_sigmoid(neg[k]) / nn;
  }
  out.value = -(sp / np + sn / nn);
  out.group_values = {out.value};
  return out;
}

/// Degree-balanced link loss: the ungrouped loss evaluated within each group
/// and summed over groups. Groups without positives are skipped.
template <class T>
LinkLoss<T> loss_link_grouped(std::span<const T> pos, std::span<const int> pos_group, std::span<const T> neg,
                              std::span<const int> neg_group, std::size_t num_groups) {
  if (pos.size() != pos_group.size() || neg.size() != neg_group.size())
    throw ConfigError("group assignment size mismatch");
  std::vector<std::size_t> np(num_groups, 0), nn(num_groups, 0);
  for (int g : pos_group) ++np.at(static_cast<std::size_t>(g));
  for (int g : neg_group) ++nn.at(static_cast<std::size_t>(g));
  for (std::size_t g = 0; g < num_groups; ++g) {
    if (np[g] == 0) {
      warn("link-loss group " + std::to_string(g) + " has no positive edges; skipped");
    } else if (nn[g] == 0) {
      throw ConfigError("link-loss group " + std::to_string(g) + " has positives but no negatives");
    }
  }
  LinkLoss<T> out;
  out.grad_pos.assign(pos.size(), T(0));
  out.grad_neg.assign(neg.size(), T(0));
  std::vector<T> sp(num_groups, T(0)), sn(num_groups, T(0));
  for (std::size_t k = 0; k < pos.size(); ++k) {
    const auto g = static_cast<std::size_t>(pos_group[k]);
    sp[g] += log_sigmoid(pos[k]);
    out.grad_pos[k] = -(T(1) - stable_sigmoid(pos[k])) / static_cast<T>(np[g]);
  }
  for (std::size_t k = 0; k < neg.size(); ++k) {
    const auto g = static_cast<std::size_t>(neg_group[k]);
    if (np[g] == 0) continue;
    sn[g] += log_sigmoid(-neg[k]);
    out.grad_neg[k] = stable_sigmoid(neg[k]) / static_cast<T>(nn[g]);
  }
  out.group_values.assign(num_groups, T(0));
  for (std::size_t g = 0; g < num_groups; ++g) {
    if (np[g] == 0) continue;
    out.group_values[g] = -(sp[g] / static_cast<T>(np[g]) + sn[g] / static_cast<T>(nn[g]));
    out.value += out.group_values[g];
  }
  return out;
}

}  // namespace sggsr::gsr
