#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "sggsr/attack.hpp"
#include "sggsr/gsr/train.hpp"
#include "sggsr/harness/generators.hpp"
#include "sggsr/node2vec.hpp"

namespace sggsr::harness {

using json = nlohmann::json;

namespace config_detail {

inline void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": bad value for '" + key + "'");
  }
}

}  // namespace config_detail

/// Phase-1 knobs: node2vec walks, skip-gram and extraction.
struct Phase1Spec {
  WalkConfig walk;
  SkipGramConfig skipgram;
  double lambda_sp = 1.0;
  double lambda_fs = 1.0;
  std::size_t k = 5;

  void validate() const {
    if (!(walk.p > 0) || !(walk.q > 0)) throw ConfigError("node2vec p and q must be > 0");
    if (walk.walk_length < 2) throw ConfigError("walk_length must be >= 2");
    if (skipgram.dim < 1) throw ConfigError("embedding dim must be >= 1");
    if (!(lambda_sp > 0 && lambda_sp <= 1) || !(lambda_fs > 0 && lambda_fs <= 1))
      throw ConfigError("lambda_sp and lambda_fs must be in (0,1]");
    if (k < 1) throw ConfigError("k must be >= 1");
  }
};

/// TrainConfig fields as they appear in JSON (flat).
inline void apply_train_fields(const json& j, gsr::TrainConfig& t, const std::string& where) {
  using config_detail::read;
  read(j, "lr", t.lr, where);
  read(j, "dropout", t.dropout, where);
  read(j, "weight_decay", t.weight_decay, where);
  read(j, "lambda_E", t.lambda_E, where);
  read(j, "p_n", t.p_n, where);
  read(j, "lambda_aug", t.lambda_aug, where);
  read(j, "epochs", t.epochs, where);
  read(j, "patience", t.patience, where);
  read(j, "seed", t.seed, where);
  read(j, "hidden_dim", t.hidden_dim, where);
  read(j, "num_heads", t.num_heads, where);
  read(j, "num_layers", t.num_layers, where);
  if (j.contains("scheme")) t.scheme = gsr::parse_scheme(j.at("scheme").get<std::string>());
}

inline json train_fields_json(const gsr::TrainConfig& t) {
  return {{"lr", t.lr},           {"dropout", t.dropout},       {"weight_decay", t.weight_decay},
          {"lambda_E", t.lambda_E}, {"p_n", t.p_n},             {"lambda_aug", t.lambda_aug},
          {"epochs", t.epochs},   {"patience", t.patience},     {"seed", t.seed},
          {"hidden_dim", t.hidden_dim}, {"num_heads", t.num_heads}, {"num_layers", t.num_layers},
          {"scheme", gsr::to_string(t.scheme)}};
}

inline const std::set<std::string> kTrainKeys = {"lr", "dropout", "weight_decay", "lambda_E", "p_n",
                                                 "lambda_aug", "epochs", "patience", "seed", "hidden_dim",
                                                 "num_heads", "num_layers", "scheme"};

/// Flat config accepted by the `train` subcommand: TrainConfig fields plus
/// lambda_sp, lambda_fs, k, p, q.
inline void parse_flat_train_config(const json& j, gsr::TrainConfig& t, Phase1Spec& p1) {
  auto known = kTrainKeys;
  known.insert({"lambda_sp", "lambda_fs", "k", "p", "q"});
  config_detail::reject_unknown(j, known, "train config");
  apply_train_fields(j, t, "train config");
  config_detail::read(j, "lambda_sp", p1.lambda_sp, "train config");
  config_detail::read(j, "lambda_fs", p1.lambda_fs, "train config");
  config_detail::read(j, "k", p1.k, "train config");
  config_detail::read(j, "p", p1.walk.p, "train config");
  config_detail::read(j, "q", p1.walk.q, "train config");
  t.validate();
  p1.validate();
}

enum class AttackKind { kNone, kRandom, kFraud };

struct ExperimentConfig {
  std::string bundle;            // input bundle directory
  std::optional<SbmConfig> sbm;  // synthetic input instead of a bundle
  AttackKind attack_kind = AttackKind::kNone;
  AttackConfig attack;
  FraudConfig fraud;
  Phase1Spec phase1;
  gsr::TrainConfig train;
  std::string report;  // report path; empty means <out>/report.json
  std::uint64_t seed = 0;

  void validate() const {
    if (bundle.empty() == !sbm.has_value())
      throw ConfigError("experiment needs exactly one of 'bundle' or 'sbm'");
    attack.validate();
    if (attack_kind == AttackKind::kFraud) fraud.validate();
    phase1.validate();
    train.validate();
  }

  static ExperimentConfig from_json(const json& j) {
    using config_detail::read;
    using config_detail::reject_unknown;
    reject_unknown(j, {"bundle", "sbm", "attack", "node2vec", "extract", "augment", "train", "report", "seed"},
                   "experiment");
    ExperimentConfig c;
    read(j, "bundle", c.bundle, "experiment");
    read(j, "report", c.report, "experiment");
    read(j, "seed", c.seed, "experiment");
    if (j.contains("sbm")) {
      const auto& s = j.at("sbm");
      reject_unknown(s, {"blocks", "nodes_per_block", "p_in", "p_out", "feature_dim", "feature_shift"}, "sbm");
      SbmConfig sc;
      read(s, "blocks", sc.blocks, "sbm");
      read(s, "nodes_per_block", sc.nodes_per_block, "sbm");
      read(s, "p_in", sc.p_in, "sbm");
      read(s, "p_out", sc.p_out, "sbm");
      read(s, "feature_dim", sc.feature_dim, "sbm");
      read(s, "feature_shift", sc.feature_shift, "sbm");
      c.sbm = sc;
    }
    if (j.contains("attack")) {
      const auto& a = j.at("attack");
      reject_unknown(a,
                     {"type", "ptb_rate", "gamma", "noisy_node_frac", "inter_class_prob", "num_fraudsters",
                      "reviews_per_fraudster", "blend"},
                     "attack");
      std::string type = "none";
      read(a, "type", type, "attack");
      if (type == "none") c.attack_kind = AttackKind::kNone;
      else if (type == "random") c.attack_kind = AttackKind::kRandom;
      else if (type == "fraud") c.attack_kind = AttackKind::kFraud;
      else throw ConfigError("attack: unknown type '" + type + "' (expected none, random or fraud)");
      read(a, "ptb_rate", c.attack.ptb_rate, "attack");
      read(a, "gamma", c.attack.gamma, "attack");
      read(a, "noisy_node_frac", c.attack.noisy_node_frac, "attack");
      read(a, "inter_class_prob", c.attack.inter_class_prob, "attack");
      read(a, "num_fraudsters", c.fraud.num_fraudsters, "attack");
      read(a, "reviews_per_fraudster", c.fraud.reviews_per_fraudster, "attack");
      read(a, "blend", c.fraud.blend, "attack");
    }
    if (j.contains("node2vec")) {
      const auto& n = j.at("node2vec");
      reject_unknown(n,
                     {"p", "q", "dim", "walk_length", "walks_per_node", "window", "negatives", "epochs",
                      "learning_rate", "threads"},
                     "node2vec");
      read(n, "p", c.phase1.walk.p, "node2vec");
      read(n, "q", c.phase1.walk.q, "node2vec");
      read(n, "walk_length", c.phase1.walk.walk_length, "node2vec");
      read(n, "walks_per_node", c.phase1.walk.walks_per_node, "node2vec");
      read(n, "threads", c.phase1.walk.num_threads, "node2vec");
      read(n, "dim", c.phase1.skipgram.dim, "node2vec");
      read(n, "window", c.phase1.skipgram.window, "node2vec");
      read(n, "negatives", c.phase1.skipgram.negatives, "node2vec");
      read(n, "epochs", c.phase1.skipgram.epochs, "node2vec");
      read(n, "learning_rate", c.phase1.skipgram.learning_rate, "node2vec");
    }
    if (j.contains("extract")) {
      const auto& x = j.at("extract");
      reject_unknown(x, {"lambda_sp", "lambda_fs", "k"}, "extract");
      read(x, "lambda_sp", c.phase1.lambda_sp, "extract");
      read(x, "lambda_fs", c.phase1.lambda_fs, "extract");
      read(x, "k", c.phase1.k, "extract");
    }
    if (j.contains("augment")) {
      const auto& a = j.at("augment");
      reject_unknown(a, {"lambda_aug"}, "augment");
      read(a, "lambda_aug", c.train.lambda_aug, "augment");
    }
    if (j.contains("train")) {
      auto known = kTrainKeys;
      known.erase("seed");
      reject_unknown(j.at("train"), known, "train");
      apply_train_fields(j.at("train"), c.train, "train");
    }
    c.validate();
    return c;
  }

  json to_json() const {
    json j;
    if (!bundle.empty()) j["bundle"] = bundle;
    if (sbm)
      j["sbm"] = {{"blocks", sbm->blocks},           {"nodes_per_block", sbm->nodes_per_block},
                  {"p_in", sbm->p_in},               {"p_out", sbm->p_out},
                  {"feature_dim", sbm->feature_dim}, {"feature_shift", sbm->feature_shift}};
    const char* kinds[] = {"none", "random", "fraud"};
    j["attack"] = {{"type", kinds[static_cast<int>(attack_kind)]},
                   {"ptb_rate", attack.ptb_rate},
                   {"gamma", attack.gamma},
                   {"noisy_node_frac", attack.noisy_node_frac},
                   {"inter_class_prob", attack.inter_class_prob},
                   {"num_fraudsters", fraud.num_fraudsters},
                   {"reviews_per_fraudster", fraud.reviews_per_fraudster},
                   {"blend", fraud.blend}};
    j["node2vec"] = {{"p", phase1.walk.p},
                     {"q", phase1.walk.q},
                     {"walk_length", phase1.walk.walk_length},
                     {"walks_per_node", phase1.walk.walks_per_node},
                     {"dim", phase1.skipgram.dim},
                     {"window", phase1.skipgram.window},
                     {"negatives", phase1.skipgram.negatives},
                     {"epochs", phase1.skipgram.epochs},
                     {"learning_rate", phase1.skipgram.learning_rate}};
    j["extract"] = {{"lambda_sp", phase1.lambda_sp}, {"lambda_fs", phase1.lambda_fs}, {"k", phase1.k}};
    j["augment"] = {{"lambda_aug", train.lambda_aug}};
    auto t = train_fields_json(train);
    t.erase("seed");
    t.erase("lambda_aug");
    j["train"] = t;
    if (!report.empty()) j["report"] = report;
    j["seed"] = seed;
    return j;
  }
};

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing config file " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": malformed json: " + e.what());
  }
}

}  // namespace sggsr::harness
