#pragma once

#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sggsr/attack.hpp"
#include "sggsr/augment.hpp"
#include "sggsr/bundle_io.hpp"
#include "sggsr/extract.hpp"
#include "sggsr/gsr/model_io.hpp"
#include "sggsr/gsr/train.hpp"
#include "sggsr/harness/config.hpp"
#include "sggsr/harness/generators.hpp"
#include "sggsr/harness/metrics.hpp"
#include "sggsr/node2vec.hpp"

namespace sggsr::harness {

namespace fs = std::filesystem;

/// FNV-1a, used to content-address phase-1 artifacts.
class Hasher {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= b[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  template <class T>
  void value(const T& v) {
    bytes(&v, sizeof v);
  }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t bundle_hash(const GraphBundle& g) {
  Hasher h;
  h.value(g.num_nodes);
  for (const Edge& e : g.edges) {
    h.value(e.u);
    h.value(e.v);
  }
  h.bytes(g.features.data(), static_cast<std::size_t>(g.features.size()) * sizeof(double));
  for (int y : g.labels) h.value(y);
  return h.digest();
}

inline std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct Phase1Result {
  EmbeddingMatrix embeddings;
  ScoredEdgeSet scored;
  Extraction extraction;
  gsr::SubgraphArtifacts artifacts;
  std::uint64_t key = 0;
  double embed_seconds = 0;
  double extract_seconds = 0;
};

/// In-process cache of phase-1 artifacts. Embeddings are keyed by
/// (graph, node2vec spec); extraction additionally by lambdas and k.
class Phase1Cache {
 public:
  std::shared_ptr<const EmbeddingMatrix> find_embedding(std::uint64_t key) const {
    auto it = emb_.find(key);
    return it == emb_.end() ? nullptr : it->second;
  }
  std::shared_ptr<const Phase1Result> find(std::uint64_t key) const {
    auto it = full_.find(key);
    return it == full_.end() ? nullptr : it->second;
  }
  void put_embedding(std::uint64_t key, std::shared_ptr<const EmbeddingMatrix> e) { emb_[key] = std::move(e); }
  void put(std::uint64_t key, std::shared_ptr<const Phase1Result> r) { full_[key] = std::move(r); }
  std::size_t size() const { return full_.size(); }
  std::size_t hits = 0;

 private:
  std::map<std::uint64_t, std::shared_ptr<const EmbeddingMatrix>> emb_;
  std::map<std::uint64_t, std::shared_ptr<const Phase1Result>> full_;
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline EmbeddingMatrix embed(const GraphBundle& g, const WalkConfig& walk, const SkipGramConfig& sg) {
  return train_skipgram(generate_walks(g, walk), sg);
}

/// Runs phase 1 (node2vec, scoring, extraction, kNN candidates) once.
inline std::shared_ptr<const Phase1Result> run_phase1(const GraphBundle& g, const Phase1Spec& spec,
                                                      Phase1Cache* cache = nullptr) {
  spec.validate();
  Hasher eh;
  eh.value(bundle_hash(g));
  eh.value(spec.walk.p);
  eh.value(spec.walk.q);
  eh.value(spec.walk.walk_length);
  eh.value(spec.walk.walks_per_node);
  eh.value(spec.walk.seed);
  eh.value(spec.skipgram.dim);
  eh.value(spec.skipgram.window);
  eh.value(spec.skipgram.negatives);
  eh.value(spec.skipgram.epochs);
  eh.value(spec.skipgram.learning_rate);
  eh.value(spec.skipgram.seed);
  const std::uint64_t emb_key = eh.digest();
  Hasher fh;
  fh.value(emb_key);
  fh.value(spec.lambda_sp);
  fh.value(spec.lambda_fs);
  fh.value(spec.k);
  const std::uint64_t key = fh.digest();
  if (cache) {
    if (auto hit = cache->find(key)) {
      ++cache->hits;
      return hit;
    }
  }

  auto r = std::make_shared<Phase1Result>();
  r->key = key;
  auto t0 = std::chrono::steady_clock::now();
  std::shared_ptr<const EmbeddingMatrix> emb = cache ? cache->find_embedding(emb_key) : nullptr;
  if (!emb) {
    emb = std::make_shared<const EmbeddingMatrix>(embed(g, spec.walk, spec.skipgram));
    if (cache) cache->put_embedding(emb_key, emb);
  }
  r->embeddings = *emb;
  r->embed_seconds = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  r->scored = score_edges(g, r->embeddings);
  r->extraction = extract_subgraph_detailed(r->scored, spec.lambda_sp, spec.lambda_fs);
  r->artifacts.subgraph = r->extraction.subgraph;
  const auto nodes = nodes_of(r->artifacts.subgraph);
  r->artifacts.candidates = build_knn_candidates(g, r->embeddings, nodes, spec.k);
  r->extract_seconds = seconds_since(t0);
  if (cache) cache->put(key, r);
  return r;
}

/// Degree-banded test accuracy: test nodes with attacked-graph degree below
/// the test-set median are "low".
struct BandAccuracy {
  double median = 0;
  double low = 0, high = 0;
  std::size_t low_count = 0, high_count = 0;
};

inline BandAccuracy band_accuracy(const GraphBundle& g, std::span<const int> pred) {
  BandAccuracy b;
  if (g.splits.test.empty()) return b;
  std::vector<std::size_t> deg(g.num_nodes, 0);
  for (const Edge& e : g.edges) {
    ++deg[e.u];
    ++deg[e.v];
  }
  std::vector<double> d;
  for (NodeId n : g.splits.test) d.push_back(static_cast<double>(deg[n]));
  std::sort(d.begin(), d.end());
  b.median = sorted_quantile(d, 0.5);
  std::vector<NodeId> low, high;
  for (NodeId n : g.splits.test) (static_cast<double>(deg[n]) < b.median ? low : high).push_back(n);
  b.low = gsr::accuracy(pred, g.labels, low);
  b.high = gsr::accuracy(pred, g.labels, high);
  b.low_count = low.size();
  b.high_count = high.size();
  return b;
}

inline json summary_json(const Summary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"q25", s.q25}, {"median", s.median}, {"q75", s.q75}};
}

/// Metrics that only need a trained model and the attacked graph.
inline json inference_report(const GraphBundle& g, const gsr::Inference& inf) {
  json r;
  r["test_accuracy"] = gsr::accuracy(inf.predictions, g.labels, g.splits.test);
  const auto band = band_accuracy(g, inf.predictions);
  r["degree_bands"] = {{"median_degree", band.median},
                       {"low_accuracy", band.low},
                       {"low_count", band.low_count},
                       {"high_accuracy", band.high},
                       {"high_count", band.high_count}};
  if (!g.edges.empty()) {
    r["inter_class_edge_ratio"] = {
        {"before", inter_class_edge_ratio(g, g.edges)},
        {"after_attention_weighting", weighted_inter_class_ratio(g.labels, g.edges, inf.alpha)}};
  }
  if (g.provenance) {
    std::vector<double> clean, adv;
    for (std::size_t k = 0; k < g.edges.size(); ++k)
      ((*g.provenance)[k] == Provenance::kClean ? clean : adv).push_back(inf.alpha[k]);
    r["attention"] = {{"clean", summary_json(summarize(clean))}, {"adversarial", summary_json(summarize(adv))}};
  }
  return r;
}

struct ExperimentResult {
  json report;
  GraphBundle attacked;
  std::shared_ptr<const Phase1Result> phase1;
  gsr::TrainResult training;
  gsr::Inference inference;
};

struct RunOptions {
  std::optional<fs::path> out_dir;
  bool dump_augment = false;
  Phase1Cache* cache = nullptr;
};

/// Stage seeds derived from the master seed.
struct StageSeeds {
  std::uint64_t input, attack, walk, skipgram, train;
  explicit StageSeeds(std::uint64_t master)
      : input(derive_seed(master, {stream::kExperiment, 0})),
        attack(derive_seed(master, {stream::kExperiment, 1})),
        walk(derive_seed(master, {stream::kExperiment, 2})),
        skipgram(derive_seed(master, {stream::kExperiment, 3})),
        train(derive_seed(master, {stream::kExperiment, 4})) {}
};

namespace experiment_detail {

template <class F>
auto stage(const char* name, F&& fn) {
  try {
    return fn();
  } catch (const NumericError& e) {
    throw NumericError(std::string("stage '") + name + "': " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("stage '") + name + "': " + e.what());
  } catch (const Error& e) {
    throw Error(std::string("stage '") + name + "': " + e.what());
  }
}

}  // namespace experiment_detail

inline void write_train_log(const std::vector<gsr::EpochLog>& log, const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write " + file.string());
  for (const auto& e : log) {
    json j = {{"epoch", e.epoch},
              {"loss_total", e.loss_total},
              {"loss_node", e.loss_node},
              {"loss_link", e.loss_link},
              {"val_accuracy", e.val_accuracy},
              {"val_loss", e.val_loss},
              {"augmented_edges", e.augmented_edges},
              {"jsd_evaluations", e.jsd_evaluations},
              {"negatives", e.negatives},
              {"group_sizes", e.group_sizes}};
    out << j.dump() << '\n';
  }
}

inline void write_attention_csv(const GraphBundle& g, std::span<const double> alpha, const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write " + file.string());
  out << "u,v,provenance,inter_class,alpha\n";
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const Edge& e = g.edges[k];
    out << e.u << ',' << e.v << ',' << (g.provenance ? to_string((*g.provenance)[k]) : "unknown") << ','
        << (g.labels[e.u] != g.labels[e.v] ? 1 : 0) << ',' << io_detail::format_double(alpha[k]) << '\n';
  }
}

inline void write_phase1(const Phase1Result& p1, const fs::path& dir) {
  fs::create_directories(dir);
  write_embeddings(p1.embeddings, dir / "embeddings.f32");
  write_edge_list(dir / "subgraph.tsv", p1.artifacts.subgraph);
  write_edge_list(dir / "knn_fs.tsv", p1.artifacts.candidates.e_fs_k);
  write_edge_list(dir / "knn_sp.tsv", p1.artifacts.candidates.e_sp_k);
}

/// Attack -> node2vec -> extraction + kNN -> training -> inference on the
/// attacked graph. Everything is seeded from config.seed.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg_in, const RunOptions& opt = {}) {
  using experiment_detail::stage;
  ExperimentConfig cfg = cfg_in;
  cfg.validate();
  const StageSeeds seeds(cfg.seed);
  json timing;
  ExperimentResult res;
  if (opt.out_dir) fs::create_directories(*opt.out_dir);

  auto t0 = std::chrono::steady_clock::now();
  GraphBundle clean = stage("input", [&] {
    if (cfg.sbm) {
      SbmConfig s = *cfg.sbm;
      s.seed = seeds.input;
      return generate_sbm(s);
    }
    return load_bundle(cfg.bundle);
  });
  timing["input"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  res.attacked = stage("attack", [&] {
    GraphBundle g = clean;
    if (cfg.attack_kind == AttackKind::kRandom) {
      AttackConfig a = cfg.attack;
      a.seed = seeds.attack;
      g = inject_structure_attack(g, a);
      if (a.gamma > 0 && a.noisy_node_frac > 0) g = inject_feature_noise(g, a);
    } else if (cfg.attack_kind == AttackKind::kFraud) {
      FraudConfig f = cfg.fraud;
      f.seed = seeds.attack;
      g = generate_fraud_graph(g, f);
    }
    return g;
  });
  timing["attack"] = seconds_since(t0);
  if (opt.out_dir) save_bundle(res.attacked, *opt.out_dir / "attacked");

  Phase1Spec p1 = cfg.phase1;
  p1.walk.seed = seeds.walk;
  p1.skipgram.seed = seeds.skipgram;
  res.phase1 = stage("phase1", [&] { return run_phase1(res.attacked, p1, opt.cache); });
  timing["embed"] = res.phase1->embed_seconds;
  timing["extract"] = res.phase1->extract_seconds;
  if (opt.out_dir) write_phase1(*res.phase1, *opt.out_dir / "phase1");

  gsr::TrainConfig tc = cfg.train;
  tc.seed = seeds.train;
  gsr::TrainHooks hooks;
  if (opt.dump_augment && opt.out_dir) {
    const fs::path dump = *opt.out_dir / "augment";
    fs::create_directories(dump);
    hooks.on_augment = [dump](std::size_t epoch, const AugmentedEdgeSet& aug) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%05zu.tsv", epoch);
      std::ofstream out(dump / name);
      for (const Edge& e : edge_difference(aug.edges, aug.base)) {
        const bool f = contains(aug.added_fs, e), s = contains(aug.added_sp, e);
        out << e.u << '\t' << e.v << '\t' << "augmented" << '\t' << (f && s ? "fs+sp" : f ? "fs" : "sp") << '\n';
      }
    };
  }
  t0 = std::chrono::steady_clock::now();
  res.training = stage("train", [&] { return gsr::train(res.attacked, res.phase1->artifacts, tc, hooks); });
  timing["train"] = seconds_since(t0);
  if (opt.out_dir) {
    gsr::write_model(res.training.params, *opt.out_dir / "model.bin");
    write_train_log(res.training.log, *opt.out_dir / "train_log.jsonl");
  }

  t0 = std::chrono::steady_clock::now();
  res.inference = stage("infer", [&] { return gsr::infer_refined(res.training.params, res.attacked); });
  timing["infer"] = seconds_since(t0);

  json r = inference_report(res.attacked, res.inference);
  r["seed"] = cfg.seed;
  r["config"] = cfg.to_json();
  r["graph"] = {{"nodes", res.attacked.num_nodes},
                {"edges", res.attacked.edges.size()},
                {"classes", res.attacked.num_classes()},
                {"features", res.attacked.num_features()}};
  const auto& ext = res.phase1->extraction;
  r["phase1"] = {{"key", hex(res.phase1->key)},
                 {"top_sp_edges", ext.top_sp.size()},
                 {"top_fs_edges", ext.top_fs.size()},
                 {"subgraph_edges", ext.subgraph.size()},
                 {"knn_fs_edges", res.phase1->artifacts.candidates.e_fs_k.size()},
                 {"knn_sp_edges", res.phase1->artifacts.candidates.e_sp_k.size()}};
  if (res.attacked.provenance) {
    r["clean_rate"] = {{"attacked_graph", clean_rate(res.attacked.edges, res.attacked)},
                       {"subgraph", clean_rate(ext.subgraph, res.attacked)}};
  }
  const auto& aug = res.training.last_augmented;
  json groups = json::object();
  for (std::size_t k = 0; k < res.training.last_partition.num_groups(); ++k) {
    const auto& grp = res.training.last_partition.groups[k];
    groups[res.training.last_partition.labels[k]] = {
        {"edges", grp.size()},
        {"i_ratio", grp.empty() ? json(nullptr) : json(degree_profile(res.attacked.num_nodes, grp).imbalance_ratio)}};
  }
  r["augmentation"] = {{"edges", aug.size()},
                       {"i_ratio", degree_profile(res.attacked.num_nodes, aug).imbalance_ratio},
                       {"scheme", gsr::to_string(res.training.last_partition.scheme)},
                       {"groups", groups}};
  r["training"] = {{"epochs_run", res.training.log.size()},
                   {"best_epoch", res.training.best_epoch},
                   {"best_val_accuracy", res.training.best_val_accuracy}};
  r["timing_seconds"] = timing;
  res.report = std::move(r);

  if (opt.out_dir) {
    write_attention_csv(res.attacked, res.inference.alpha, *opt.out_dir / "attention.csv");
  }
  const fs::path report_path =
      !cfg.report.empty() ? fs::path(cfg.report) : (opt.out_dir ? *opt.out_dir / "report.json" : fs::path());
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw ConfigError("cannot write " + report_path.string());
    out << res.report.dump(2) << '\n';
  }
  return res;
}

/// Report without wall-clock fields, for reproducibility comparisons.
inline json strip_timing(json report) {
  report.erase("timing_seconds");
  return report;
}

}  // namespace sggsr::harness
