// Command-line front end for the refinement pipeline.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sggsr/sggsr.hpp"

namespace {

using namespace sggsr;
using harness::json;
namespace fs = std::filesystem;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool dump_augment = false;
};

fs::path require_out(const Globals& g) {
  if (g.out.empty()) throw ConfigError("--out <dir> is required");
  fs::create_directories(g.out);
  return g.out;
}

std::uint64_t seed_or(const Globals& g, std::uint64_t fallback) { return g.seed.value_or(fallback); }

void write_json(const json& j, const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

GraphBundle load_or_throw(const std::string& dir) {
  if (dir.empty()) throw ConfigError("--bundle <dir> is required");
  return load_bundle(dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust graph structure refinement: attack simulation, sub-graph extraction and training"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out, "output directory");
  app.add_flag("--dump-augment", g.dump_augment, "write per-epoch augmented edge lists");
  app.fallthrough();

  // sbm
  harness::SbmConfig sbm;
  auto* c_sbm = app.add_subcommand("sbm", "generate a stochastic block model bundle");
  c_sbm->add_option("--blocks", sbm.blocks);
  c_sbm->add_option("--nodes-per-block", sbm.nodes_per_block);
  c_sbm->add_option("--p-in", sbm.p_in);
  c_sbm->add_option("--p-out", sbm.p_out);
  c_sbm->add_option("--feature-dim", sbm.feature_dim);
  c_sbm->add_option("--feature-shift", sbm.feature_shift);

  // attack
  std::string bundle;
  AttackConfig atk;
  auto* c_attack = app.add_subcommand("attack", "inject adversarial edges and feature noise");
  c_attack->add_option("--bundle", bundle)->required();
  c_attack->add_option("--ptb-rate", atk.ptb_rate);
  c_attack->add_option("--gamma", atk.gamma);
  c_attack->add_option("--noisy-frac", atk.noisy_node_frac);
  c_attack->add_option("--inter-class-prob", atk.inter_class_prob);

  // fraudgen
  FraudConfig fraud;
  auto* c_fraud = app.add_subcommand("fraudgen", "inject fraudster co-review cliques");
  c_fraud->add_option("--bundle", bundle)->required();
  c_fraud->add_option("--fraudsters", fraud.num_fraudsters);
  c_fraud->add_option("--reviews", fraud.reviews_per_fraudster);
  c_fraud->add_option("--blend", fraud.blend);

  // embed
  harness::Phase1Spec p1;
  auto* c_embed = app.add_subcommand("embed", "node2vec embeddings");
  c_embed->add_option("--bundle", bundle)->required();
  c_embed->add_option("--p", p1.walk.p);
  c_embed->add_option("--q", p1.walk.q);
  c_embed->add_option("--dim", p1.skipgram.dim);
  c_embed->add_option("--walk-length", p1.walk.walk_length);
  c_embed->add_option("--walks-per-node", p1.walk.walks_per_node);
  c_embed->add_option("--window", p1.skipgram.window);
  c_embed->add_option("--negatives", p1.skipgram.negatives);
  c_embed->add_option("--epochs", p1.skipgram.epochs);
  c_embed->add_option("--threads", p1.walk.num_threads);

  // extract
  std::string emb_file;
  auto* c_extract = app.add_subcommand("extract", "clean sub-graph and kNN candidates");
  c_extract->add_option("--bundle", bundle)->required();
  c_extract->add_option("--embeddings", emb_file)->required()->check(CLI::ExistingFile);
  c_extract->add_option("--lambda-sp", p1.lambda_sp);
  c_extract->add_option("--lambda-fs", p1.lambda_fs);
  c_extract->add_option("--k", p1.k);

  // train
  std::string phase1_dir;
  auto* c_train = app.add_subcommand("train", "train on a bundle (flat JSON config via --config)");
  c_train->add_option("--bundle", bundle)->required();
  c_train->add_option("--phase1", phase1_dir, "directory with embeddings.f32/subgraph.tsv/knn_*.tsv");

  // eval
  std::string model_file;
  auto* c_eval = app.add_subcommand("eval", "infer on a bundle with a trained model");
  c_eval->add_option("--bundle", bundle)->required();
  c_eval->add_option("--model", model_file)->required()->check(CLI::ExistingFile);

  // run
  auto* c_run = app.add_subcommand("run", "full pipeline from an experiment config");

  // report
  std::string report_file;
  auto* c_report = app.add_subcommand("report", "pretty-print a report");
  c_report->add_option("file", report_file)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*c_sbm) {
      sbm.seed = seed_or(g, 0);
      save_bundle(harness::generate_sbm(sbm), require_out(g));
    } else if (*c_attack) {
      atk.seed = seed_or(g, 0);
      atk.validate();
      GraphBundle b = inject_structure_attack(load_or_throw(bundle), atk);
      if (atk.gamma > 0 && atk.noisy_node_frac > 0) b = inject_feature_noise(b, atk);
      save_bundle(b, require_out(g));
    } else if (*c_fraud) {
      fraud.seed = seed_or(g, 0);
      save_bundle(generate_fraud_graph(load_or_throw(bundle), fraud), require_out(g));
    } else if (*c_embed) {
      p1.walk.seed = seed_or(g, 0);
      p1.skipgram.seed = derive_seed(p1.walk.seed, {stream::kSkipGram});
      const auto out = require_out(g);
      write_embeddings(harness::embed(load_or_throw(bundle), p1.walk, p1.skipgram), out / "embeddings.f32");
    } else if (*c_extract) {
      p1.validate();
      const GraphBundle b = load_or_throw(bundle);
      const EmbeddingMatrix emb = read_embeddings(emb_file);
      const auto ext = extract_subgraph_detailed(score_edges(b, emb), p1.lambda_sp, p1.lambda_fs);
      const auto knn = build_knn_candidates(b, emb, nodes_of(ext.subgraph), p1.k);
      const auto out = require_out(g);
      write_edge_list(out / "subgraph.tsv", ext.subgraph);
      write_edge_list(out / "knn_fs.tsv", knn.e_fs_k);
      write_edge_list(out / "knn_sp.tsv", knn.e_sp_k);
    } else if (*c_train) {
      gsr::TrainConfig tc;
      if (!g.config.empty()) harness::parse_flat_train_config(harness::read_json_file(g.config), tc, p1);
      tc.seed = seed_or(g, tc.seed);
      const GraphBundle b = load_or_throw(bundle);
      gsr::SubgraphArtifacts art;
      if (!phase1_dir.empty()) {
        const fs::path d = phase1_dir;
        art.subgraph = read_edge_list(d / "subgraph.tsv", b.num_nodes);
        art.candidates.e_fs_k = read_edge_list(d / "knn_fs.tsv", b.num_nodes);
        art.candidates.e_sp_k = read_edge_list(d / "knn_sp.tsv", b.num_nodes);
        art.candidates.k = p1.k;
      } else {
        p1.walk.seed = derive_seed(tc.seed, {stream::kWalk});
        p1.skipgram.seed = derive_seed(tc.seed, {stream::kSkipGram});
        art = harness::run_phase1(b, p1)->artifacts;
      }
      const auto out = require_out(g);
      gsr::TrainHooks hooks;
      if (g.dump_augment) {
        fs::create_directories(out / "augment");
        hooks.on_augment = [&](std::size_t epoch, const AugmentedEdgeSet& aug) {
          write_edge_list(out / "augment" / ("epoch_" + std::to_string(epoch) + ".tsv"),
                          edge_difference(aug.edges, aug.base));
        };
      }
      const auto res = gsr::train(b, art, tc, hooks);
      gsr::write_model(res.params, out / "model.bin");
      harness::write_train_log(res.log, out / "train_log.jsonl");
    } else if (*c_eval) {
      const GraphBundle b = load_or_throw(bundle);
      const auto inf = gsr::infer_refined(gsr::read_model(model_file), b);
      const auto out = require_out(g);
      write_json(harness::inference_report(b, inf), out / "report.json");
      harness::write_attention_csv(b, inf.alpha, out / "attention.csv");
    } else if (*c_run) {
      if (g.config.empty()) throw ConfigError("run needs --config <json>");
      auto cfg = harness::ExperimentConfig::from_json(harness::read_json_file(g.config));
      if (g.seed) cfg.seed = *g.seed;
      harness::RunOptions opt;
      if (!g.out.empty()) opt.out_dir = fs::path(g.out);
      opt.dump_augment = g.dump_augment;
      const auto res = harness::run_experiment(cfg, opt);
      if (g.out.empty() && cfg.report.empty()) std::cout << res.report.dump(2) << '\n';
    } else if (*c_report) {
      std::cout << harness::read_json_file(report_file).dump(2) << '\n';
    }
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
