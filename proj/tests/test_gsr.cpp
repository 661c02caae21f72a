#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace sggsr;
using namespace sggsr::gsr;
using testutil::make_bundle;

namespace {

struct Problem {
  Mat<double> x;
  EdgeList pos;
  std::vector<int> pos_group;
  EdgeList neg;
  std::vector<int> neg_group;
  std::vector<int> labels;
  std::vector<NodeId> mask;
  ModelParams<double> params;
};

Problem small_problem(std::uint64_t seed, std::size_t n = 10) {
  Problem p;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  p.x.resize(static_cast<Eigen::Index>(n), 4);
  for (Eigen::Index i = 0; i < p.x.size(); ++i) p.x.data()[i] = normal(rng);
  p.pos = testutil::random_edges(n, 0.35, seed);
  for (std::size_t k = 0; k < p.pos.size(); ++k) p.pos_group.push_back(static_cast<int>(k % 2));
  p.neg = sample_non_edges(p.pos, 6, n, seed, 0);
  for (std::size_t k = 0; k < p.neg.size(); ++k) p.neg_group.push_back(static_cast<int>(k % 2));
  for (std::size_t i = 0; i < n; ++i) p.labels.push_back(static_cast<int>(i % 3));
  p.mask = {0, 1, 2, 4, 7};
  Architecture arch{4, 3, 3, 2, 2};
  p.params = ModelParams<double>::init(arch, seed);
  return p;
}

ObjectiveInputs<double> inputs(const Problem& p, double lambda_E, bool node) {
  ObjectiveInputs<double> in;
  in.features = &p.x;
  in.positives = p.pos;
  in.positive_group = p.pos_group;
  in.negatives = p.neg;
  in.negative_group = p.neg_group;
  in.num_groups = 2;
  in.labels = p.labels;
  in.mask = p.mask;
  in.lambda_E = lambda_E;
  in.include_node = node;
  return in;
}

double max_rel_error(Problem& p, const ObjectiveInputs<double>& in) {
  const auto obj = evaluate_objective(p.params, in);
  double worst = 0;
  const double h = 1e-5;
  for (std::size_t l = 0; l < p.params.weights.size(); ++l)
    for (std::size_t hd = 0; hd < p.params.weights[l].size(); ++hd) {
      auto& w = p.params.weights[l][hd];
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double keep = w.data()[i];
        w.data()[i] = keep + h;
        const double up = evaluate_objective(p.params, in, false).total;
        w.data()[i] = keep - h;
        const double down = evaluate_objective(p.params, in, false).total;
        w.data()[i] = keep;
        const double num = (up - down) / (2 * h);
        const double ana = obj.grads[l][hd].data()[i];
        worst = std::max(worst, std::abs(num - ana) / std::max(1e-6, std::abs(num) + std::abs(ana)));
      }
    }
  return worst;
}

}  // namespace

TEST(Model, ForwardShapesAndAttentionRows) {
  auto p = small_problem(1);
  const auto cache = forward(p.params, p.x, MessageGraph(10, p.pos));
  EXPECT_EQ(cache.logits.rows(), 10);
  EXPECT_EQ(cache.logits.cols(), 3);
  for (const auto& lc : cache.layers)
    for (const auto& alpha : lc.alpha)
      for (std::size_t i = 0; i < 10; ++i) {
        double s = 0;
        for (std::size_t a = cache.graph.offsets[i]; a < cache.graph.offsets[i + 1]; ++a) s += alpha[a];
        EXPECT_NEAR(s, 1.0, 1e-12);
      }
}

TEST(Model, MessageGraphHasSelfLoops) {
  MessageGraph g(4, EdgeList{{0, 1}, {1, 2}});
  EXPECT_EQ(g.num_arcs(), 4u + 4u);
  EXPECT_NO_THROW(g.arc(3, 3));
  EXPECT_NO_THROW(g.arc(2, 1));
  EXPECT_THROW(g.arc(0, 2), GraphError);
}

TEST(Model, NodeLossGradient) {
  for (std::uint64_t s : {1u, 2u}) {
    auto p = small_problem(s);
    EXPECT_LT(max_rel_error(p, inputs(p, 0.0, true)), 1e-6);
  }
}

TEST(Model, LinkLossGradientPerLayer) {
  auto p = small_problem(3);
  for (std::size_t l = 0; l < 2; ++l) {
    auto in = inputs(p, 1.0, false);
    in.link_layer = l;
    EXPECT_LT(max_rel_error(p, in), 1e-6) << "layer " << l;
  }
}

TEST(Model, FullObjectiveGradientWithDropout) {
  auto p = small_problem(4);
  auto in = inputs(p, 2.0, true);
  in.forward = {true, 0.3, 42};
  EXPECT_LT(max_rel_error(p, in), 1e-6);
}

TEST(Model, StaleCacheRejected) {
  auto p = small_problem(5);
  const auto cache = forward(p.params, p.x, MessageGraph(10, p.pos));
  ++p.params.generation;
  const Mat<double> d = Mat<double>::Zero(10, 3);
  EXPECT_THROW(backward<double>(p.params, cache, d), Error);
}

TEST(Model, NonFiniteInputRaisesNumericError) {
  auto p = small_problem(6);
  p.x(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(forward(p.params, p.x, MessageGraph(10, p.pos)), NumericError);
}

TEST(Loss, GroupedAtHalfProbabilityIsClosedForm) {
  for (std::size_t groups : {1u, 3u, 6u}) {
    std::vector<double> pos(30, 0.0), neg(12, 0.0);
    std::vector<int> pg(30), ng(12);
    for (std::size_t k = 0; k < 30; ++k) pg[k] = static_cast<int>(k % groups);
    for (std::size_t k = 0; k < 12; ++k) ng[k] = static_cast<int>(k % groups);
    const auto ll = loss_link_grouped<double>(pos, pg, neg, ng, groups);
    EXPECT_NEAR(ll.value, static_cast<double>(groups) * 2 * std::log(2.0), 1e-9);
  }
}

TEST(Loss, SingleGroupEqualsUngroupedBitwise) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0, 2);
  std::vector<double> pos(17), neg(9);
  for (double& v : pos) v = normal(rng);
  for (double& v : neg) v = normal(rng);
  const auto a = loss_link<double>(pos, neg);
  const auto b = loss_link_grouped<double>(pos, std::vector<int>(17, 0), neg, std::vector<int>(9, 0), 1);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.grad_pos, b.grad_pos);
  EXPECT_EQ(a.grad_neg, b.grad_neg);
}

TEST(Loss, EmptyGroupSkippedWithWarning) {
  set_warnings_enabled(false);
  const std::vector<double> pos = {0.0, 0.0}, neg = {0.0};
  const auto ll = loss_link_grouped<double>(pos, std::vector<int>{0, 0}, neg, std::vector<int>{0}, 3);
  set_warnings_enabled(true);
  EXPECT_NEAR(ll.value, 2 * std::log(2.0), 1e-12);
  EXPECT_EQ(ll.group_values[1], 0.0);
}

TEST(Loss, PositivesWithoutNegativesThrow) {
  const std::vector<double> pos = {0.0}, neg = {0.0};
  EXPECT_THROW(loss_link_grouped<double>(pos, std::vector<int>{1}, neg, std::vector<int>{0}, 2), ConfigError);
}

TEST(Loss, NodeLossMaskErrors) {
  const Mat<double> logits = Mat<double>::Zero(3, 2);
  std::vector<int> labels = {0, kNoLabel, 1};
  EXPECT_THROW(loss_node<double>(logits, labels, std::vector<NodeId>{}), ConfigError);
  EXPECT_THROW(loss_node<double>(logits, labels, std::vector<NodeId>{1}), ConfigError);
  EXPECT_NEAR(loss_node<double>(logits, labels, std::vector<NodeId>{0, 2}).value, std::log(2.0), 1e-15);
}

TEST(Loss, StableForLargeScores) {
  const std::vector<double> pos = {800.0, -800.0}, neg = {-800.0, 800.0};
  const auto ll = loss_link<double>(pos, neg);
  EXPECT_TRUE(std::isfinite(ll.value));
  EXPECT_NEAR(ll.value, 400.0 + 400.0, 1e-9);
}

TEST(Groups, LowHighSplitUsesMedian) {
  // Path 0-1-2-3 plus a star at 4: degrees 1,2,2,2,4,1,1,1.
  const EdgeList e = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {4, 6}, {4, 7}};
  const auto prof = degree_profile(8, e);
  const auto part = split_groups(e, prof, GroupScheme::kLowHigh);
  ASSERT_EQ(part.num_groups(), 3u);
  EXPECT_EQ(part.labels, (std::vector<std::string>{"LL", "HL", "HH"}));
  EXPECT_DOUBLE_EQ(part.thresholds[0], prof.median);
  std::size_t total = 0;
  for (const auto& g : part.groups) total += g.size();
  EXPECT_EQ(total, e.size());
  for (std::size_t k = 0; k < e.size(); ++k) {
    const int a = prof.degrees[e[k].u] >= prof.median, b = prof.degrees[e[k].v] >= prof.median;
    EXPECT_EQ(part.edge_group[k], a + b);
  }
}

TEST(Groups, LowMidHighHasSixGroups) {
  const auto e = testutil::random_edges(40, 0.15, 2);
  const auto part = split_groups(e, degree_profile(40, e), GroupScheme::kLowMidHigh);
  EXPECT_EQ(part.num_groups(), 6u);
  EXPECT_EQ(part.thresholds.size(), 2u);
  EdgeList all;
  for (const auto& g : part.groups) all.insert(all.end(), g.begin(), g.end());
  canonicalize(all);
  EXPECT_EQ(all, e);
}

TEST(Groups, NoneIsSingleGroup) {
  const EdgeList e = {{0, 1}, {1, 2}};
  const auto part = split_groups(e, degree_profile(3, e), GroupScheme::kNone);
  EXPECT_EQ(part.num_groups(), 1u);
  EXPECT_EQ(part.groups[0], e);
}

TEST(Groups, ParseScheme) {
  EXPECT_EQ(parse_scheme("L-H"), GroupScheme::kLowHigh);
  EXPECT_EQ(parse_scheme("L-M-H"), GroupScheme::kLowMidHigh);
  EXPECT_EQ(parse_scheme("none"), GroupScheme::kNone);
  EXPECT_THROW(parse_scheme("LMHX"), ConfigError);
}

TEST(Groups, ApportionProportional) {
  const std::vector<std::size_t> sizes = {10, 30, 0, 60};
  const auto c = apportion(sizes, 50);
  EXPECT_EQ(c, (std::vector<std::size_t>{5, 15, 0, 30}));
  const auto tiny = apportion(std::vector<std::size_t>{1, 99}, 10);
  EXPECT_EQ(tiny[0], 1u);
}

TEST(Sampling, NegativesAreDistinctNonEdges) {
  const auto e = testutil::random_edges(30, 0.2, 4);
  const auto neg = sample_negatives(e, 0.5, 30, 7, 3);
  EXPECT_EQ(neg.size(), e.size() / 2);
  EdgeList sorted = neg;
  canonicalize(sorted);
  EXPECT_EQ(sorted.size(), neg.size());
  for (const Edge& x : neg) {
    EXPECT_FALSE(contains(e, x));
    EXPECT_NE(x.u, x.v);
  }
  EXPECT_EQ(neg, sample_negatives(e, 0.5, 30, 7, 3));
  EXPECT_NE(neg, sample_negatives(e, 0.5, 30, 7, 4));
}

TEST(Sampling, DenseRegimeAndOverflow) {
  const EdgeList e = {{0, 1}, {0, 2}, {1, 2}};
  EXPECT_EQ(sample_non_edges(e, 3, 4, 1, 0).size(), 3u);
  EXPECT_THROW(sample_non_edges(e, 4, 4, 1, 0), ConfigError);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ModelParams<double> p;
  p.weights = {{Mat<double>::Constant(1, 2, 1.0)}};
  Gradients<double> g = {{Mat<double>(1, 2)}};
  g[0][0] << 0.5, -2.0;
  Adam<double> opt;
  opt.lr = 0.1;
  opt.step(p, g);
  EXPECT_NEAR(p.weights[0][0](0, 0), 0.9, 1e-6);
  EXPECT_NEAR(p.weights[0][0](0, 1), 1.1, 1e-6);
  EXPECT_EQ(p.generation, 1u);
}

TEST(ModelIo, RoundTrip) {
  testutil::TempDir d("model");
  Architecture arch{5, 4, 3, 2, 2};
  const auto p = ModelParams<float>::init(arch, 9);
  write_model(p, d.path() / "model.bin");
  const auto q = read_model(d.path() / "model.bin");
  EXPECT_TRUE(p == q);
  EXPECT_EQ(q.arch.in_dim, 5u);
  testutil::write_text(d.path() / "junk.bin", "SGGSRMDL");
  EXPECT_THROW(read_model(d.path() / "junk.bin"), ConfigError);
}

namespace {

GraphBundle tiny_sbm(std::uint64_t seed) {
  harness::SbmConfig cfg;
  cfg.nodes_per_block = 30;
  cfg.p_in = 0.2;
  cfg.p_out = 0.02;
  cfg.feature_dim = 8;
  cfg.feature_shift = 2.0;
  cfg.seed = seed;
  return harness::generate_sbm(cfg);
}

}  // namespace

TEST(Train, LearnsEasySbmAndLogsEveryEpoch) {
  const auto g = tiny_sbm(1);
  SubgraphArtifacts art;
  art.subgraph = g.edges;
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.patience = 60;
  cfg.lambda_aug = 0.0;
  cfg.seed = 3;
  const auto res = train(g, art, cfg);
  EXPECT_EQ(res.log.size(), 60u);
  const auto inf = infer_refined(res.params, g);
  EXPECT_GT(accuracy(inf.predictions, g.labels, g.splits.test), 0.8);
  EXPECT_EQ(inf.alpha.size(), g.edges.size());
}

TEST(Train, AugmentationCountsJsdPerEpoch) {
  const auto g = tiny_sbm(2);
  SubgraphArtifacts art;
  art.subgraph = g.edges;
  const auto nodes = nodes_of(g.edges);
  EmbeddingMatrix emb;
  emb.vectors = g.features.cast<float>();
  art.candidates = build_knn_candidates(g, emb, nodes, 3);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 1;
  std::size_t calls = 0;
  TrainHooks hooks;
  hooks.on_augment = [&](std::size_t, const AugmentedEdgeSet& a) {
    ++calls;
    EXPECT_TRUE(is_subset(a.base, a.edges));
  };
  const auto res = train(g, art, cfg, hooks);
  EXPECT_EQ(calls, 5u);
  for (const auto& e : res.log)
    EXPECT_EQ(e.jsd_evaluations, art.candidates.e_fs_k.size() + art.candidates.e_sp_k.size());
}

TEST(Train, DeterministicGivenSeed) {
  const auto g = tiny_sbm(3);
  SubgraphArtifacts art;
  art.subgraph = g.edges;
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.lambda_aug = 0.0;
  cfg.seed = 4;
  EXPECT_TRUE(train(g, art, cfg).params == train(g, art, cfg).params);
}

TEST(Train, InvalidConfigRejected) {
  const auto g = tiny_sbm(4);
  SubgraphArtifacts art;
  art.subgraph = g.edges;
  TrainConfig cfg;
  cfg.lambda_aug = 1.5;
  EXPECT_THROW(train(g, art, cfg), ConfigError);
  cfg.lambda_aug = 0.5;
  art.subgraph.clear();
  EXPECT_THROW(train(g, art, cfg), ConfigError);
}

TEST(Train, DivergenceRaisesNumericError) {
  auto g = tiny_sbm(5);
  g.features *= 1e300;
  SubgraphArtifacts art;
  art.subgraph = g.edges;
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.lambda_aug = 0.0;
  EXPECT_THROW(train(g, art, cfg), NumericError);
}

TEST(Infer, FeatureDimensionMismatch) {
  const auto g = tiny_sbm(6);
  Architecture arch{3, 4, 2, 2, 2};
  EXPECT_THROW(infer_refined(ModelParams<float>::init(arch, 1), g), ConfigError);
}

TEST(Train, BestEpochBreaksAccuracyTiesByValidationLoss) {
  const auto g = tiny_sbm(6);
  SubgraphArtifacts art;
  art.subgraph = g.edges;
  TrainConfig cfg;
  cfg.epochs = 80;
  cfg.patience = 80;
  cfg.lambda_aug = 0.0;
  cfg.seed = 2;
  const auto res = train(g, art, cfg);
  const auto& best = res.log.at(res.best_epoch);
  for (const auto& e : res.log) {
    EXPECT_LE(e.val_accuracy, best.val_accuracy);
    if (e.val_accuracy == best.val_accuracy) EXPECT_GE(e.val_loss, best.val_loss);
  }
  EXPECT_EQ(res.best_val_accuracy, best.val_accuracy);
}
