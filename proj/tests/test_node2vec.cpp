#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace sggsr;

TEST(Cosine, ClosedForms) {
  const std::vector<double> a = {1, 1}, b = {1, 0}, c = {0, 1}, z = {0, 0};
  EXPECT_DOUBLE_EQ(cosine(std::span(a), std::span(a)), 1.0);
  EXPECT_DOUBLE_EQ(cosine(std::span(b), std::span(c)), 0.0);
  EXPECT_NEAR(cosine(std::span(a), std::span(b)), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(cosine(std::span(a), std::span(z)), 0.0);
}

TEST(Cosine, DimensionMismatchThrows) {
  const std::vector<double> a = {1, 1}, b = {1, 0, 0};
  EXPECT_THROW(cosine(std::span(a), std::span(b)), ConfigError);
}

TEST(Transition, UnbiasedIsUniform) {
  const EdgeList e = {{0, 1}, {1, 2}, {1, 3}, {0, 2}};
  Csr csr(4, e);
  std::vector<double> p;
  transition_probabilities(csr, 0, 1, 1.0, 1.0, p);
  ASSERT_EQ(p.size(), 3u);
  for (double x : p) EXPECT_DOUBLE_EQ(x, 1.0 / 3.0);
}

TEST(Transition, ReturnCommonFarWeights) {
  // cur = 1 with neighbors t=0 (previous), c=2 (also adjacent to t), f=3.
  const EdgeList e = {{0, 1}, {1, 2}, {1, 3}, {0, 2}};
  Csr csr(4, e);
  std::vector<double> p;
  transition_probabilities(csr, 0, 1, 0.5, 2.0, p);
  ASSERT_EQ(p.size(), 3u);
  // Unnormalized (1/p, 1, 1/q) = (2, 1, 0.5) over total 3.5.
  const double w[3] = {2.0, 1.0, 0.5};
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[static_cast<std::size_t>(i)], w[i] / 3.5, 1e-15);
  EXPECT_NEAR(p[0], 4.0 / 7.0, 1e-15);
  EXPECT_NEAR(p[1], 2.0 / 7.0, 1e-15);
  EXPECT_NEAR(p[2], 1.0 / 7.0, 1e-15);
}

TEST(Walks, ValidPathsFromEveryNonIsolatedNode) {
  const auto edges = testutil::random_edges(40, 0.1, 3);
  WalkConfig cfg;
  cfg.p = 0.5;
  cfg.q = 2.0;
  cfg.walk_length = 15;
  cfg.walks_per_node = 3;
  cfg.seed = 7;
  const auto corpus = generate_walks(40, edges, cfg);
  Csr csr(40, edges);
  std::size_t non_isolated = 0;
  for (NodeId n = 0; n < 40; ++n) non_isolated += csr.degree(n) > 0;
  ASSERT_EQ(corpus.walks.size(), non_isolated * 3);
  std::vector<std::size_t> starts(40, 0);
  for (const auto& w : corpus.walks) {
    ASSERT_EQ(w.size(), 15u);
    ++starts[w[0]];
    for (std::size_t i = 1; i < w.size(); ++i) EXPECT_TRUE(csr.adjacent(w[i - 1], w[i]));
  }
  for (NodeId n = 0; n < 40; ++n) EXPECT_EQ(starts[n], csr.degree(n) > 0 ? 3u : 0u);
}

TEST(Walks, LengthTwoIsSingleEdge) {
  const EdgeList edges = {{0, 1}, {1, 2}};
  WalkConfig cfg;
  cfg.walk_length = 2;
  cfg.walks_per_node = 4;
  for (const auto& w : generate_walks(3, edges, cfg).walks) {
    ASSERT_EQ(w.size(), 2u);
    EXPECT_TRUE(contains(edges, Edge(w[0], w[1])));
  }
}

TEST(Walks, ThreadCountInvariant) {
  const auto edges = testutil::random_edges(60, 0.08, 9);
  WalkConfig cfg;
  cfg.p = 2.0;
  cfg.q = 0.5;
  cfg.walk_length = 20;
  cfg.walks_per_node = 4;
  cfg.seed = 1;
  const auto one = generate_walks(60, edges, cfg);
  cfg.num_threads = 4;
  const auto four = generate_walks(60, edges, cfg);
  EXPECT_EQ(one.walks, four.walks);
}

TEST(Walks, InvalidConfigRejected) {
  WalkConfig cfg;
  cfg.p = 0;
  EXPECT_THROW(generate_walks(3, EdgeList{{0, 1}}, cfg), ConfigError);
  cfg.p = 1;
  cfg.walk_length = 1;
  EXPECT_THROW(generate_walks(3, EdgeList{{0, 1}}, cfg), ConfigError);
}

TEST(SkipGram, StepMatchesFiniteDifference) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0, 0.3);
  const std::size_t d = 6;
  auto vec = [&] {
    std::vector<double> v(d);
    for (double& x : v) x = normal(rng);
    return v;
  };
  std::vector<double> u = vec(), ctx = vec(), n1 = vec(), n2 = vec();
  const double lr = 1e-3;

  // Loss as a function of every parameter, flattened.
  auto loss = [&](const std::vector<double>& uu, const std::vector<double>& cc, const std::vector<double>& a,
                  const std::vector<double>& b) {
    std::vector<std::span<const double>> negs = {a, b};
    return sgns_loss<double>(uu, cc, negs);
  };
  auto numeric_grad = [&](std::vector<double>& target) {
    std::vector<double> g(d);
    const double h = 1e-6;
    for (std::size_t i = 0; i < d; ++i) {
      const double keep = target[i];
      target[i] = keep + h;
      const double up = loss(u, ctx, n1, n2);
      target[i] = keep - h;
      const double down = loss(u, ctx, n1, n2);
      target[i] = keep;
      g[i] = (up - down) / (2 * h);
    }
    return g;
  };
  const auto gu = numeric_grad(u), gc = numeric_grad(ctx), g1 = numeric_grad(n1), g2 = numeric_grad(n2);

  auto u2 = u, c2 = ctx, a2 = n1, b2 = n2;
  std::vector<std::span<double>> negs = {a2, b2};
  std::vector<double> scratch;
  sgns_step<double>(u2, c2, negs, lr, scratch);
  for (std::size_t i = 0; i < d; ++i) {
    EXPECT_NEAR(u2[i] - u[i], -lr * gu[i], 1e-10);
    EXPECT_NEAR(c2[i] - ctx[i], -lr * gc[i], 1e-10);
    EXPECT_NEAR(a2[i] - n1[i], -lr * g1[i], 1e-10);
    EXPECT_NEAR(b2[i] - n2[i], -lr * g2[i], 1e-10);
  }
}

TEST(SkipGram, SinglePositiveUpdateClosedForm) {
  std::vector<double> u = {0.1, -0.2, 0.3}, v = {0.5, 0.4, -0.1};
  const auto u0 = u, v0 = v;
  const double eta = 0.05;
  std::vector<double> scratch;
  sgns_step<double>(u, v, std::span<const std::span<double>>{}, eta, scratch);
  double dot = 0;
  for (int i = 0; i < 3; ++i) dot += u0[static_cast<std::size_t>(i)] * v0[static_cast<std::size_t>(i)];
  const double s = 1.0 / (1.0 + std::exp(-dot));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(u[i] - u0[i], eta * (1 - s) * v0[i], 1e-15);
    EXPECT_NEAR(v[i] - v0[i], eta * (1 - s) * u0[i], 1e-15);
  }
}

TEST(SkipGram, ZeroEpochsReturnsInitialization) {
  WalkConfig wc;
  wc.walk_length = 10;
  wc.walks_per_node = 2;
  const auto corpus = generate_walks(5, EdgeList{{0, 1}, {1, 2}, {2, 3}}, wc);
  SkipGramConfig sg;
  sg.dim = 8;
  sg.epochs = 0;
  sg.seed = 3;
  const auto e0 = train_skipgram(corpus, sg);
  sg.epochs = 1;
  const auto e1 = train_skipgram(corpus, sg);
  const float bound = 0.5f / 8.0f;
  for (Eigen::Index i = 0; i < e0.vectors.size(); ++i) {
    EXPECT_LE(std::abs(e0.vectors.data()[i]), bound);
  }
  EXPECT_FALSE(e0 == e1);
  // Node 4 is isolated: never updated.
  EXPECT_TRUE(e0.vectors.row(4) == e1.vectors.row(4));
}

TEST(SkipGram, TwoCliquesSeparate) {
  EdgeList e;
  for (NodeId a = 0; a < 8; ++a)
    for (NodeId b = a + 1; b < 8; ++b) {
      e.emplace_back(a, b);
      e.emplace_back(a + 8, b + 8);
    }
  e.emplace_back(0, 8);
  canonicalize(e);
  WalkConfig wc;
  wc.walk_length = 20;
  wc.walks_per_node = 10;
  wc.seed = 2;
  SkipGramConfig sg;
  sg.dim = 16;
  sg.window = 5;
  sg.seed = 2;
  const auto emb = train_skipgram(generate_walks(16, e, wc), sg);
  double intra = 0, inter = 0;
  int ni = 0, nx = 0;
  for (NodeId a = 0; a < 16; ++a)
    for (NodeId b = a + 1; b < 16; ++b) {
      const double c = cosine(emb.row(a), emb.row(b));
      if ((a < 8) == (b < 8)) {
        intra += c;
        ++ni;
      } else {
        inter += c;
        ++nx;
      }
    }
  EXPECT_GT(intra / ni, inter / nx);
}

TEST(SkipGram, Deterministic) {
  const auto edges = testutil::random_edges(30, 0.15, 5);
  WalkConfig wc;
  wc.walk_length = 10;
  wc.walks_per_node = 3;
  wc.seed = 8;
  SkipGramConfig sg;
  sg.dim = 8;
  sg.epochs = 2;
  sg.seed = 8;
  EXPECT_TRUE(train_skipgram(generate_walks(30, edges, wc), sg) == train_skipgram(generate_walks(30, edges, wc), sg));
}

TEST(Embeddings, FileRoundTripAndHeader) {
  testutil::TempDir d("emb");
  EmbeddingMatrix m;
  m.vectors.resize(3, 4);
  for (Eigen::Index i = 0; i < m.vectors.size(); ++i) m.vectors.data()[i] = static_cast<float>(i) * 0.25f - 1.0f;
  write_embeddings(m, d.path() / "embeddings.f32");
  EXPECT_EQ(std::filesystem::file_size(d.path() / "embeddings.f32"), 16u + 3u * 4u * 4u);
  EXPECT_TRUE(read_embeddings(d.path() / "embeddings.f32") == m);
  testutil::write_text(d.path() / "bad.f32", "not an embedding file");
  EXPECT_THROW(read_embeddings(d.path() / "bad.f32"), ConfigError);
}
