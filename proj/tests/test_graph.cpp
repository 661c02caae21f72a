#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace sggsr;
using testutil::make_bundle;
using testutil::TempDir;

TEST(Edge, CanonicalOrder) {
  Edge e(5, 2);
  EXPECT_EQ(e.u, 2u);
  EXPECT_EQ(e.v, 5u);
  EXPECT_EQ(Edge(2, 5), e);
}

TEST(EdgeList, CanonicalizeDeduplicates) {
  EdgeList e = {{1, 0}, {0, 1}, {3, 2}, {1, 2}};
  canonicalize(e);
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0], Edge(0, 1));
  EXPECT_EQ(e[1], Edge(1, 2));
  EXPECT_EQ(e[2], Edge(2, 3));
}

TEST(EdgeList, SetOperations) {
  EdgeList a = {{0, 1}, {1, 2}, {2, 3}};
  EdgeList b = {{1, 2}, {3, 4}};
  EXPECT_EQ(edge_union(a, b).size(), 4u);
  EXPECT_EQ(edge_intersection(a, b), (EdgeList{{1, 2}}));
  EXPECT_EQ(edge_difference(a, b), (EdgeList{{0, 1}, {2, 3}}));
  EXPECT_TRUE(is_subset(edge_intersection(a, b), a));
  EXPECT_FALSE(is_subset(b, a));
}

TEST(Csr, NeighborsSortedAndSymmetric) {
  const EdgeList e = {{0, 2}, {0, 1}, {1, 2}, {2, 3}};
  Csr csr(5, e);
  auto nb = csr.neighbors_of(2);
  EXPECT_EQ(std::vector<NodeId>(nb.begin(), nb.end()), (std::vector<NodeId>{0, 1, 3}));
  EXPECT_EQ(csr.degree(4), 0u);
  EXPECT_TRUE(csr.adjacent(3, 2));
  EXPECT_FALSE(csr.adjacent(0, 3));
}

TEST(DegreeProfile, Star) {
  const EdgeList e = {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}};
  const auto p = degree_profile(6, e);
  EXPECT_DOUBLE_EQ(p.imbalance_ratio, 5.0);
  EXPECT_EQ(p.degrees[0], 5u);
}

TEST(DegreeProfile, Triangle) {
  const auto p = degree_profile(3, EdgeList{{0, 1}, {1, 2}, {0, 2}});
  EXPECT_DOUBLE_EQ(p.imbalance_ratio, 1.0);
  EXPECT_DOUBLE_EQ(p.median, 2.0);
}

TEST(DegreeProfile, PathOfFour) {
  const auto p = degree_profile(4, EdgeList{{0, 1}, {1, 2}, {2, 3}});
  EXPECT_DOUBLE_EQ(p.median, 1.5);
  EXPECT_DOUBLE_EQ(p.imbalance_ratio, 2.0);
}

TEST(DegreeProfile, IsolatedNodesIgnoredForMin) {
  const auto p = degree_profile(10, EdgeList{{0, 1}, {0, 2}});
  EXPECT_DOUBLE_EQ(p.imbalance_ratio, 2.0);
}

TEST(DegreeProfile, EmptyEdgeSetThrows) { EXPECT_THROW(degree_profile(4, EdgeList{}), Error); }

TEST(DegreeProfile, PartitionsReaggregate) {
  const auto edges = testutil::random_edges(30, 0.2, 7);
  EdgeList a, b;
  for (std::size_t i = 0; i < edges.size(); ++i) (i % 3 ? a : b).push_back(edges[i]);
  const auto full = degree_profile(30, edges);
  const auto pa = degree_profile(30, a), pb = degree_profile(30, b);
  for (std::size_t n = 0; n < 30; ++n) EXPECT_EQ(full.degrees[n], pa.degrees[n] + pb.degrees[n]);
}

TEST(CleanRate, Arithmetic) {
  EdgeList edges;
  for (NodeId i = 0; i < 10; ++i) edges.emplace_back(i, i + 1);
  std::vector<Provenance> tags(10, Provenance::kClean);
  tags[3] = Provenance::kAdversarial;
  EXPECT_DOUBLE_EQ(clean_rate(edges, edges, tags), 0.9);
  EXPECT_DOUBLE_EQ(clean_rate(EdgeList{edges[0], edges[1]}, edges, tags), 1.0);
  EXPECT_DOUBLE_EQ(clean_rate(EdgeList{edges[3]}, edges, tags), 0.0);
}

TEST(CleanRate, Errors) {
  const EdgeList edges = {{0, 1}};
  const std::vector<Provenance> tags = {Provenance::kClean};
  EXPECT_THROW(clean_rate(EdgeList{}, edges, tags), Error);
  EXPECT_THROW(clean_rate(EdgeList{{1, 2}}, edges, tags), Error);
}

TEST(CleanRate, MonotoneUnderReplacement) {
  const EdgeList edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  std::vector<Provenance> tags = {Provenance::kClean, Provenance::kAdversarial, Provenance::kAdversarial,
                                  Provenance::kClean};
  const EdgeList subset = {{0, 1}, {1, 2}, {2, 3}};
  const double before = clean_rate(subset, edges, tags);
  tags[1] = Provenance::kClean;
  EXPECT_GT(clean_rate(subset, edges, tags), before);
}

TEST(GraphBundle, ValidateRejectsOverlappingSplits) {
  auto g = make_bundle(4, {{0, 1}});
  g.splits.train = {0, 1};
  g.splits.test = {1};
  EXPECT_THROW(g.validate(), GraphError);
}

TEST(GraphBundle, ValidateRejectsUnlabeledSplitNode) {
  auto g = make_bundle(4, {{0, 1}});
  g.labels[2] = kNoLabel;
  g.splits.val = {2};
  EXPECT_THROW(g.validate(), GraphError);
}

namespace {

void write_minimal_bundle(const std::filesystem::path& dir, const std::string& edges) {
  testutil::write_text(dir / "features.csv", "node_id,f0,f1\n0,1,0\n1,0,1\n2,0.5,0.5\n3,1,1\n");
  testutil::write_text(dir / "edges.tsv", edges);
  testutil::write_text(dir / "labels.tsv", "0\t0\n1\t1\n2\t0\n3\t1\n");
  testutil::write_text(dir / "splits.json", R"({"train":[0,1],"val":[2],"test":[3]})");
}

std::string load_error(const std::filesystem::path& dir) {
  try {
    load_bundle(dir);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(BundleIo, UndirectedDuplicatesCollapse) {
  TempDir d("dup");
  write_minimal_bundle(d.path(), "0 1\n1 0\n2\t3\n");
  const auto g = load_bundle(d.path());
  EXPECT_EQ(g.edges, (EdgeList{{0, 1}, {2, 3}}));
  EXPECT_EQ(g.num_nodes, 4u);
  EXPECT_EQ(g.num_features(), 2u);
  EXPECT_EQ(g.num_classes(), 2);
}

TEST(BundleIo, SelfLoopReportsFileAndLine) {
  TempDir d("loop");
  write_minimal_bundle(d.path(), "0 1\n0 0\n");
  const auto msg = load_error(d.path());
  EXPECT_NE(msg.find("edges.tsv:2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("self-loop"), std::string::npos) << msg;
}

TEST(BundleIo, OutOfRangeEndpoint) {
  TempDir d("range");
  write_minimal_bundle(d.path(), "0 9\n");
  EXPECT_NE(load_error(d.path()).find("edges.tsv:1"), std::string::npos);
}

TEST(BundleIo, MalformedRow) {
  TempDir d("malformed");
  write_minimal_bundle(d.path(), "0 1\nzero one\n");
  EXPECT_NE(load_error(d.path()).find("edges.tsv:2"), std::string::npos);
}

TEST(BundleIo, MissingFile) {
  TempDir d("missing");
  write_minimal_bundle(d.path(), "0 1\n");
  std::filesystem::remove(d.path() / "labels.tsv");
  EXPECT_NE(load_error(d.path()).find("labels.tsv"), std::string::npos);
}

TEST(BundleIo, OverlappingSplits) {
  TempDir d("overlap");
  write_minimal_bundle(d.path(), "0 1\n");
  testutil::write_text(d.path() / "splits.json", R"({"train":[0,1],"val":[1],"test":[3]})");
  EXPECT_NE(load_error(d.path()).find("splits.json"), std::string::npos);
}

TEST(BundleIo, ProvenanceMustCoverEveryEdge) {
  TempDir d("prov");
  write_minimal_bundle(d.path(), "0 1\n1 2\n");
  testutil::write_text(d.path() / "provenance.tsv", "0\t1\tclean\n");
  EXPECT_NE(load_error(d.path()).find("provenance.tsv"), std::string::npos);
  testutil::write_text(d.path() / "provenance.tsv", "0\t1\tclean\n2\t1\tadversarial\n");
  const auto g = load_bundle(d.path());
  ASSERT_TRUE(g.provenance.has_value());
  EXPECT_EQ((*g.provenance)[1], Provenance::kAdversarial);
}

TEST(BundleIo, LoadSaveLoadIsByteStable) {
  TempDir a("stable_a"), b("stable_b");
  harness::SbmConfig cfg;
  cfg.nodes_per_block = 20;
  cfg.seed = 3;
  AttackConfig atk;
  atk.ptb_rate = 0.2;
  atk.seed = 4;
  const auto g = inject_structure_attack(harness::generate_sbm(cfg), atk);
  save_bundle(g, a.path());
  const auto loaded = load_bundle(a.path());
  EXPECT_TRUE(loaded == g);
  save_bundle(loaded, b.path());
  for (const char* f : {"edges.tsv", "features.csv", "labels.tsv", "splits.json", "provenance.tsv"})
    EXPECT_EQ(testutil::slurp(a.path() / f), testutil::slurp(b.path() / f)) << f;
  EXPECT_TRUE(load_bundle(b.path()) == loaded);
}
