#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "sggsr/graph.hpp"
#include "sggsr/rng.hpp"

namespace sggsr {

struct WalkCorpus {
  std::size_t num_nodes = 0;
  std::vector<std::vector<NodeId>> walks;
  std::size_t walk_length = 0;
  std::size_t walks_per_node = 0;
  double p = 1.0;
  double q = 1.0;
};

struct WalkConfig {
  double p = 1.0;
  double q = 1.0;
  std::size_t walk_length = 80;
  std::size_t walks_per_node = 10;
  std::uint64_t seed = 0;
  unsigned num_threads = 1;
};

struct SkipGramConfig {
  std::size_t dim = 128;
  std::size_t window = 10;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 0;
};

using EmbeddingStore = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EmbeddingMatrix {
  EmbeddingStore vectors;

  std::size_t num_nodes() const { return static_cast<std::size_t>(vectors.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
  std::span<const float> row(NodeId n) const {
    return {vectors.data() + static_cast<std::size_t>(n) * dim(), dim()};
  }
  bool operator==(const EmbeddingMatrix& o) const {
    return vectors.rows() == o.vectors.rows() && vectors.cols() == o.vectors.cols() && vectors == o.vectors;
  }
};

template <class A, class B>
double cosine(std::span<A> a, std::span<B> b) {
  if (a.size() != b.size())
    throw ConfigError("cosine: dimension mismatch " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

/// Normalized second-order transition distribution out of `cur` given the
/// previous node `prev`, aligned with csr.neighbors_of(cur).
inline void transition_probabilities(const Csr& csr, NodeId prev, NodeId cur, double p, double q,
                                     std::vector<double>& out) {
  auto nb = csr.neighbors_of(cur);
  out.resize(nb.size());
  double total = 0;
  for (std::size_t i = 0; i < nb.size(); ++i) {
    double w;
    if (nb[i] == prev) w = 1.0 / p;
    else if (csr.adjacent(prev, nb[i])) w = 1.0;
    else w = 1.0 / q;
    out[i] = w;
    total += w;
  }
  for (double& w : out) w /= total;
}

namespace n2v_detail {

inline std::vector<NodeId> walk_from(const Csr& csr, NodeId start, std::size_t walk_index, const WalkConfig& cfg,
                                     std::vector<double>& scratch) {
  Rng rng = make_rng(cfg.seed, {stream::kWalk, start, walk_index});
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<NodeId> walk;
  walk.reserve(cfg.walk_length);
  walk.push_back(start);
  while (walk.size() < cfg.walk_length) {
    const NodeId cur = walk.back();
    auto nb = csr.neighbors_of(cur);
    if (walk.size() == 1) {
      std::uniform_int_distribution<std::size_t> d(0, nb.size() - 1);
      walk.push_back(nb[d(rng)]);
      continue;
    }
    transition_probabilities(csr, walk[walk.size() - 2], cur, cfg.p, cfg.q, scratch);
    const double r = unif(rng);
    double acc = 0;
    std::size_t pick = nb.size() - 1;
    for (std::size_t i = 0; i < nb.size(); ++i) {
      acc += scratch[i];
      if (r < acc) {
        pick = i;
        break;
      }
    }
    walk.push_back(nb[pick]);
  }
  return walk;
}

}  // namespace n2v_detail

/// Biased second-order random walks. Each walk has its own RNG stream keyed
/// by (seed, start node, walk index), so the thread count never changes output.
inline WalkCorpus generate_walks(std::size_t num_nodes, std::span<const Edge> edges, const WalkConfig& cfg) {
  if (!(cfg.p > 0) || !(cfg.q > 0)) throw ConfigError("node2vec p and q must be > 0");
  if (cfg.walk_length < 2) throw ConfigError("walk_length must be >= 2");
  const Csr csr(num_nodes, edges);
  std::vector<NodeId> starts;
  for (NodeId n = 0; n < num_nodes; ++n)
    if (csr.degree(n) > 0) starts.push_back(n);

  WalkCorpus corpus;
  corpus.num_nodes = num_nodes;
  corpus.walk_length = cfg.walk_length;
  corpus.walks_per_node = cfg.walks_per_node;
  corpus.p = cfg.p;
  corpus.q = cfg.q;
  const std::size_t total = starts.size() * cfg.walks_per_node;
  corpus.walks.resize(total);

  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> scratch;
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t w = k / starts.size();
      const NodeId start = starts[k % starts.size()];
      corpus.walks[k] = n2v_detail::walk_from(csr, start, w, cfg, scratch);
    }
  };
  const unsigned threads = std::max(1u, cfg.num_threads);
  if (threads == 1 || total < 2) {
    work(0, total);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (total + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(total, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  return corpus;
}

inline WalkCorpus generate_walks(const GraphBundle& g, const WalkConfig& cfg) {
  return generate_walks(g.num_nodes, g.edges, cfg);
}

template <class T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

/// Negative-sampling objective for one (center, context) pair:
/// -log s(u.v) - sum_k log s(-u.n_k).
template <class T>
T sgns_loss(std::span<const T> center, std::span<const T> context, std::span<const std::span<const T>> negatives) {
  auto dot = [](std::span<const T> a, std::span<const T> b) {
    T s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  T loss = -std::log(sigmoid(dot(center, context)));
  for (auto n : negatives) loss -= std::log(sigmoid(-dot(center, n)));
  return loss;
}

/// One SGD step on sgns_loss. Output-side gradients use the pre-update
/// center vector.
template <class T>
void sgns_step(std::span<T> center, std::span<T> context, std::span<const std::span<T>> negatives, T lr,
               std::vector<T>& center_grad) {
  using Vec = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
  const auto d = static_cast<Eigen::Index>(center.size());
  center_grad.assign(center.size(), T(0));
  Vec u(center.data(), d), acc(center_grad.data(), d);
  auto apply = [&](std::span<T> out, T label) {
    Vec o(out.data(), d);
    const T g = lr * (label - sigmoid(u.dot(o)));
    acc += g * o;
    o += g * u;
  };
  apply(context, T(1));
  for (auto n : negatives) apply(n, T(0));
  u += acc;
}

/// Skip-gram with negative sampling over a walk corpus. Negatives follow the
/// corpus unigram distribution raised to 3/4 (for random walks on undirected
/// graphs corpus frequency tracks degree).
inline EmbeddingMatrix train_skipgram(const WalkCorpus& corpus, const SkipGramConfig& cfg) {
  if (cfg.dim == 0) throw ConfigError("embedding dim must be >= 1");
  const std::size_t n = corpus.num_nodes;
  const std::size_t d = cfg.dim;
  EmbeddingMatrix emb;
  emb.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  {
    Rng init = make_rng(cfg.seed, {stream::kSkipGram, 0});
    std::uniform_real_distribution<float> u(-0.5f / static_cast<float>(d), 0.5f / static_cast<float>(d));
    for (Eigen::Index i = 0; i < emb.vectors.size(); ++i) emb.vectors.data()[i] = u(init);
  }
  if (cfg.epochs == 0 || corpus.walks.empty()) return emb;

  EmbeddingStore ctx = EmbeddingStore::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<double> freq(n, 0.0);
  std::size_t tokens = 0;
  for (const auto& w : corpus.walks) {
    for (NodeId v : w) freq[v] += 1.0;
    tokens += w.size();
  }
  double mass = 0;
  for (double& f : freq) mass += (f = std::pow(f, 0.75));
  // Noise table: node v fills a share of slots proportional to freq[v].
  std::vector<NodeId> table;
  const std::size_t slots = std::max<std::size_t>(std::size_t{1} << 20, 64 * n);
  table.reserve(slots);
  double cum = 0;
  for (NodeId v = 0; v < n; ++v) {
    cum += freq[v];
    const auto end = static_cast<std::size_t>(std::llround(cum / mass * static_cast<double>(slots)));
    while (table.size() < end) table.push_back(v);
  }
  std::uniform_int_distribution<std::size_t> pick(0, table.size() - 1);
  auto unigram = [&](Rng& r) { return table[pick(r)]; };

  Rng rng = make_rng(cfg.seed, {stream::kSkipGram, 1});
  auto row = [d](EmbeddingStore& m, NodeId i) { return std::span<float>(m.data() + std::size_t{i} * d, d); };
  std::vector<std::span<float>> negs;
  std::vector<float> grad;
  const double total = static_cast<double>(cfg.epochs * tokens);
  std::size_t processed = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& walk : corpus.walks) {
      for (std::size_t pos = 0; pos < walk.size(); ++pos, ++processed) {
        const float lr =
            static_cast<float>(cfg.learning_rate * std::max(1e-4, 1.0 - static_cast<double>(processed) / total));
        const std::size_t lo = pos > cfg.window ? pos - cfg.window : 0;
        const std::size_t hi = std::min(walk.size() - 1, pos + cfg.window);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          const NodeId target = walk[c];
          negs.clear();
          for (std::size_t k = 0; k < cfg.negatives; ++k) {
            const NodeId neg = unigram(rng);
            if (neg != target) negs.push_back(row(ctx, neg));
          }
          sgns_step<float>(row(emb.vectors, walk[pos]), row(ctx, target), negs, lr, grad);
        }
      }
    }
  }
  return emb;
}

inline constexpr char kEmbeddingMagic[8] = {'S', 'G', 'N', '2', 'V', 'F', '3', '2'};

/// Little-endian float32 rows after a 16-byte header (8-byte magic, u32 N, u32 dim).
inline void write_embeddings(const EmbeddingMatrix& emb, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + file.string());
  auto put_u32 = [&](std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  out.write(kEmbeddingMagic, 8);
  put_u32(static_cast<std::uint32_t>(emb.num_nodes()));
  put_u32(static_cast<std::uint32_t>(emb.dim()));
  for (Eigen::Index i = 0; i < emb.vectors.size(); ++i) {
    std::uint32_t bits;
    const float x = emb.vectors.data()[i];
    std::memcpy(&bits, &x, 4);
    put_u32(bits);
  }
}

inline EmbeddingMatrix read_embeddings(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("missing file " + file.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kEmbeddingMagic, 8) != 0)
    throw ConfigError(file.string() + ": bad embedding header");
  auto get_u32 = [&]() {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw ConfigError(file.string() + ": truncated");
    return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
  };
  const std::uint32_t n = get_u32();
  const std::uint32_t d = get_u32();
  EmbeddingMatrix emb;
  emb.vectors.resize(n, d);
  for (Eigen::Index i = 0; i < emb.vectors.size(); ++i) {
    const std::uint32_t bits = get_u32();
    std::memcpy(emb.vectors.data() + i, &bits, 4);
  }
  return emb;
}

}  // namespace sggsr
