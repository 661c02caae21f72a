#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sggsr/graph.hpp"

namespace sggsr {

namespace fs = std::filesystem;

namespace io_detail {

[[noreturn]] inline void fail(const fs::path& file, std::size_t line, const std::string& what) {
  throw ConfigError(file.string() + ":" + std::to_string(line) + ": " + what);
}

inline std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("missing file " + p.string());
  return in;
}

inline std::ofstream open_out(const fs::path& p, bool binary = false) {
  std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ConfigError("cannot write " + p.string());
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string_view> split_char(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      auto tok = s.substr(start, i - start);
      while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.remove_suffix(1);
      while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
      out.push_back(tok);
      start = i + 1;
    }
  }
  return out;
}

template <class T>
bool parse_number(std::string_view tok, T& out) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

inline bool blank(std::string_view s) {
  for (char c : s)
    if (c != ' ' && c != '\t' && c != '\r') return false;
  return true;
}

/// Shortest representation that round-trips exactly.
inline std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace io_detail

/// Reads a whitespace-separated edge list. Endpoints are validated against
/// `num_nodes`; reversed duplicates collapse to one canonical edge.
inline EdgeList read_edge_list(const fs::path& file, std::size_t num_nodes) {
  auto in = io_detail::open_in(file);
  EdgeList edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (io_detail::blank(line) || line[0] == '#') continue;
    auto tok = io_detail::split_ws(line);
    NodeId a = 0, b = 0;
    if (tok.size() != 2 || !io_detail::parse_number(tok[0], a) || !io_detail::parse_number(tok[1], b))
      io_detail::fail(file, lineno, "expected two node ids");
    if (a >= num_nodes || b >= num_nodes) io_detail::fail(file, lineno, "endpoint out of range");
    if (a == b) io_detail::fail(file, lineno, "self-loop on node " + std::to_string(a));
    edges.emplace_back(a, b);
  }
  canonicalize(edges);
  return edges;
}

inline void write_edge_list(const fs::path& file, std::span<const Edge> edges) {
  auto out = io_detail::open_out(file);
  for (const Edge& e : edges) out << e.u << '\t' << e.v << '\n';
}

inline GraphBundle load_bundle(const fs::path& dir) {
  using namespace io_detail;
  GraphBundle g;

  // features.csv fixes N and F.
  {
    const fs::path file = dir / "features.csv";
    auto in = open_in(file);
    std::string line;
    if (!std::getline(in, line)) fail(file, 1, "missing header");
    auto header = split_char(line, ',');
    if (header.empty() || header[0] != "node_id") fail(file, 1, "header must start with node_id");
    const std::size_t f = header.size() - 1;
    std::vector<double> values;
    std::size_t lineno = 1;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (blank(line)) continue;
      auto tok = split_char(line, ',');
      if (tok.size() != f + 1) fail(file, lineno, "expected " + std::to_string(f + 1) + " columns");
      std::size_t id = 0;
      if (!parse_number(tok[0], id) || id != rows) fail(file, lineno, "node ids must be 0..N-1 in order");
      for (std::size_t c = 1; c <= f; ++c) {
        double x = 0;
        if (!parse_number(tok[c], x)) fail(file, lineno, "malformed value '" + std::string(tok[c]) + "'");
        values.push_back(x);
      }
      ++rows;
    }
    g.num_nodes = rows;
    g.features = Eigen::Map<FeatureMatrix>(values.data(), static_cast<Eigen::Index>(rows),
                                           static_cast<Eigen::Index>(f));
  }

  g.edges = read_edge_list(dir / "edges.tsv", g.num_nodes);

  g.labels.assign(g.num_nodes, kNoLabel);
  {
    const fs::path file = dir / "labels.tsv";
    auto in = open_in(file);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (blank(line)) continue;
      auto tok = split_ws(line);
      std::size_t id = 0;
      int cls = 0;
      if (tok.size() != 2 || !parse_number(tok[0], id) || !parse_number(tok[1], cls) || cls < 0)
        fail(file, lineno, "expected node_id<TAB>class");
      if (id >= g.num_nodes) fail(file, lineno, "node id out of range");
      g.labels[id] = cls;
    }
  }

  {
    const fs::path file = dir / "splits.json";
    auto in = open_in(file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      fail(file, 1, std::string("malformed json: ") + e.what());
    }
    auto read = [&](const char* key, std::vector<NodeId>& dst) {
      if (!j.contains(key) || !j[key].is_array()) fail(file, 1, std::string("missing array '") + key + "'");
      for (const auto& v : j[key]) {
        if (!v.is_number_unsigned()) fail(file, 1, std::string("non-integer id in '") + key + "'");
        dst.push_back(v.get<NodeId>());
      }
    };
    read("train", g.splits.train);
    read("val", g.splits.val);
    read("test", g.splits.test);
    try {
      GraphBundle probe;
      probe.num_nodes = g.num_nodes;
      probe.labels = g.labels;
      probe.features = FeatureMatrix(static_cast<Eigen::Index>(g.num_nodes), 0);
      probe.splits = g.splits;
      probe.validate();
    } catch (const GraphError& e) {
      fail(file, 1, e.what());
    }
  }

  const fs::path prov = dir / "provenance.tsv";
  if (fs::exists(prov)) {
    auto in = open_in(prov);
    std::vector<std::uint8_t> seen(g.edges.size(), 0);
    std::vector<Provenance> tags(g.edges.size(), Provenance::kClean);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (blank(line)) continue;
      auto tok = split_ws(line);
      NodeId a = 0, b = 0;
      if (tok.size() != 3 || !parse_number(tok[0], a) || !parse_number(tok[1], b))
        fail(prov, lineno, "expected u<TAB>v<TAB>tag");
      Provenance p;
      if (tok[2] == "clean") p = Provenance::kClean;
      else if (tok[2] == "adversarial") p = Provenance::kAdversarial;
      else fail(prov, lineno, "unknown tag '" + std::string(tok[2]) + "'");
      const Edge e(a, b);
      auto it = std::lower_bound(g.edges.begin(), g.edges.end(), e);
      if (it == g.edges.end() || *it != e) fail(prov, lineno, "tagged edge not in edges.tsv");
      const auto idx = static_cast<std::size_t>(it - g.edges.begin());
      if (seen[idx]) fail(prov, lineno, "edge tagged twice");
      seen[idx] = 1;
      tags[idx] = p;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
      if (!seen[i]) fail(prov, lineno, "edge (" + std::to_string(g.edges[i].u) + "," +
                                           std::to_string(g.edges[i].v) + ") has no tag");
    g.provenance = std::move(tags);
  }

  g.validate();
  return g;
}

/// Writes the bundle in canonical order so save/load/save is byte-stable.
inline void save_bundle(const GraphBundle& g, const fs::path& dir) {
  using namespace io_detail;
  g.validate();
  fs::create_directories(dir);
  write_edge_list(dir / "edges.tsv", g.edges);
  {
    auto out = open_out(dir / "features.csv");
    out << "node_id";
    for (std::size_t c = 0; c < g.num_features(); ++c) out << ",f" << c;
    out << '\n';
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
      out << i;
      for (std::size_t c = 0; c < g.num_features(); ++c)
        out << ',' << format_double(g.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "labels.tsv");
    for (std::size_t i = 0; i < g.num_nodes; ++i)
      if (g.labels[i] != kNoLabel) out << i << '\t' << g.labels[i] << '\n';
  }
  {
    nlohmann::json j;
    j["train"] = g.splits.train;
    j["val"] = g.splits.val;
    j["test"] = g.splits.test;
    auto out = open_out(dir / "splits.json");
    out << j.dump() << '\n';
  }
  const fs::path prov = dir / "provenance.tsv";
  if (g.provenance) {
    auto out = open_out(prov);
    for (std::size_t i = 0; i < g.edges.size(); ++i)
      out << g.edges[i].u << '\t' << g.edges[i].v << '\t' << to_string((*g.provenance)[i]) << '\n';
  } else if (fs::exists(prov)) {
    fs::remove(prov);
  }
}

}  // namespace sggsr
