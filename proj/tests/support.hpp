#pragma once

// Fixtures and independent oracles shared by the unit and acceptance tests.

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "relpath/embed.hpp"
#include "relpath/pipeline.hpp"
#include "relpath/search.hpp"
#include "relpath/synthgen.hpp"
#include "relpath/tkg.hpp"
#include "relpath/ttg.hpp"

namespace relpath::testing {

// Random graph over `entities` ids e0..e{n-1} and `relations` relation names.
// Duplicate draws are dropped by the builder, so the triple count can fall a
// little short of `triples`.
template <class Rng>
TextualKnowledgeGraph random_graph(Rng& rng, std::size_t triples, std::size_t entities, std::size_t relations,
                                   double self_loop_rate = 0.02) {
  std::uniform_int_distribution<std::size_t> pe(0, entities - 1), pr(0, relations - 1);
  std::bernoulli_distribution self(self_loop_rate);
  TkgBuilder b;
  for (std::size_t i = 0; i < triples; ++i) {
    auto h = "e" + std::to_string(pe(rng));
    auto t = self(rng) ? h : "e" + std::to_string(pe(rng));
    b.add_triple({h, "r" + std::to_string(pr(rng)), t});
  }
  return std::move(b).build();
}

// Pairwise oracle: u ~ w iff u != w and the triples share an entity.
inline std::map<NodeId, std::set<NodeId>> brute_force_adjacency(const TextualKnowledgeGraph& g) {
  std::map<NodeId, std::set<NodeId>> adj;
  for (std::size_t u = 0; u < g.triples.size(); ++u) {
    adj[static_cast<NodeId>(u)];
    const auto& a = g.triples[u];
    for (std::size_t w = 0; w < g.triples.size(); ++w) {
      if (u == w) continue;
      const auto& b = g.triples[w];
      if (a.head == b.head || a.head == b.tail || a.tail == b.head || a.tail == b.tail)
        adj[static_cast<NodeId>(u)].insert(static_cast<NodeId>(w));
    }
  }
  return adj;
}

inline std::size_t brute_force_edge_count(const std::map<NodeId, std::set<NodeId>>& adj) {
  std::size_t twice = 0;
  for (const auto& [_, s] : adj) twice += s.size();
  return twice / 2;
}

// Returns fixed vectors for known texts, zeros otherwise.
class TableEmbedder final : public EmbeddingProvider {
 public:
  TableEmbedder(std::size_t dim, std::map<std::string, std::vector<double>> table)
      : dim_(dim), table_(std::move(table)) {}

  const std::string& name() const override { return name_; }
  std::size_t dim() const override { return dim_; }
  bool deterministic() const override { return true; }

  std::vector<Embedding> embed(std::span<const std::string> texts) override {
    std::vector<Embedding> out;
    for (const auto& t : texts) {
      auto it = table_.find(t);
      out.push_back(Embedding{it == table_.end() ? std::vector<double>(dim_, 0.0) : it->second});
    }
    return out;
  }

 private:
  std::size_t dim_;
  std::map<std::string, std::vector<double>> table_;
  std::string name_ = "table";
};

// Counts provider calls; forwards to a HashEmbedder.
class CountingEmbedder final : public EmbeddingProvider {
 public:
  explicit CountingEmbedder(std::size_t dim = 64) : inner_(dim) {}

  const std::string& name() const override { return inner_.name(); }
  std::size_t dim() const override { return inner_.dim(); }
  bool deterministic() const override { return true; }
  std::string canonical(std::string_view text) const override { return inner_.canonical(text); }

  std::vector<Embedding> embed(std::span<const std::string> texts) override {
    calls += texts.size();
    return inner_.embed(texts);
  }

  std::size_t calls = 0;

 private:
  HashEmbedder inner_;
};

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::size_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("relpath-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::vector<NodeId> node_ids(const RetrievedPath& p) {
  std::vector<NodeId> out;
  for (const auto& n : p.nodes) out.push_back(n.node);
  return out;
}

}  // namespace relpath::testing
