#pragma once

// Node/query embeddings, cosine similarity and the path reward used by the
// tree searchers. Providers are pluggable; HashEmbedder is the offline,
// deterministic bag-of-words embedder used throughout the tests.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "relpath/common.hpp"
#include "relpath/ttg.hpp"

namespace relpath {

struct Embedding {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  friend bool operator==(const Embedding&, const Embedding&) = default;
};

// Standard cosine; 0 when either vector has zero norm.
inline double cosine_similarity(const Embedding& u, const Embedding& v) {
  if (u.dim() != v.dim())
    throw ArgumentError("dimension mismatch: " + std::to_string(u.dim()) + " vs " + std::to_string(v.dim()));
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    dot += u.values[i] * v.values[i];
    nu += u.values[i] * u.values[i];
    nv += v.values[i] * v.values[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  double s = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(s, -1.0, 1.0);
}

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual const std::string& name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual bool deterministic() const = 0;

  // Text as the provider will see it; also the cache key input.
  virtual std::string canonical(std::string_view text) const { return std::string(text); }

  // One vector per input, each of dim(). Throws ProviderError on failure.
  virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;
};

// Hashed bag of words: lowercase alphanumeric tokens hashed (FNV-1a) into
// dim buckets, counts L2-normalized. Order-insensitive and stateless.
class HashEmbedder final : public EmbeddingProvider {
 public:
  explicit HashEmbedder(std::size_t dim = 1024) : dim_(dim), name_("hash-bow-" + std::to_string(dim)) {
    if (dim == 0) throw ArgumentError("embedding dim must be positive");
  }

  const std::string& name() const override { return name_; }
  std::size_t dim() const override { return dim_; }
  bool deterministic() const override { return true; }
  std::string canonical(std::string_view text) const override { return text::normalize_whitespace_lower(text); }

  Embedding embed_one(std::string_view text) const {
    Embedding e{std::vector<double>(dim_, 0.0)};
    for (const auto& tok : text::word_tokens(text)) e.values[text::fnv1a(tok) % dim_] += 1.0;
    double norm = 0;
    for (double x : e.values) norm += x * x;
    if (norm > 0) {
      norm = std::sqrt(norm);
      for (double& x : e.values) x /= norm;
    }
    return e;
  }

  std::vector<Embedding> embed(std::span<const std::string> texts) override {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(canonical(t)));
    return out;
  }

 private:
  std::size_t dim_;
  std::string name_;
};

// Thread-safe vector cache keyed by hash(provider name, canonical text).
// Writers serialize; readers share.
class EmbeddingCache {
 public:
  static constexpr std::string_view kFormat = "relpath-embedding-cache";
  static constexpr int kVersion = 1;

  EmbeddingCache(std::string provider_name, std::size_t dim) : provider_(std::move(provider_name)), dim_(dim) {}

  static std::string key_for(std::string_view provider_name, std::string_view canonical_text) {
    auto h = text::fnv1a(provider_name);
    h = text::fnv1a("\x1f", h);
    return text::hex64(text::fnv1a(canonical_text, h));
  }

  const std::string& provider_name() const noexcept { return provider_; }
  std::size_t dim() const noexcept { return dim_; }

  std::optional<Embedding> get(const std::string& key) const {
    std::shared_lock lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& key, Embedding e) {
    if (e.dim() != dim_) throw ArgumentError("cached vector has dim " + std::to_string(e.dim()));
    std::unique_lock lock(mu_);
    entries_.insert_or_assign(key, std::move(e));
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return entries_.size();
  }

  // JSONL: header line, then one {"key","dim","values"} record per entry,
  // sorted by key.
  void save(std::ostream& out) const {
    std::shared_lock lock(mu_);
    out << nlohmann::json{{"format", kFormat}, {"version", kVersion}, {"provider", provider_}, {"dim", dim_}}.dump()
        << '\n';
    for (const auto& [key, e] : entries_)
      out << nlohmann::json{{"key", key}, {"dim", e.dim()}, {"values", e.values}}.dump() << '\n';
  }

  // Merges entries from a cache file written by save(). The header must match
  // this cache's provider and dim.
  void load(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
      ++lineno;
      if (text::trim(line).empty()) continue;
      nlohmann::json rec;
      try {
        rec = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid cache record: ") + e.what(), lineno);
      }
      if (!header) {
        if (rec.value("format", "") != kFormat || rec.value("version", 0) != kVersion)
          throw ParseError("not a version-1 embedding cache", lineno);
        if (rec.value("provider", "") != provider_ || rec.value("dim", std::size_t{0}) != dim_)
          throw ParseError("cache was written by provider '" + rec.value("provider", "") + "'", lineno);
        header = true;
        continue;
      }
      Embedding e{rec.at("values").get<std::vector<double>>()};
      if (e.dim() != rec.at("dim").get<std::size_t>() || e.dim() != dim_)
        throw ParseError("cache record dim mismatch", lineno);
      put(rec.at("key").get<std::string>(), std::move(e));
    }
  }

 private:
  std::string provider_;
  std::size_t dim_;
  mutable std::shared_mutex mu_;
  std::map<std::string, Embedding> entries_;
};

// Provider plus cache. Safe to share across worker threads when the
// underlying provider is.
class Embedder {
 public:
  explicit Embedder(std::shared_ptr<EmbeddingProvider> provider, std::shared_ptr<EmbeddingCache> cache = nullptr)
      : provider_(std::move(provider)), cache_(std::move(cache)) {
    if (!provider_) throw ArgumentError("null embedding provider");
    if (!cache_) cache_ = std::make_shared<EmbeddingCache>(provider_->name(), provider_->dim());
    if (cache_->provider_name() != provider_->name() || cache_->dim() != provider_->dim())
      throw ArgumentError("cache does not belong to provider " + provider_->name());
  }

  EmbeddingProvider& provider() const noexcept { return *provider_; }
  EmbeddingCache& cache() const noexcept { return *cache_; }
  std::size_t dim() const { return provider_->dim(); }

  std::vector<Embedding> embed_texts(std::span<const std::string> texts) {
    std::vector<Embedding> out(texts.size());
    std::vector<std::string> missing;
    // key -> (slot in `missing`, output positions); repeats in one batch are
    // sent once.
    std::map<std::string, std::pair<std::size_t, std::vector<std::size_t>>> pending;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      auto key = EmbeddingCache::key_for(provider_->name(), provider_->canonical(texts[i]));
      if (auto hit = cache_->get(key)) {
        out[i] = std::move(*hit);
        continue;
      }
      auto [it, fresh] = pending.try_emplace(std::move(key), missing.size(), std::vector<std::size_t>{});
      if (fresh) missing.push_back(texts[i]);
      it->second.second.push_back(i);
    }
    if (!missing.empty()) {
      auto fresh = provider_->embed(missing);
      if (fresh.size() != missing.size()) throw ProviderError(provider_->name() + " returned the wrong vector count");
      for (auto& [key, slot] : pending) {
        auto& v = fresh[slot.first];
        check(v);
        for (auto i : slot.second) out[i] = v;
        cache_->put(key, std::move(v));
      }
    }
    return out;
  }

  Embedding embed_text(const std::string& text) { return std::move(embed_texts(std::span(&text, 1)).front()); }

  // Bypasses the cache; for one-off texts such as whole-path verbalizations.
  Embedding embed_uncached(const std::string& text) {
    auto out = provider_->embed(std::span(&text, 1));
    if (out.size() != 1) throw ProviderError(provider_->name() + " returned the wrong vector count");
    check(out.front());
    return std::move(out.front());
  }

 private:
  void check(const Embedding& e) const {
    if (e.dim() != provider_->dim())
      throw ProviderError(provider_->name() + " returned dim " + std::to_string(e.dim()));
    for (double x : e.values)
      if (!std::isfinite(x)) throw ProviderError(provider_->name() + " returned a non-finite value");
  }

  std::shared_ptr<EmbeddingProvider> provider_;
  std::shared_ptr<EmbeddingCache> cache_;
};

// h : r : t : T(h) : T(t)
inline std::string serialize_node(const TripleNode& n) {
  std::string s;
  s.reserve(n.triple.head.size() + n.triple.relation.size() + n.triple.tail.size() + n.head_text.size() +
            n.tail_text.size() + 12);
  s.append(n.triple.head).append(" : ").append(n.triple.relation).append(" : ").append(n.triple.tail);
  s.append(" : ").append(n.head_text).append(" : ").append(n.tail_text);
  return s;
}

inline Embedding embed_node(Embedder& embedder, const TripleNode& node) {
  try {
    return embedder.embed_text(serialize_node(node));
  } catch (const ProviderError& e) {
    throw ProviderError("node " + std::to_string(node.id) + ": " + e.what());
  }
}

inline Embedding embed_query(Embedder& embedder, std::string_view query) {
  if (text::trim(query).empty()) throw ArgumentError("query must be non-empty");
  return embedder.embed_text(std::string(query));
}

enum class RewardMode {
  verbalize_then_embed,  // embed the colon-joined node serializations
  mean_pool,             // mean of the node vectors
};

inline std::string_view to_string(RewardMode m) {
  return m == RewardMode::mean_pool ? "mean-pool" : "verbalize-then-embed";
}

inline RewardMode reward_mode_from_string(std::string_view s) {
  if (s == "mean-pool") return RewardMode::mean_pool;
  if (s == "verbalize-then-embed") return RewardMode::verbalize_then_embed;
  throw ArgumentError("unknown reward mode: " + std::string(s));
}

inline double path_reward(Embedder& embedder, const Embedding& query_vec, std::span<const TripleNode* const> path,
                          RewardMode mode) {
  if (path.empty()) throw ArgumentError("path_reward needs a non-empty path");
  if (mode == RewardMode::verbalize_then_embed) {
    std::string joined;
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i) joined += " : ";
      joined += serialize_node(*path[i]);
    }
    return cosine_similarity(query_vec, embedder.embed_uncached(joined));
  }
  Embedding mean{std::vector<double>(embedder.dim(), 0.0)};
  for (const auto* n : path) {
    auto v = embed_node(embedder, *n);
    for (std::size_t i = 0; i < v.dim(); ++i) mean.values[i] += v.values[i];
  }
  for (double& x : mean.values) x /= static_cast<double>(path.size());
  return cosine_similarity(query_vec, mean);
}

// Reward functor for the searchers: path of TTG node ids -> similarity with
// the query. Memoizes per path; one instance per query (not thread-safe),
// while the shared Embedder underneath is.
class EmbeddingReward {
 public:
  EmbeddingReward(const TextualTripleGraph& ttg, Embedder& embedder, std::string_view query,
                  RewardMode mode = RewardMode::verbalize_then_embed)
      : ttg_(&ttg), embedder_(&embedder), query_vec_(embed_query(embedder, query)), mode_(mode) {}

  double operator()(std::span<const NodeId> path) const {
    std::string key(reinterpret_cast<const char*>(path.data()), path.size_bytes());
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::vector<const TripleNode*> nodes;
    nodes.reserve(path.size());
    for (NodeId id : path) nodes.push_back(&ttg_->node(id));
    double r = path_reward(*embedder_, query_vec_, nodes, mode_);
    memo_.emplace(std::move(key), r);
    return r;
  }

  const Embedding& query_vector() const noexcept { return query_vec_; }

 private:
  const TextualTripleGraph* ttg_;
  Embedder* embedder_;
  Embedding query_vec_;
  RewardMode mode_;
  mutable std::unordered_map<std::string, double> memo_;
};

}  // namespace relpath
