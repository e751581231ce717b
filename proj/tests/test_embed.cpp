#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "support.hpp"

using namespace relpath;
using namespace relpath::testing;

namespace {

Embedding vec(std::vector<double> v) { return Embedding{std::move(v)}; }

class FailingEmbedder final : public EmbeddingProvider {
 public:
  const std::string& name() const override { return name_; }
  std::size_t dim() const override { return 4; }
  bool deterministic() const override { return true; }
  std::vector<Embedding> embed(std::span<const std::string>) override { throw ProviderError("service down"); }

 private:
  std::string name_ = "failing";
};

TextualTripleGraph small_ttg() {
  TkgBuilder b;
  b.add_triple({"A", "r", "B"});
  b.add_triple({"B", "s", "C"});
  b.add_triple({"A", "r", "D"});
  b.add_document("B", "bee");
  b.add_document("C", "sea");
  b.add_document("D", "dee");
  return build_ttg(std::move(b).build());
}

}  // namespace

TEST(Cosine, Examples) {
  EXPECT_DOUBLE_EQ(cosine_similarity(vec({3, 4}), vec({3, 4})), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(vec({1, 0}), vec({0, 1})), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(vec({1, 1}), vec({-1, -1})), -1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(vec({0, 0}), vec({1, 2})), 0.0);
  EXPECT_THROW(cosine_similarity(vec({1, 0}), vec({1, 0, 0})), ArgumentError);
}

TEST(Cosine, SymmetricBoundedAndScaleInvariant) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int i = 0; i < 500; ++i) {
    Embedding u{std::vector<double>(8)}, v{std::vector<double>(8)};
    for (auto& x : u.values) x = n(rng);
    for (auto& x : v.values) x = n(rng);
    double s = cosine_similarity(u, v);
    EXPECT_EQ(s, cosine_similarity(v, u));
    EXPECT_LE(std::abs(s), 1.0 + 1e-9);
    Embedding w = u;
    double a = scale(rng);
    for (auto& x : w.values) x *= a;
    EXPECT_NEAR(cosine_similarity(w, v), s, 1e-9);
  }
}

TEST(HashEmbedder, NormalizedDeterministicAndSized) {
  HashEmbedder h(256);
  auto a = h.embed_one("What does Fetal Distress affect?");
  auto b = h.embed_one("What does Fetal Distress affect?");
  EXPECT_EQ(a.dim(), 256u);
  EXPECT_EQ(a, b);
  double norm = 0;
  for (double x : a.values) {
    EXPECT_TRUE(std::isfinite(x));
    norm += x * x;
  }
  EXPECT_NEAR(norm, 1.0, 1e-12);
}

TEST(HashEmbedder, CountsTokens) {
  HashEmbedder h(64);
  // "a a b" -> counts (2, 1) before normalization, so cos with "a" is 2/sqrt(5).
  EXPECT_NEAR(cosine_similarity(h.embed_one("a a b"), h.embed_one("a")), 2.0 / std::sqrt(5.0), 1e-12);
  EXPECT_DOUBLE_EQ(cosine_similarity(h.embed_one("Gene, gene"), h.embed_one("GENE")), 1.0);
  auto empty = h.embed_one("  ");
  for (double x : empty.values) EXPECT_EQ(x, 0.0);
}

TEST(EmbedQuery, WhitespacePaddingNormalizesAway) {
  Embedder e(std::make_shared<HashEmbedder>(128));
  auto a = embed_query(e, "What does Fetal Distress affect?");
  auto b = embed_query(e, "  What   does Fetal\tDistress affect?  ");
  EXPECT_EQ(a.dim(), 128u);
  EXPECT_EQ(a, b);
  EXPECT_THROW(embed_query(e, ""), ArgumentError);
  EXPECT_THROW(embed_query(e, "   "), ArgumentError);
}

TEST(EmbedNode, SerializationAndSensitivity) {
  auto ttg = small_ttg();
  EXPECT_EQ(serialize_node(ttg.node(0)), "A : r : B :  : bee");
  Embedder e(std::make_shared<HashEmbedder>(256));
  auto x = embed_node(e, ttg.node(0));
  EXPECT_EQ(x, embed_node(e, ttg.node(0)));

  TripleNode other = ttg.node(0);
  other.tail_text = "different words";
  EXPECT_NE(embed_node(e, other), x);

  TripleNode bare{9, Triple{"P", "q", "R"}, {}, {}};
  auto v = embed_node(e, bare);
  EXPECT_EQ(v.dim(), 256u);
  for (double z : v.values) EXPECT_TRUE(std::isfinite(z));
}

TEST(EmbedNode, ProviderFailureNamesNode) {
  auto ttg = small_ttg();
  Embedder e(std::make_shared<FailingEmbedder>());
  try {
    embed_node(e, ttg.node(2));
    FAIL();
  } catch (const ProviderError& err) {
    EXPECT_NE(std::string(err.what()).find("node 2"), std::string::npos);
  }
}

TEST(Cache, HitsSkipTheProviderAndMatchColdResults) {
  auto counting = std::make_shared<CountingEmbedder>(32);
  Embedder warm(counting);
  std::vector<std::string> texts{"alpha beta", "gamma", "alpha  BETA"};
  auto first = warm.embed_texts(texts);
  EXPECT_EQ(counting->calls, 2u);  // third text canonicalizes to the first
  auto second = warm.embed_texts(texts);
  EXPECT_EQ(counting->calls, 2u);
  EXPECT_EQ(first, second);

  Embedder cold(std::make_shared<HashEmbedder>(32));
  EXPECT_EQ(cold.embed_texts(texts), first);
}

TEST(Cache, SaveLoadRoundTrip) {
  auto provider = std::make_shared<HashEmbedder>(16);
  Embedder e(provider);
  e.embed_text("one two");
  e.embed_text("three");
  std::stringstream buf;
  e.cache().save(buf);

  auto cache = std::make_shared<EmbeddingCache>(provider->name(), 16);
  cache->load(buf);
  EXPECT_EQ(cache->size(), 2u);
  auto key = EmbeddingCache::key_for(provider->name(), provider->canonical("one two"));
  ASSERT_TRUE(cache->get(key));
  EXPECT_EQ(*cache->get(key), provider->embed_one("one two"));

  std::stringstream again;
  cache->save(again);
  std::stringstream orig;
  e.cache().save(orig);
  EXPECT_EQ(again.str(), orig.str());
}

TEST(Cache, RejectsForeignOrMalformedFiles) {
  EmbeddingCache c("hash-bow-16", 16);
  std::stringstream wrong_provider(R"({"format":"relpath-embedding-cache","version":1,"provider":"x","dim":16})"
                                   "\n");
  EXPECT_THROW(c.load(wrong_provider), ParseError);
  std::stringstream wrong_version(R"({"format":"relpath-embedding-cache","version":2,"provider":"hash-bow-16","dim":16})"
                                  "\n");
  EXPECT_THROW(c.load(wrong_version), ParseError);
  std::stringstream bad_dim(R"({"format":"relpath-embedding-cache","version":1,"provider":"hash-bow-16","dim":16})"
                            "\n"
                            R"({"key":"k","dim":2,"values":[1,2]})"
                            "\n");
  EXPECT_THROW(c.load(bad_dim), ParseError);
  EXPECT_THROW(c.put("k", vec({1, 2})), ArgumentError);
  EXPECT_THROW(Embedder(std::make_shared<HashEmbedder>(8), std::make_shared<EmbeddingCache>("hash-bow-16", 16)),
               ArgumentError);
}

TEST(Cache, KeyDependsOnProviderAndText) {
  EXPECT_NE(EmbeddingCache::key_for("a", "text"), EmbeddingCache::key_for("b", "text"));
  EXPECT_NE(EmbeddingCache::key_for("a", "text"), EmbeddingCache::key_for("a", "texts"));
  EXPECT_EQ(EmbeddingCache::key_for("a", "text"), EmbeddingCache::key_for("a", "text"));
}

TEST(Cache, ConcurrentWorkersAgree) {
  Embedder e(std::make_shared<HashEmbedder>(64));
  std::vector<std::string> texts;
  for (int i = 0; i < 200; ++i) texts.push_back("text " + std::to_string(i % 50));
  std::vector<std::vector<Embedding>> results(4);
  std::vector<std::thread> pool;
  for (int w = 0; w < 4; ++w) pool.emplace_back([&, w] { results[w] = e.embed_texts(texts); });
  for (auto& t : pool) t.join();
  for (int w = 1; w < 4; ++w) EXPECT_EQ(results[w], results[0]);
  EXPECT_EQ(e.cache().size(), 50u);
}

TEST(PathReward, MeanPoolSingleNodeAndCopies) {
  auto ttg = small_ttg();
  Embedder e(std::make_shared<HashEmbedder>(128));
  auto q = embed_query(e, "A r B bee");
  const TripleNode* n0 = &ttg.node(0);
  double single = path_reward(e, q, std::vector{n0}, RewardMode::mean_pool);
  EXPECT_NEAR(single, cosine_similarity(q, embed_node(e, *n0)), 1e-12);
  for (std::size_t k = 2; k <= 5; ++k) {
    std::vector<const TripleNode*> copies(k, n0);
    EXPECT_NEAR(path_reward(e, q, copies, RewardMode::mean_pool), single, 1e-12);
  }
}

TEST(PathReward, MeanPoolHandComputed) {
  auto ttg = small_ttg();
  auto s0 = serialize_node(ttg.node(0)), s1 = serialize_node(ttg.node(1));
  Embedder e(std::make_shared<TableEmbedder>(
      3, std::map<std::string, std::vector<double>>{{s0, {1, 0, 0}}, {s1, {0, 1, 1}}, {"q", {1, 0, 0}}}));
  auto q = embed_query(e, "q");
  // mean (0.5, 0.5, 0.5); cos with (1,0,0) = 0.5 / sqrt(0.75) = 1/sqrt(3)
  double r = path_reward(e, q, std::vector{&ttg.node(0), &ttg.node(1)}, RewardMode::mean_pool);
  EXPECT_NEAR(r, 1.0 / std::sqrt(3.0), 1e-12);
}

TEST(PathReward, VerbalizeJoinsSerializations) {
  auto ttg = small_ttg();
  Embedder e(std::make_shared<HashEmbedder>(256));
  auto q = embed_query(e, "A s C sea");
  auto joined = serialize_node(ttg.node(0)) + " : " + serialize_node(ttg.node(1));
  double r = path_reward(e, q, std::vector{&ttg.node(0), &ttg.node(1)}, RewardMode::verbalize_then_embed);
  EXPECT_NEAR(r, cosine_similarity(q, HashEmbedder(256).embed_one(joined)), 1e-12);
  EXPECT_THROW(path_reward(e, q, std::vector<const TripleNode*>{}, RewardMode::mean_pool), ArgumentError);
}

TEST(PathReward, FunctorMemoizesAndMatches) {
  auto ttg = small_ttg();
  Embedder e(std::make_shared<HashEmbedder>(256));
  EmbeddingReward reward(ttg, e, "A r B bee", RewardMode::mean_pool);
  std::vector<NodeId> path{0, 1};
  double a = reward(path);
  EXPECT_EQ(a, reward(path));
  EXPECT_NEAR(a, path_reward(e, reward.query_vector(), std::vector{&ttg.node(0), &ttg.node(1)}, RewardMode::mean_pool),
              1e-12);
  EXPECT_EQ(reward_mode_from_string("mean-pool"), RewardMode::mean_pool);
  EXPECT_EQ(to_string(RewardMode::verbalize_then_embed), "verbalize-then-embed");
  EXPECT_THROW(reward_mode_from_string("concat"), ArgumentError);
}
