#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"

using namespace relpath;
using namespace relpath::testing;

namespace {

TextualKnowledgeGraph from_tsv(const std::string& triples, const std::string& descriptions = {}) {
  std::istringstream t(triples), d(descriptions);
  return load_tkg(t, descriptions.empty() ? nullptr : &d);
}

}  // namespace

TEST(LoadTkg, TwoTriplesOneDocument) {
  auto g = from_tsv("A\tr1\tB\nB\tr2\tC\n", R"({"entity": "A", "text": "dA"})"
                                            "\n");
  EXPECT_EQ(g.entities.size(), 3u);
  EXPECT_EQ(g.triples.size(), 2u);
  EXPECT_EQ(g.documents.size(), 1u);
  EXPECT_EQ(g.document("A"), "dA");
  EXPECT_EQ(g.document("B"), "");
  EXPECT_EQ(g.relations, (std::set<std::string>{"r1", "r2"}));
  EXPECT_EQ(g.etype("A"), "");
}

TEST(LoadTkg, DuplicateTripleKeptOnce) {
  auto g = from_tsv("A\tr\tB\nA\tr\tB\n");
  EXPECT_EQ(g.triples.size(), 1u);
}

TEST(LoadTkg, CommentsBlankLinesTypesAndCrlf) {
  auto g = from_tsv("# header\n\nA\tr\tB\tGene|Disease\r\nB\ts\tC\n");
  ASSERT_EQ(g.triples.size(), 2u);
  EXPECT_EQ(g.etype("A"), "Gene");
  EXPECT_EQ(g.etype("B"), "Disease");
  EXPECT_EQ(g.triples[0].tail, "B");
}

TEST(LoadTkg, MalformedLineReportsLineNumber) {
  try {
    from_tsv("A\tr\tB\nA\tr\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(from_tsv("A\tr\tB\tGene\n"), ParseError);
}

TEST(LoadTkg, EmptyIdIsRejectedRecord) {
  try {
    from_tsv("A\tr\tB\n\tr\tC\n");
    FAIL() << "expected a rejected record";
  } catch (const RejectedRecordError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(from_tsv("A\t\tB\n"), RejectedRecordError);
}

TEST(LoadTkg, BadDescriptionRecords) {
  EXPECT_THROW(from_tsv("A\tr\tB\n", "{not json}\n"), ParseError);
  EXPECT_THROW(from_tsv("A\tr\tB\n", R"({"entity": "A"})"
                                     "\n"),
               ParseError);
  try {
    from_tsv("A\tr\tB\n", R"({"entity": "A", "text": "x"})"
                          "\n"
                          R"({"entity": 3, "text": "x"})"
                          "\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadTkg, MissingFileIsInputError) {
  EXPECT_THROW(load_tkg_files("/nonexistent/triples.tsv"), InputError);
}

TEST(LoadTkg, WriteReadRoundTrip) {
  auto g = from_tsv("A\tr\tB\tGene|Chemical\nB\ts\tC\tChemical|Disease\n", R"({"entity": "C", "text": "dc"})"
                                                                          "\n");
  std::ostringstream t, d;
  write_triples(t, g);
  write_descriptions(d, g);
  auto h = from_tsv(t.str(), d.str());
  EXPECT_EQ(h.triples, g.triples);
  EXPECT_EQ(h.documents, g.documents);
  EXPECT_EQ(h.etype("C"), "Disease");
}

// Half a million unique triples over 29 relations and 3 entity types.
TEST(LoadTkg, PharmKgScaleInput) {
  constexpr std::size_t kTriples = 500958, kEntities = 8400, kRelations = 29;
  static const char* types[] = {"Gene", "Chemical", "Disease"};
  std::string tsv;
  tsv.reserve(kTriples * 36);
  for (std::size_t i = 0; i < kTriples; ++i) {
    std::size_t h = i / 60, t = (h + 1 + i % 60) % kEntities;
    tsv += "E" + std::to_string(h) + "\tR" + std::to_string(i % kRelations) + "\tE" + std::to_string(t) + "\t" +
           types[h % 3] + "|" + types[t % 3] + "\n";
  }
  auto g = from_tsv(tsv);
  EXPECT_EQ(g.triples.size(), kTriples);
  auto rep = validate(g);
  EXPECT_EQ(rep.relation_vocabulary_size, kRelations);
  EXPECT_EQ(rep.entity_type_count, 3u);
  EXPECT_TRUE(rep.ok());
}

TEST(BuildTtg, SharedEntityGivesOneEdge) {
  auto ttg = build_ttg(from_tsv("A\tr\tB\nB\tr\tC\n"));
  EXPECT_EQ(ttg.size(), 2u);
  EXPECT_EQ(ttg.edge_count(), 1u);
  auto adj = ttg.materialize_adjacency();
  EXPECT_EQ(adj[0], std::set<NodeId>{1});
  EXPECT_EQ(adj[1], std::set<NodeId>{0});
}

TEST(BuildTtg, DisjointTriplesHaveNoEdges) {
  auto ttg = build_ttg(from_tsv("A\tr\tB\nC\tr\tD\n"));
  EXPECT_EQ(ttg.size(), 2u);
  EXPECT_EQ(ttg.edge_count(), 0u);
  EXPECT_TRUE(ttg.neighbors(0).empty());
}

TEST(BuildTtg, NodeTextsAreDocumentsVerbatim) {
  auto ttg = build_ttg(from_tsv("A\tr\tB\n", R"({"entity": "B", "text": "  Bee doc. "})"
                                             "\n"));
  EXPECT_EQ(ttg.node(0).head_text, "");
  EXPECT_EQ(ttg.node(0).tail_text, "  Bee doc. ");
  EXPECT_EQ(ttg.node(0).id, 0u);
}

TEST(BuildTtg, SelfRelationHasNoSelfAdjacency) {
  auto ttg = build_ttg(from_tsv("A\tr\tA\nA\ts\tB\n"));
  EXPECT_EQ(ttg.neighbors(0), std::vector<NodeId>{1});
  EXPECT_EQ(ttg.neighbors(1), std::vector<NodeId>{0});
  EXPECT_EQ(ttg.edge_count(), 1u);
}

TEST(BuildTtg, ParallelTriplesCountOnce) {
  auto ttg = build_ttg(from_tsv("A\tr\tB\nA\ts\tB\nB\tt\tA\n"));
  EXPECT_EQ(ttg.edge_count(), 3u);
}

TEST(BuildTtg, TailToHeadRule) {
  auto g = from_tsv("A\tr\tB\nB\tr\tC\nA\tr\tD\n");
  auto ttg = build_ttg(g, EdgeRule::tail_to_head);
  EXPECT_TRUE(ttg.adjacent(0, 1));
  EXPECT_FALSE(ttg.adjacent(0, 2));  // share A, but both as head
  EXPECT_EQ(ttg.edge_count(), 1u);
}

TEST(BuildTtg, RandomGraphsMatchBruteForce) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 10; ++i) {
    auto g = random_graph(rng, 200, 60, 5);
    auto ttg = build_ttg(g);
    auto oracle = brute_force_adjacency(g);
    EXPECT_EQ(ttg.materialize_adjacency(), oracle);
    EXPECT_EQ(ttg.edge_count(), brute_force_edge_count(oracle));
  }
}

TEST(BuildTtg, AdjacencyIsSymmetricWithoutSelfLoops) {
  std::mt19937_64 rng(7);
  auto ttg = build_ttg(random_graph(rng, 300, 80, 4, 0.1));
  auto adj = ttg.materialize_adjacency();
  for (const auto& [u, ws] : adj) {
    EXPECT_FALSE(ws.count(u));
    for (auto w : ws) EXPECT_TRUE(adj[w].count(u));
  }
}

TEST(BuildTtg, Deterministic) {
  std::mt19937_64 a(3), b(3);
  auto x = build_ttg(random_graph(a, 150, 40, 3));
  auto y = build_ttg(random_graph(b, 150, 40, 3));
  ASSERT_EQ(x.size(), y.size());
  for (NodeId i = 0; i < x.size(); ++i) EXPECT_EQ(x.node(i).triple, y.node(i).triple);
  EXPECT_EQ(x.materialize_adjacency(), y.materialize_adjacency());
}

TEST(IncidentNodes, Examples) {
  auto ttg = build_ttg(from_tsv("A\tr\tB\nB\tr\tC\n"));
  EXPECT_EQ(incident_nodes(ttg, "B"), (std::vector<NodeId>{0, 1}));
  EXPECT_TRUE(incident_nodes(ttg, "Z").empty());
}

TEST(IncidentNodes, RandomGraphMatchesLinearScan) {
  std::mt19937_64 rng(11);
  auto g = random_graph(rng, 250, 50, 4);
  auto ttg = build_ttg(g);
  for (const auto& [id, _] : g.entities) {
    std::vector<NodeId> scan;
    for (std::size_t i = 0; i < g.triples.size(); ++i)
      if (g.triples[i].contains(id)) scan.push_back(static_cast<NodeId>(i));
    EXPECT_EQ(incident_nodes(ttg, id), scan) << id;
  }
}

TEST(Validate, CoverageRatio) {
  auto g = from_tsv("A\tr\tB\nB\tr\tC\n", R"({"entity": "A", "text": "x"})"
                                          "\n");
  auto rep = validate(g);
  EXPECT_NEAR(rep.coverage, 1.0 / 3.0, 1e-12);
  EXPECT_EQ(rep.entities_without_document, (std::vector<EntityId>{"B", "C"}));
  EXPECT_EQ(rep.relation_vocabulary_size, 1u);
}

TEST(Validate, DanglingDocumentKey) {
  auto g = from_tsv("A\tr\tB\n", R"({"entity": "Q", "text": "x"})"
                                 "\n");
  auto rep = validate(g);
  EXPECT_EQ(rep.dangling_document_keys, std::vector<std::string>{"Q"});
  EXPECT_FALSE(rep.ok());
  EXPECT_TRUE(g.documents.empty());
}

// 9561 of 10000 entities described.
TEST(Validate, PharmKgCoverageRatio) {
  TkgBuilder b;
  for (int i = 0; i < 10000; ++i) {
    auto e = "E" + std::to_string(i);
    b.add_triple({e, "r", "E" + std::to_string((i + 1) % 10000)});
    if (i < 9561) b.add_document(e, "doc");
  }
  auto rep = validate(std::move(b).build());
  EXPECT_EQ(rep.entity_count, 10000u);
  EXPECT_NEAR(rep.coverage, 0.9561, 1e-12);
}
