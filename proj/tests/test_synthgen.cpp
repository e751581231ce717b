#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "support.hpp"

using namespace relpath;
using namespace relpath::testing;

namespace {

RelationalTemplate tpl(StructureKind kind, std::vector<std::string> rels, std::vector<std::string> types) {
  RelationalTemplate t{"t", TopologicalStructure::of(kind), std::move(rels), std::move(types)};
  t.check();
  return t;
}

std::string graph_bytes(const TextualKnowledgeGraph& g) {
  std::ostringstream out;
  write_triples(out, g);
  write_descriptions(out, g);
  return out.str();
}

bool has_word(std::string_view doc, const std::string& kw) {
  for (const auto& t : text::word_tokens(doc))
    if (t == kw) return true;
  return false;
}

}  // namespace

TEST(Structures, ShapesAndChecks) {
  EXPECT_EQ(TopologicalStructure::of(StructureKind::chain3).hop_count, 3u);
  EXPECT_EQ(TopologicalStructure::of(StructureKind::chain2_constraint).constraint_positions,
            std::vector<std::size_t>{1});
  EXPECT_EQ(structure_from_string("CHAIN3_CONSTRAINT"), StructureKind::chain3_constraint);
  EXPECT_THROW(structure_from_string("CHAIN4"), ArgumentError);
  TopologicalStructure bad{StructureKind::chain2, 2, {2}};
  EXPECT_THROW(bad.check(), TemplateError);
  EXPECT_THROW(tpl(StructureKind::chain2, {"r"}, {"*", "*", "*"}), TemplateError);
}

TEST(Instantiate, Chain1OverTwoTriples) {
  TkgBuilder b;
  b.add_triple({"A", "r", "B"});
  b.add_triple({"C", "s", "D"});
  auto g = std::move(b).build();
  std::mt19937_64 rng(1);
  auto bindings = instantiate_template(g, tpl(StructureKind::chain1, {"r"}, {"*", "*"}), rng);
  ASSERT_EQ(bindings.size(), 1u);
  EXPECT_EQ(bindings[0].chain, (std::vector<EntityId>{"A", "B"}));
  EXPECT_THROW(instantiate_template(g, tpl(StructureKind::chain1, {"missing"}, {"*", "*"}), rng), TemplateError);
}

TEST(Instantiate, Chain2MatchesDoubleLoopJoin) {
  std::mt19937_64 rng(21);
  for (int round = 0; round < 5; ++round) {
    auto g = random_graph(rng, 50, 15, 2);
    auto t = tpl(StructureKind::chain2, {"r0", "r1"}, {"*", "*", "*"});
    std::set<std::tuple<std::string, std::string, std::string>> oracle;
    for (const auto& a : g.triples)
      for (const auto& c : g.triples)
        if (a.relation == "r0" && c.relation == "r1" && a.tail == c.head && a.head != a.tail && c.tail != a.head &&
            c.tail != a.tail)
          oracle.insert({a.head, a.tail, c.tail});
    std::set<std::tuple<std::string, std::string, std::string>> got;
    for (const auto& bnd : instantiate_template(g, t, rng)) got.insert({bnd.chain[0], bnd.chain[1], bnd.chain[2]});
    EXPECT_EQ(got, oracle);
  }
}

TEST(Instantiate, TypesAndConstraintsRespected) {
  TkgBuilder b;
  b.add_triple({"G1", "r", "C1"}, "Gene", "Chemical");
  b.add_triple({"G1", "r", "D1"}, "Gene", "Disease");
  b.add_triple({"C1", "s", "D2"}, "Chemical", "Disease");
  b.add_triple({"C1", "q", "G2"}, "Chemical", "Gene");
  b.add_triple({"G1", "u", "C1"});
  auto g = std::move(b).build();
  std::mt19937_64 rng(0);
  auto c2c = tpl(StructureKind::chain2_constraint, {"r", "s", "q"}, {"Gene", "Chemical", "Disease", "Gene"});
  auto bindings = instantiate_template(g, c2c, rng);
  ASSERT_EQ(bindings.size(), 1u);
  EXPECT_EQ(bindings[0].chain, (std::vector<EntityId>{"G1", "C1", "D2"}));
  EXPECT_EQ(bindings[0].constraints, std::vector<EntityId>{"G2"});
  auto steps = binding_steps(c2c, bindings[0]);
  ASSERT_EQ(steps.size(), 3u);
  EXPECT_EQ(steps[2].triple, (Triple{"C1", "q", "G2"}));
  EXPECT_EQ(steps[2].level, 2u);
  EXPECT_TRUE(steps[2].branch);

  auto inter = tpl(StructureKind::intersection, {"r", "u"}, {"Gene", "Chemical"});
  auto ib = instantiate_template(g, inter, rng);
  ASSERT_EQ(ib.size(), 1u);
  EXPECT_EQ(ib[0].answer(), "C1");
}

TEST(BruteForce, FilterSemantics) {
  TkgBuilder b;
  b.add_triple({"T", "r", "X"});
  b.add_triple({"T", "r", "Y"});
  b.add_triple({"U", "r", "Z"});
  b.add_document("X", "Shiny red thing.");
  b.add_document("Y", "Dull thing, shinyish.");
  auto g = std::move(b).build();
  auto t = tpl(StructureKind::chain1, {"r"}, {"*", "*"});
  EXPECT_EQ(brute_force_answers(g, t, "U"), std::vector<EntityId>{"Z"});
  EXPECT_EQ(brute_force_answers(g, t, "T"), (std::vector<EntityId>{"X", "Y"}));
  EXPECT_EQ(brute_force_answers(g, t, "T", keyword_filter("SHINY")), std::vector<EntityId>{"X"});
  EXPECT_TRUE(brute_force_answers(g, t, "nobody").empty());
}

TEST(BruteForce, FilteredEqualsUnfilteredIntersectScan) {
  std::mt19937_64 rng(4);
  for (int round = 0; round < 5; ++round) {
    auto base = random_graph(rng, 120, 30, 3);
    TkgBuilder b;
    append_graph(b, base);
    std::bernoulli_distribution half(0.5);
    for (const auto& [id, _] : base.entities) b.add_document(id, half(rng) ? "has keyword zed" : "plain");
    auto g = std::move(b).build();
    auto t = tpl(StructureKind::chain2, {"r0", "r1"}, {"*", "*", "*"});
    for (const auto& [topic, _] : g.entities) {
      auto all = brute_force_answers(g, t, topic);
      std::vector<EntityId> scan;
      for (const auto& a : all)
        if (g.document(a).find("zed") != std::string_view::npos) scan.push_back(a);
      EXPECT_EQ(brute_force_answers(g, t, topic, keyword_filter("zed")), scan);
    }
  }
}

TEST(KeywordFilter, WholeWordCaseInsensitive) {
  auto f = keyword_filter(" Kelo ");
  EXPECT_TRUE(f("the KELO compound."));
  EXPECT_FALSE(f("kelovan"));
  EXPECT_FALSE(f(""));
}

TEST(PlantQuery, Chain2WithoutDistractors) {
  std::mt19937_64 rng(5);
  auto [g, pq] = plant_query(TopologicalStructure::of(StructureKind::chain2), 0, rng);
  EXPECT_EQ(g.triples.size(), 2u);
  EXPECT_EQ(pq.record.gold_answers, std::vector<EntityId>{pq.gold_path.terminal_entities.at(0)});
  EXPECT_EQ(pq.gold_path.hop_count, 2u);
  EXPECT_EQ(pq.record.structure, "CHAIN2");
}

TEST(PlantQuery, EveryShapeIsUniqueAndOracleSound) {
  for (auto kind : kAllStructures) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      std::mt19937_64 rng(seed * 31 + static_cast<int>(kind));
      NameFactory names;
      auto [g, pq] = plant_query(TopologicalStructure::of(kind), 50, rng, names);
      const auto& rec = pq.record;
      auto label = std::string(to_string(kind)) + " seed " + std::to_string(seed);
      EXPECT_EQ(g.triples.size(), pq.record.gold_path.size() + 50) << label;
      // Exactly one realization anywhere in the graph.
      auto bindings = instantiate_template(g, pq.tpl, rng);
      ASSERT_EQ(bindings.size(), 1u) << label;
      EXPECT_EQ(bindings[0].topic(), rec.topic_entity);
      EXPECT_EQ(brute_force_answers(g, pq.tpl, rec.topic_entity, keyword_filter(rec.filter_keyword)),
                rec.gold_answers);
      ASSERT_EQ(rec.gold_answers.size(), 1u);
      // Gold node ids index the graph's triples.
      for (const auto& n : pq.gold_path.nodes) EXPECT_EQ(g.triples.at(n.node), n.triple);
      // The keyword names the answer and nothing else.
      for (const auto& [id, doc] : g.documents)
        EXPECT_EQ(has_word(doc, rec.filter_keyword), id == rec.gold_answers[0]) << label << " " << id;
      // Query carries the keyword and the relation names.
      EXPECT_NE(rec.query.find(rec.filter_keyword), std::string::npos);
      for (const auto& r : pq.tpl.relation_sequence) EXPECT_NE(rec.query.find(r), std::string::npos) << label;
    }
  }
}

TEST(PlantQuery, SameSeedSameBytes) {
  auto make = [] {
    std::mt19937_64 rng(77);
    return plant_query(TopologicalStructure::of(StructureKind::chain3_constraint), 50, rng);
  };
  auto [g1, q1] = make();
  auto [g2, q2] = make();
  EXPECT_EQ(graph_bytes(g1), graph_bytes(g2));
  EXPECT_EQ(to_json(q1.record), to_json(q2.record));
}

TEST(PlantMany, MergedGraphKeepsGoldIds) {
  std::mt19937_64 rng(3);
  auto set = plant_many(kAllStructures, 12, 20, rng);
  ASSERT_EQ(set.queries.size(), 12u);
  std::set<std::string> ids;
  for (const auto& pq : set.queries) {
    ids.insert(pq.record.id);
    for (const auto& n : pq.gold_path.nodes) EXPECT_EQ(set.graph.triples.at(n.node), n.triple);
    EXPECT_EQ(brute_force_answers(set.graph, pq.tpl, pq.record.topic_entity, keyword_filter(pq.record.filter_keyword)),
              pq.record.gold_answers);
  }
  EXPECT_EQ(ids.size(), 12u);
  EXPECT_EQ(set.queries[0].record.id, "q00000");
  EXPECT_EQ(set.queries[8].record.split, Split::val);
  EXPECT_EQ(set.queries[9].record.split, Split::test);
}

TEST(TemplateBank, CoversAllSixStructures) {
  auto bank = default_template_bank();
  std::set<StructureKind> kinds;
  std::set<std::string> ids;
  for (const auto& t : bank) {
    kinds.insert(t.structure.kind);
    ids.insert(t.id);
    EXPECT_NO_THROW(t.check());
  }
  EXPECT_EQ(kinds.size(), 6u);
  EXPECT_EQ(ids.size(), bank.size());
}

TEST(TemplateBank, JsonRoundTripAndShippedAsset) {
  auto bank = default_template_bank();
  std::stringstream buf;
  write_template_bank(buf, bank);
  EXPECT_EQ(read_template_bank(buf), bank);
  std::ifstream asset(std::string(RELPATH_SOURCE_DIR) + "/assets/templates.json");
  ASSERT_TRUE(asset) << "assets/templates.json missing";
  EXPECT_EQ(read_template_bank(asset), bank);
}

TEST(TemplateBank, MalformedInput) {
  std::stringstream not_json("{");
  EXPECT_THROW(read_template_bank(not_json), TemplateError);
  std::stringstream wrong_format(R"({"templates": []})");
  EXPECT_THROW(read_template_bank(wrong_format), TemplateError);
  std::stringstream bad_counts(
      R"({"format":"relpath-template-bank","version":1,"templates":[{"id":"x","structure":"CHAIN2","relations":["r"],"entity_types":["a","b","c"]}]})");
  EXPECT_THROW(read_template_bank(bad_counts), TemplateError);
  std::stringstream dup(
      R"({"format":"relpath-template-bank","version":1,"templates":[{"id":"x","structure":"CHAIN1","relations":["r"],"entity_types":["a","b"]},{"id":"x","structure":"CHAIN1","relations":["s"],"entity_types":["a","b"]}]})");
  EXPECT_THROW(read_template_bank(dup), TemplateError);
}

TEST(ComposeQuery, SurfaceForm) {
  auto c2c = tpl(StructureKind::chain2_constraint, {"r1", "r2", "rc"}, {"Gene", "Chemical", "Disease", "Gene"});
  EXPECT_EQ(compose_query(c2c, "Abc", "kw"),
            "Starting from Abc, which disease is linked by r1, then by r2, where the intermediate also has rc, and is "
            "described as kw?");
  auto inter = tpl(StructureKind::intersection, {"r1", "rb"}, {"Gene", "Chemical"});
  EXPECT_EQ(compose_query(inter, "Abc", ""), "Starting from Abc, which chemical is linked by r1 and also by rb?");
}

TEST(SynthQueries, OneTemplateOneRecord) {
  std::mt19937_64 rng(2);
  auto bank = default_template_bank();
  auto world = generate_world(std::span(bank).first(5), WorldParams{20, 150, 10}, rng);
  MockLlm mock;
  std::vector<RelationalTemplate> one{bank[0]};
  auto recs = synth_queries(world, one, 1, &mock, rng);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(brute_force_answers(world, bank[0], recs[0].topic_entity, keyword_filter(recs[0].filter_keyword)),
            recs[0].gold_answers);
  EXPECT_EQ(recs[0].template_id, bank[0].id);
}

TEST(SynthQueries, DropsBindingsWithMoreThanThreeAnswers) {
  TkgBuilder b;
  for (int i = 0; i < 5; ++i) {
    auto x = "X" + std::to_string(i);
    b.add_triple({"T", "r", x});
    b.add_document(x, "Zorb.");
  }
  auto t = tpl(StructureKind::chain1, {"r"}, {"*", "*"});
  std::vector<RelationalTemplate> bank{t};
  std::mt19937_64 rng(1);
  {
    TkgBuilder only5 = b;
    auto g = std::move(only5).build();
    EXPECT_TRUE(synth_queries(g, bank, 3, nullptr, rng).empty());
  }
  b.add_triple({"U", "r", "Y"});
  b.add_document("Y", "Quil.");
  auto g = std::move(b).build();
  auto recs = synth_queries(g, bank, 3, nullptr, rng);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].topic_entity, "U");
  EXPECT_EQ(recs[0].gold_answers, std::vector<std::string>{"Y"});
  EXPECT_THROW(synth_queries(g, std::vector{tpl(StructureKind::chain1, {"q"}, {"*", "*"})}, 1, nullptr, rng),
               GenerationError);
}

TEST(SynthQueries, SeededRunsAreIdenticalAndSound) {
  auto run = [] {
    std::mt19937_64 rng(9);
    auto bank = default_template_bank();
    auto world = generate_world(bank, WorldParams{30, 900, 20}, rng);
    auto recs = synth_queries(world, bank, 40, nullptr, rng);
    return std::pair(std::move(world), std::move(recs));
  };
  auto [g1, r1] = run();
  auto [g2, r2] = run();
  std::ostringstream a, b;
  write_queries(a, r1);
  write_queries(b, r2);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(graph_bytes(g1), graph_bytes(g2));
  EXPECT_FALSE(r1.empty());
  auto bank = default_template_bank();
  std::set<std::string> structures;
  for (const auto& r : r1) {
    auto it = std::find_if(bank.begin(), bank.end(), [&](const auto& t) { return t.id == r.template_id; });
    ASSERT_NE(it, bank.end());
    EXPECT_EQ(brute_force_answers(g1, *it, r.topic_entity, keyword_filter(r.filter_keyword)), r.gold_answers);
    EXPECT_LE(r.gold_answers.size(), kMaxGoldAnswers);
    structures.insert(r.structure);
  }
  EXPECT_GE(structures.size(), 3u);
}

TEST(SynthQueries, WorldInstantiatesAllSixStructures) {
  std::mt19937_64 rng(13);
  auto bank = default_template_bank();
  auto world = generate_world(bank, WorldParams{}, rng);
  std::set<StructureKind> seen;
  for (const auto& t : bank) {
    bool known = true;
    for (const auto& r : t.relation_sequence) known = known && world.relations.count(r);
    if (known && !instantiate_template(world, t, rng).empty()) seen.insert(t.structure.kind);
  }
  EXPECT_EQ(seen.size(), 6u);
}
