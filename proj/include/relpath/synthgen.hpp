#pragma once

// Synthetic graphs and queries: topological structures, relational templates,
// brute-force answer enumeration and planted-path fixtures.
//
// Template semantics. A template with hop count h binds chain entities
// e0 -> e1 -> ... -> eh (pairwise distinct) through relation_sequence[0..h).
// Each constraint j (relation_sequence[h + j]) hangs off chain entity
// e_{pos_j}: a triple (e_pos, rc, c) for some entity c not on the chain. The
// constraint entity is existential; answers are the e_h. INTERSECTION is the
// one-hop case where the constraint lands on the answer itself:
// (e0, r1, e1) and (e0, rb, e1).

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "relpath/common.hpp"
#include "relpath/eval.hpp"
#include "relpath/prompt.hpp"
#include "relpath/search.hpp"
#include "relpath/tkg.hpp"

namespace relpath {

enum class StructureKind { chain1, chain2, chain3, chain2_constraint, chain3_constraint, intersection };

inline constexpr StructureKind kAllStructures[] = {StructureKind::chain1,
                                                   StructureKind::chain2,
                                                   StructureKind::chain3,
                                                   StructureKind::chain2_constraint,
                                                   StructureKind::chain3_constraint,
                                                   StructureKind::intersection};

inline std::string_view to_string(StructureKind k) {
  switch (k) {
    case StructureKind::chain1:
      return "CHAIN1";
    case StructureKind::chain2:
      return "CHAIN2";
    case StructureKind::chain3:
      return "CHAIN3";
    case StructureKind::chain2_constraint:
      return "CHAIN2_CONSTRAINT";
    case StructureKind::chain3_constraint:
      return "CHAIN3_CONSTRAINT";
    case StructureKind::intersection:
      return "INTERSECTION";
  }
  return "?";
}

inline StructureKind structure_from_string(std::string_view s) {
  for (auto k : kAllStructures)
    if (to_string(k) == s) return k;
  throw ArgumentError("unknown structure: " + std::string(s));
}

struct TopologicalStructure {
  StructureKind kind = StructureKind::chain1;
  std::size_t hop_count = 1;
  std::vector<std::size_t> constraint_positions;  // 0-based chain entity / level index

  static TopologicalStructure of(StructureKind k) {
    switch (k) {
      case StructureKind::chain1:
        return {k, 1, {}};
      case StructureKind::chain2:
        return {k, 2, {}};
      case StructureKind::chain3:
        return {k, 3, {}};
      case StructureKind::chain2_constraint:
        return {k, 2, {1}};
      case StructureKind::chain3_constraint:
        return {k, 3, {1}};
      case StructureKind::intersection:
        return {k, 1, {0}};
    }
    return {};
  }

  bool intersection() const noexcept { return kind == StructureKind::intersection; }

  void check() const {
    if (hop_count < 1 || hop_count > 3) throw TemplateError("hop_count must be in [1, 3]");
    for (auto p : constraint_positions)
      if (p >= hop_count) throw TemplateError("constraint position out of range");
    if (intersection() && (hop_count != 1 || constraint_positions != std::vector<std::size_t>{0}))
      throw TemplateError("INTERSECTION is a one-hop structure with its constraint at position 0");
  }

  friend bool operator==(const TopologicalStructure&, const TopologicalStructure&) = default;
};

struct RelationalTemplate {
  std::string id;
  TopologicalStructure structure;
  std::vector<std::string> relation_sequence;    // chain relations, then constraint relations
  std::vector<std::string> entity_type_sequence;  // chain entity types, then constraint entity types

  std::size_t hops() const noexcept { return structure.hop_count; }
  std::size_t constraint_count() const noexcept { return structure.constraint_positions.size(); }

  void check() const {
    structure.check();
    if (relation_sequence.size() != hops() + constraint_count())
      throw TemplateError("template " + id + ": relation count does not match its structure");
    auto types = hops() + 1 + (structure.intersection() ? 0 : constraint_count());
    if (entity_type_sequence.size() != types)
      throw TemplateError("template " + id + ": entity type count does not match its structure");
    for (const auto& r : relation_sequence)
      if (r.empty()) throw TemplateError("template " + id + ": empty relation");
  }

  friend bool operator==(const RelationalTemplate&, const RelationalTemplate&) = default;
};

// ---------------------------------------------------------------------------
// Relation bank

struct RelationSignature {
  std::string head_type;
  std::string relation;
  std::string tail_type;
};

// Typed single-hop relations of the PharmKG template list.
inline const std::vector<RelationSignature>& pharmkg_signatures() {
  static const std::vector<RelationSignature> sigs = {
      {"Gene", "Production by cell population", "Gene"},
      {"Gene", "Enhance response, or activate, stimulate", "Gene"},
      {"Gene", "Relationships involving regulation and pathways", "Gene"},
      {"Gene", "Binding, ligand", "Gene"},
      {"Gene", "Affects expression/production", "Gene"},
      {"Gene", "Gene-Gene", "Gene"},
      {"Chemical", "Chemical-Chemical", "Chemical"},
      {"Disease", "Ancestors of disease", "Disease"},
      {"Disease", "Associations between diseases", "Disease"},
      {"Gene", "Interactions", "Chemical"},
      {"Chemical", "Interactions", "Gene"},
      {"Gene", "Interactions", "Gene"},
      {"Gene", "Interactions", "Disease"},
      {"Gene", "Drug targets", "Disease"},
      {"Gene", "Role in pathogenesis, or promotes progression", "Disease"},
      {"Gene", "Mutations affect, or polymorphisms alter risk", "Disease"},
      {"Disease", "Biomarkers (diagnostic), or regulation linked to disease", "Gene"},
      {"Disease", "Overexpression in disease", "Gene"},
      {"Chemical", "Treatment or therapy", "Disease"},
      {"Chemical", "Side effect or adverse event", "Disease"},
      {"Chemical", "Inhibits cell growth", "Disease"},
      {"Chemical", "Role in pathogenesis", "Disease"},
      {"Chemical", "Prevents, suppresses, or alleviates, reduces", "Disease"},
      {"Disease", "Biomarkers (progression)", "Chemical"},
      {"Chemical", "Agonism, activation, or antagonism, blocking", "Gene"},
      {"Chemical", "Binding, ligand", "Gene"},
      {"Chemical", "Affects expression/production", "Gene"},
      {"Chemical", "Inhibits", "Gene"},
      {"Gene", "Transport, channels", "Chemical"},
      {"Gene", "Metabolism, pharmacokinetics", "Chemical"},
      {"Gene", "Enzyme activity", "Chemical"},
  };
  return sigs;
}

namespace detail {

inline RelationalTemplate make_template(std::string id, StructureKind kind, std::vector<std::string> rels,
                                        std::vector<std::string> types) {
  RelationalTemplate t{std::move(id), TopologicalStructure::of(kind), std::move(rels), std::move(types)};
  t.check();
  return t;
}

}  // namespace detail

inline std::vector<RelationalTemplate> default_template_bank() {
  using K = StructureKind;
  std::vector<RelationalTemplate> bank;
  std::size_t n = 0;
  for (const auto& s : pharmkg_signatures())
    bank.push_back(detail::make_template("chain1-" + std::to_string(++n), K::chain1, {s.relation},
                                         {s.head_type, s.tail_type}));
  auto add = [&](std::string prefix, K kind, std::vector<std::string> rels, std::vector<std::string> types) {
    std::size_t k = 1;
    for (const auto& t : bank)
      if (t.structure.kind == kind) ++k;
    bank.push_back(detail::make_template(prefix + "-" + std::to_string(k), kind, std::move(rels), std::move(types)));
  };
  add("chain2", K::chain2, {"Enhance response, or activate, stimulate", "Drug targets"}, {"Gene", "Gene", "Disease"});
  add("chain2", K::chain2, {"Relationships involving regulation and pathways", "Binding, ligand"},
      {"Gene", "Gene", "Gene"});
  add("chain2", K::chain2, {"Interactions", "Interactions"}, {"Gene", "Gene", "Chemical"});
  add("chain2", K::chain2, {"Transport, channels", "Agonism, activation, or antagonism, blocking"},
      {"Gene", "Chemical", "Gene"});
  add("chain2", K::chain2, {"Metabolism, pharmacokinetics", "Binding, ligand"}, {"Gene", "Chemical", "Gene"});
  add("chain2", K::chain2, {"Interactions", "Treatment or therapy"}, {"Gene", "Chemical", "Disease"});
  add("chain2", K::chain2, {"Interactions", "Side effect or adverse event"}, {"Gene", "Chemical", "Disease"});
  add("chain2", K::chain2, {"Treatment or therapy", "Biomarkers (diagnostic), or regulation linked to disease"},
      {"Chemical", "Disease", "Gene"});
  add("chain2", K::chain2, {"Associations between diseases", "Ancestors of disease"},
      {"Disease", "Disease", "Disease"});
  add("chain3", K::chain3,
      {"Enhance response, or activate, stimulate", "Drug targets",
       "Biomarkers (diagnostic), or regulation linked to disease"},
      {"Gene", "Gene", "Disease", "Gene"});
  add("chain3", K::chain3,
      {"Transport, channels", "Agonism, activation, or antagonism, blocking", "Binding, ligand"},
      {"Gene", "Chemical", "Gene", "Chemical"});
  add("chain3", K::chain3,
      {"Interactions", "Treatment or therapy", "Biomarkers (diagnostic), or regulation linked to disease"},
      {"Gene", "Chemical", "Disease", "Gene"});
  add("chain3", K::chain3, {"Interactions", "Interactions", "Metabolism, pharmacokinetics"},
      {"Gene", "Gene", "Gene", "Chemical"});
  add("chain3", K::chain3, {"Interactions", "Role in pathogenesis", "Overexpression in disease"},
      {"Gene", "Chemical", "Disease", "Gene"});
  add("chain3", K::chain3,
      {"Side effect or adverse event", "Biomarkers (diagnostic), or regulation linked to disease",
       "Mutations affect, or polymorphisms alter risk"},
      {"Chemical", "Disease", "Gene", "Disease"});
  add("chain2c", K::chain2_constraint, {"Interactions", "Treatment or therapy", "Binding, ligand"},
      {"Gene", "Chemical", "Disease", "Gene"});
  add("chain2c", K::chain2_constraint, {"Metabolism, pharmacokinetics", "Binding, ligand", "Inhibits cell growth"},
      {"Gene", "Chemical", "Gene", "Disease"});
  add("chain2c", K::chain2_constraint, {"Enhance response, or activate, stimulate", "Drug targets", "Interactions"},
      {"Gene", "Gene", "Disease", "Chemical"});
  add("chain2c", K::chain2_constraint,
      {"Treatment or therapy", "Biomarkers (diagnostic), or regulation linked to disease", "Ancestors of disease"},
      {"Chemical", "Disease", "Gene", "Disease"});
  add("chain3c", K::chain3_constraint,
      {"Interactions", "Treatment or therapy", "Biomarkers (diagnostic), or regulation linked to disease",
       "Affects expression/production"},
      {"Gene", "Chemical", "Disease", "Gene", "Gene"});
  add("chain3c", K::chain3_constraint,
      {"Transport, channels", "Agonism, activation, or antagonism, blocking", "Drug targets", "Chemical-Chemical"},
      {"Gene", "Chemical", "Gene", "Disease", "Chemical"});
  add("chain3c", K::chain3_constraint,
      {"Enhance response, or activate, stimulate", "Mutations affect, or polymorphisms alter risk",
       "Overexpression in disease", "Gene-Gene"},
      {"Gene", "Gene", "Disease", "Gene", "Gene"});
  add("intersection", K::intersection, {"Interactions", "Transport, channels"}, {"Gene", "Chemical"});
  add("intersection", K::intersection, {"Drug targets", "Role in pathogenesis, or promotes progression"},
      {"Gene", "Disease"});
  add("intersection", K::intersection, {"Treatment or therapy", "Prevents, suppresses, or alleviates, reduces"},
      {"Chemical", "Disease"});
  add("intersection", K::intersection, {"Binding, ligand", "Inhibits"}, {"Chemical", "Gene"});
  return bank;
}

// ---------------------------------------------------------------------------
// Template bank files

inline nlohmann::json to_json(const RelationalTemplate& t) {
  return {{"id", t.id},
          {"structure", to_string(t.structure.kind)},
          {"relations", t.relation_sequence},
          {"entity_types", t.entity_type_sequence}};
}

inline RelationalTemplate template_from_json(const nlohmann::json& j) {
  try {
    RelationalTemplate t;
    t.id = j.at("id").get<std::string>();
    t.structure = TopologicalStructure::of(structure_from_string(j.at("structure").get<std::string>()));
    t.relation_sequence = j.at("relations").get<std::vector<std::string>>();
    t.entity_type_sequence = j.at("entity_types").get<std::vector<std::string>>();
    t.check();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw TemplateError(std::string("malformed template: ") + e.what());
  } catch (const ArgumentError& e) {
    throw TemplateError(e.what());
  }
}

inline void write_template_bank(std::ostream& out, std::span<const RelationalTemplate> bank) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : bank) arr.push_back(to_json(t));
  out << nlohmann::json{{"format", "relpath-template-bank"}, {"version", 1}, {"templates", arr}}.dump(2) << '\n';
}

inline std::vector<RelationalTemplate> read_template_bank(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw TemplateError(std::string("template bank is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "relpath-template-bank" || !j.contains("templates"))
    throw TemplateError("not a relpath template bank");
  std::vector<RelationalTemplate> out;
  std::set<std::string> ids;
  for (const auto& t : j["templates"]) {
    out.push_back(template_from_json(t));
    if (!ids.insert(out.back().id).second) throw TemplateError("duplicate template id: " + out.back().id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binding enumeration

struct TemplateBinding {
  std::vector<EntityId> chain;        // e0 .. eh
  std::vector<EntityId> constraints;  // one entity per constraint relation

  const EntityId& topic() const { return chain.front(); }
  const EntityId& answer() const { return chain.back(); }
  friend bool operator==(const TemplateBinding&, const TemplateBinding&) = default;
  friend auto operator<=>(const TemplateBinding&, const TemplateBinding&) = default;
};

// Triples realizing a binding, chain hops first; levels are 1-based.
inline std::vector<GoldStep> binding_steps(const RelationalTemplate& tpl, const TemplateBinding& b) {
  std::vector<GoldStep> out;
  for (std::size_t i = 0; i < tpl.hops(); ++i)
    out.push_back({Triple{b.chain[i], tpl.relation_sequence[i], b.chain[i + 1]}, i + 1, false});
  for (std::size_t j = 0; j < tpl.constraint_count(); ++j) {
    auto pos = tpl.structure.constraint_positions[j];
    out.push_back({Triple{b.chain[pos], tpl.relation_sequence[tpl.hops() + j], b.constraints[j]}, pos + 1, true});
  }
  return out;
}

using DocumentFilter = std::function<bool(std::string_view document)>;

// Matches documents containing `keyword` as a whole word, case-insensitively.
inline DocumentFilter keyword_filter(std::string keyword) {
  auto kw = text::to_lower(text::trim(keyword));
  return [kw](std::string_view doc) {
    for (const auto& tok : text::word_tokens(doc))
      if (tok == kw) return true;
    return false;
  };
}

namespace detail {

class RelationIndex {
 public:
  explicit RelationIndex(const TextualKnowledgeGraph& g) : g_(&g) {
    for (const auto& t : g.triples) {
      out_[{t.head, t.relation}].push_back(t.tail);
      by_rel_[t.relation].push_back({t.head, t.tail});
    }
    for (auto& [_, v] : out_) std::sort(v.begin(), v.end());
    for (auto& [_, v] : by_rel_) std::sort(v.begin(), v.end());
  }

  std::span<const std::string_view> tails(std::string_view head, std::string_view rel) const {
    auto it = out_.find({head, rel});
    if (it == out_.end()) return {};
    return it->second;
  }

  std::span<const std::pair<std::string_view, std::string_view>> pairs(std::string_view rel) const {
    auto it = by_rel_.find(rel);
    if (it == by_rel_.end()) return {};
    return it->second;
  }

  bool type_ok(std::string_view entity, const std::string& want) const {
    return want.empty() || want == "*" || g_->etype(entity) == want;
  }

 private:
  const TextualKnowledgeGraph* g_;
  std::map<std::pair<std::string_view, std::string_view>, std::vector<std::string_view>> out_;
  std::map<std::string_view, std::vector<std::pair<std::string_view, std::string_view>>> by_rel_;
};

template <class Fn>
void enumerate_bindings(const RelationIndex& idx, const RelationalTemplate& tpl, std::optional<std::string_view> topic,
                        Fn&& emit) {
  const auto h = tpl.hops();
  const auto& rels = tpl.relation_sequence;
  const auto& types = tpl.entity_type_sequence;
  std::vector<std::string_view> chain;
  std::vector<std::string_view> cons;

  auto on_chain = [&](std::string_view e) { return std::find(chain.begin(), chain.end(), e) != chain.end(); };

  std::function<void(std::size_t)> constraints = [&](std::size_t j) {
    if (j == tpl.constraint_count()) {
      TemplateBinding b;
      for (auto e : chain) b.chain.emplace_back(e);
      for (auto e : cons) b.constraints.emplace_back(e);
      emit(std::move(b));
      return;
    }
    auto pos = tpl.structure.constraint_positions[j];
    const auto& rc = rels[h + j];
    if (tpl.structure.intersection()) {
      for (auto t : idx.tails(chain[pos], rc))
        if (t == chain.back()) {
          cons.push_back(t);
          constraints(j + 1);
          cons.pop_back();
        }
      return;
    }
    for (auto c : idx.tails(chain[pos], rc)) {
      if (on_chain(c) || std::find(cons.begin(), cons.end(), c) != cons.end()) continue;
      if (!idx.type_ok(c, types[h + 1 + j])) continue;
      cons.push_back(c);
      constraints(j + 1);
      cons.pop_back();
    }
  };

  std::function<void(std::size_t)> extend = [&](std::size_t i) {
    if (i == h) {
      constraints(0);
      return;
    }
    for (auto t : idx.tails(chain.back(), rels[i])) {
      if (on_chain(t) || !idx.type_ok(t, types[i + 1])) continue;
      chain.push_back(t);
      extend(i + 1);
      chain.pop_back();
    }
  };

  if (topic) {
    if (!idx.type_ok(*topic, types[0])) return;
    chain.push_back(*topic);
    extend(0);
    return;
  }
  std::string_view prev;
  bool first = true;
  for (const auto& [head, _] : idx.pairs(rels[0])) {
    if (!first && head == prev) continue;
    first = false;
    prev = head;
    if (!idx.type_ok(head, types[0])) continue;
    chain.assign(1, head);
    extend(0);
  }
}

}  // namespace detail

// Every binding realizing the template, canonical order shuffled by `rng`.
template <class Rng>
std::vector<TemplateBinding> instantiate_template(const TextualKnowledgeGraph& g, const RelationalTemplate& tpl,
                                                  Rng& rng) {
  tpl.check();
  for (const auto& r : tpl.relation_sequence)
    if (!g.relations.count(r)) throw TemplateError("template " + tpl.id + ": relation not in graph: " + r);
  detail::RelationIndex idx(g);
  std::vector<TemplateBinding> out;
  detail::enumerate_bindings(idx, tpl, std::nullopt, [&](TemplateBinding b) { out.push_back(std::move(b)); });
  std::sort(out.begin(), out.end());
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

// Sorted answer set for `topic`: terminal entities of every realization whose
// document passes `filter`.
inline std::vector<EntityId> brute_force_answers(const TextualKnowledgeGraph& g, const RelationalTemplate& tpl,
                                                 std::string_view topic, const DocumentFilter& filter = nullptr) {
  tpl.check();
  detail::RelationIndex idx(g);
  std::set<EntityId> answers;
  detail::enumerate_bindings(idx, tpl, topic, [&](TemplateBinding b) {
    if (!filter || filter(g.document(b.answer()))) answers.insert(b.answer());
  });
  return {answers.begin(), answers.end()};
}

// ---------------------------------------------------------------------------
// Names and surface text

// Pronounceable unique pseudo-words for entity names and keywords.
class NameFactory {
 public:
  NameFactory() {
    for (auto w : kTemplateWords) taken_.insert(std::string(w));
    for (auto w : filler_words()) taken_.insert(w);
    for (const auto& s : pharmkg_signatures())
      for (auto& tok : text::word_tokens(s.relation + " " + s.head_type + " " + s.tail_type)) taken_.insert(tok);
  }

  template <class Rng>
  std::string make(Rng& rng) {
    static constexpr std::string_view syl[] = {"ka", "lo", "ri", "ven", "tor", "mi", "sa", "du", "pel", "zan",
                                               "qui", "ro", "bex", "ta", "nu", "fel", "gor", "li", "vas", "em"};
    std::uniform_int_distribution<std::size_t> pick(0, std::size(syl) - 1);
    for (std::size_t len = 3;; ++len) {
      for (int attempt = 0; attempt < 64; ++attempt) {
        std::string w;
        for (std::size_t i = 0; i < len; ++i) w += syl[pick(rng)];
        if (taken_.insert(w).second) {
          w[0] = static_cast<char>(w[0] - 'a' + 'A');
          return w;
        }
      }
    }
  }

  // Words that appear in query surface forms. Documents never use them.
  static constexpr std::string_view kTemplateWords[] = {
      "starting", "from", "which", "entity", "is", "linked", "by", "then", "and",
      "where", "the", "intermediate", "also", "has", "described", "as", "to", "one", "looking", "for"};

  // Document padding vocabulary; disjoint from relation names, entity types and
  // the query template.
  static const std::vector<std::string>& filler_words() {
    static const std::vector<std::string> words = [] {
      std::set<std::string> banned(std::begin(kTemplateWords), std::end(kTemplateWords));
      for (const auto& s : pharmkg_signatures())
        for (auto& tok : text::word_tokens(s.relation + " " + s.head_type + " " + s.tail_type)) banned.insert(tok);
      std::vector<std::string> out;
      for (std::string_view w :
           {"cellular", "tissue", "compound", "receptor", "plasma", "serum",  "molecular", "clinical",
            "acute",    "chronic", "renal",   "hepatic",  "cardiac", "neural", "peptide",   "lipid",
            "kinase",   "hormone", "vascular", "oral",    "dermal",  "marker", "isoform",   "domain",
            "factor",   "variant", "protein", "soluble",  "organic", "human",  "murine",    "tumor",
            "immune",   "sample",  "dose",    "cortex",   "liver",   "blood",  "bone",      "lung"})
        if (!banned.count(std::string(w))) out.emplace_back(w);
      return out;
    }();
    return words;
  }

 private:
  std::set<std::string> taken_;
};

namespace detail {

template <class Rng>
std::string filler_text(Rng& rng, std::size_t lo, std::size_t hi) {
  const auto& words = NameFactory::filler_words();
  std::uniform_int_distribution<std::size_t> len(lo, hi);
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::string out;
  for (std::size_t i = 0, n = len(rng); i < n; ++i) {
    if (i) out += ' ';
    out += words[pick(rng)];
  }
  return out;
}

inline std::string lower_type(const std::string& etype) {
  return etype.empty() || etype == "*" ? "entity" : text::to_lower(etype);
}

}  // namespace detail

// Query text: template surface form plus the answer keyword.
inline std::string compose_query(const RelationalTemplate& tpl, std::string_view topic_label, std::string_view keyword) {
  std::string q = "Starting from " + std::string(topic_label) + ", which " +
                  detail::lower_type(tpl.entity_type_sequence[tpl.hops()]) + " is linked by " +
                  tpl.relation_sequence[0];
  for (std::size_t i = 1; i < tpl.hops(); ++i) q += ", then by " + tpl.relation_sequence[i];
  for (std::size_t j = 0; j < tpl.constraint_count(); ++j) {
    const auto& rc = tpl.relation_sequence[tpl.hops() + j];
    if (tpl.structure.intersection())
      q += " and also by " + rc;
    else
      q += ", where the intermediate also has " + rc;
  }
  if (!keyword.empty()) q += ", and is described as " + std::string(keyword);
  q += "?";
  return q;
}

// ---------------------------------------------------------------------------
// Planted queries

struct PlantedQuery {
  QueryRecord record;
  RelationalTemplate tpl;
  RetrievedPath gold_path;  // node ids index the planted graph's triples
  std::size_t distractor_count = 0;
};

struct PlantOptions {
  std::string id = "q0";
  Split split = Split::test;
  // Filler words per document. Every repeated entity inflates a path's norm
  // under the count embedder, so the default keeps documents bare.
  std::size_t filler_min = 0;
  std::size_t filler_max = 0;
  bool name_in_document = false;
  // Open the query with the answer keyword as well ("Looking for kw."), which
  // doubles its weight against the relation names.
  bool keyword_lead = true;
};

namespace detail {

template <class Rng>
const RelationSignature& pick_signature(Rng& rng, const std::function<bool(const RelationSignature&)>& ok) {
  std::vector<const RelationSignature*> pool;
  for (const auto& s : pharmkg_signatures())
    if (ok(s)) pool.push_back(&s);
  if (pool.empty()) throw GenerationError("no relation signature fits the planted shape");
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return *pool[pick(rng)];
}

template <class Rng>
RelationalTemplate planted_template(const TopologicalStructure& shape, Rng& rng) {
  RelationalTemplate tpl;
  tpl.id = "planted-" + text::to_lower(to_string(shape.kind));
  tpl.structure = shape;
  auto has_partner = [](const RelationSignature& s) {
    for (const auto& o : pharmkg_signatures())
      if (o.head_type == s.head_type && o.tail_type == s.tail_type && o.relation != s.relation) return true;
    return false;
  };
  const auto& first = pick_signature(rng, [&](const RelationSignature& s) {
    return !shape.intersection() || has_partner(s);
  });
  tpl.relation_sequence.push_back(first.relation);
  tpl.entity_type_sequence = {first.head_type, first.tail_type};
  for (std::size_t i = 1; i < shape.hop_count; ++i) {
    const auto& s = pick_signature(rng, [&](const RelationSignature& c) {
      return c.head_type == tpl.entity_type_sequence.back();
    });
    tpl.relation_sequence.push_back(s.relation);
    tpl.entity_type_sequence.push_back(s.tail_type);
  }
  std::vector<std::string> chain_rels = tpl.relation_sequence;
  for (auto pos : shape.constraint_positions) {
    auto used = [&](const std::string& r) {
      return std::find(chain_rels.begin(), chain_rels.end(), r) != chain_rels.end();
    };
    if (shape.intersection()) {
      const auto& s = pick_signature(rng, [&](const RelationSignature& c) {
        return c.head_type == first.head_type && c.tail_type == first.tail_type && !used(c.relation);
      });
      tpl.relation_sequence.push_back(s.relation);
    } else {
      const auto& s = pick_signature(rng, [&](const RelationSignature& c) {
        return c.head_type == tpl.entity_type_sequence[pos] && !used(c.relation);
      });
      tpl.relation_sequence.push_back(s.relation);
      tpl.entity_type_sequence.push_back(s.tail_type);
    }
    chain_rels.push_back(tpl.relation_sequence.back());
  }
  tpl.check();
  return tpl;
}

}  // namespace detail

// One gold realization of `shape` plus `distractors` decoy triples.
//
// Decoy triples use relations sharing no token with the query and never join
// two gold entities, so the template has exactly one realization. Decoys are
// spread so that every entity reaches at least three distinct neighbours once
// the budget allows (about 15 distractors), which keeps depth-3 continuations
// available from any two-hop prefix.
template <class Rng>
std::pair<TextualKnowledgeGraph, PlantedQuery> plant_query(const TopologicalStructure& shape, std::size_t distractors,
                                                           Rng& rng, NameFactory& names,
                                                           const PlantOptions& opts = {}) {
  shape.check();
  PlantedQuery pq;
  pq.distractor_count = distractors;
  pq.tpl = detail::planted_template(shape, rng);
  const auto& tpl = pq.tpl;

  TemplateBinding gold;
  for (std::size_t i = 0; i <= tpl.hops(); ++i) gold.chain.push_back(names.make(rng));
  for (std::size_t j = 0; j < tpl.constraint_count(); ++j)
    gold.constraints.push_back(tpl.structure.intersection() ? gold.chain.back() : names.make(rng));
  const std::string keyword = text::to_lower(names.make(rng));

  TkgBuilder b;
  std::map<EntityId, std::string> etype;
  std::vector<EntityId> gold_entities;
  for (std::size_t i = 0; i <= tpl.hops(); ++i) etype[gold.chain[i]] = tpl.entity_type_sequence[i];
  if (!tpl.structure.intersection())
    for (std::size_t j = 0; j < tpl.constraint_count(); ++j)
      etype[gold.constraints[j]] = tpl.entity_type_sequence[tpl.hops() + 1 + j];
  for (const auto& [e, _] : etype) gold_entities.push_back(e);

  auto steps = binding_steps(tpl, gold);
  for (const auto& s : steps) b.add_triple(s.triple, etype[s.triple.head], etype[s.triple.tail]);

  auto& rec = pq.record;
  rec.id = opts.id;
  rec.topic_entity = gold.topic();
  rec.query = (opts.keyword_lead ? "Looking for " + keyword + ". " : std::string()) + compose_query(tpl, gold.topic(), keyword);
  rec.gold_answers = {gold.answer()};
  rec.structure = std::string(to_string(shape.kind));
  rec.split = opts.split;
  rec.template_id = tpl.id;
  rec.filter_keyword = keyword;
  rec.gold_path = steps;

  // Decoy relations: token-disjoint from the query.
  std::set<std::string> query_tokens;
  for (auto& t : text::word_tokens(rec.query)) query_tokens.insert(t);
  std::vector<std::string> decoy_rels;
  for (const auto& s : pharmkg_signatures()) {
    bool clash = false;
    for (const auto& t : text::word_tokens(s.relation)) clash = clash || query_tokens.count(t);
    if (!clash && std::find(decoy_rels.begin(), decoy_rels.end(), s.relation) == decoy_rels.end())
      decoy_rels.push_back(s.relation);
  }
  while (decoy_rels.size() < 3) decoy_rels.push_back(text::to_lower(names.make(rng)));

  static const std::string kTypes[] = {"Gene", "Chemical", "Disease"};
  std::vector<EntityId> all = gold_entities;
  std::size_t decoy_entities = distractors == 0 ? 0 : std::max<std::size_t>(1, distractors / 3);
  std::uniform_int_distribution<std::size_t> pick_type(0, 2);
  for (std::size_t i = 0; i < decoy_entities; ++i) {
    auto n = names.make(rng);
    etype[n] = kTypes[pick_type(rng)];
    all.push_back(n);
  }
  std::set<EntityId> gold_set(gold_entities.begin(), gold_entities.end());
  std::map<EntityId, std::set<EntityId>> nbrs;
  for (const auto& s : steps) {
    nbrs[s.triple.head].insert(s.triple.tail);
    nbrs[s.triple.tail].insert(s.triple.head);
  }
  std::size_t budget = distractors;
  std::uniform_int_distribution<std::size_t> pick_rel(0, decoy_rels.size() - 1);
  std::bernoulli_distribution flip(0.5);
  // Each decoy belongs to the gold entity it was first hung off, and edges stay
  // within one such group: a path that leaves the gold realization never
  // rejoins it.
  std::map<EntityId, EntityId> anchor;
  for (const auto& e : gold_entities) anchor[e] = e;
  auto connect = [&](const EntityId& a, const EntityId& c) {
    if (budget == 0 || a == c || nbrs[a].count(c) || (gold_set.count(a) && gold_set.count(c))) return false;
    if (anchor.count(a) && anchor.count(c) && anchor[a] != anchor[c]) return false;
    if (!anchor.count(a)) anchor[a] = anchor.at(c);
    if (!anchor.count(c)) anchor[c] = anchor.at(a);
    bool fwd = flip(rng);
    Triple t{fwd ? a : c, decoy_rels[pick_rel(rng)], fwd ? c : a};
    b.add_triple(t, etype[t.head], etype[t.tail]);
    nbrs[a].insert(c);
    nbrs[c].insert(a);
    --budget;
    return true;
  };
  auto random_entity = [&](std::size_t upto) {
    std::uniform_int_distribution<std::size_t> d(0, upto - 1);
    return all[d(rng)];
  };
  // Deal decoys round-robin to the gold entities; each joins a random member of
  // its group, so every gold entity gets a decoy neighbourhood of its own.
  std::map<EntityId, std::vector<EntityId>> groups;
  for (const auto& e : gold_entities) groups[e] = {e};
  for (std::size_t i = gold_entities.size(); i < all.size(); ++i) {
    auto& grp = groups[gold_entities[(i - gold_entities.size()) % gold_entities.size()]];
    std::uniform_int_distribution<std::size_t> d(0, grp.size() - 1);
    if (connect(all[i], grp[d(rng)])) grp.push_back(all[i]);
  }
  // Raise every entity to three distinct neighbours.
  for (int pass = 0; pass < 4 && budget > 0; ++pass)
    for (const auto& e : all)
      for (int attempt = 0; nbrs[e].size() < 3 && budget > 0 && attempt < 32; ++attempt)
        connect(e, random_entity(all.size()));
  for (std::size_t attempt = 0; budget > 0 && attempt < 64 * distractors + 64; ++attempt)
    connect(random_entity(all.size()), random_entity(all.size()));
  // Groups saturate before the budget runs out when there are many gold
  // entities; grow them with fresh decoys.
  for (std::size_t k = 0; budget > 0 && k < distractors; ++k) {
    auto n = names.make(rng);
    etype[n] = kTypes[pick_type(rng)];
    all.push_back(n);
    auto& grp = groups[gold_entities[k % gold_entities.size()]];
    std::uniform_int_distribution<std::size_t> d(0, grp.size() - 1);
    if (!connect(n, grp[d(rng)])) continue;
    for (int attempt = 0; nbrs[n].size() < 3 && budget > 0 && attempt < 32; ++attempt) connect(n, grp[d(rng)]);
    grp.push_back(n);
  }

  for (const auto& e : all) {
    b.add_entity(e, etype[e]);
    std::string doc = opts.name_in_document ? e + " " : std::string();
    if (e == gold.answer()) doc += keyword + " ";
    std::string body(text::trim(doc + detail::filler_text(rng, opts.filler_min, opts.filler_max)));
    if (!body.empty()) b.add_document(e, body + ".");
  }
  auto g = std::move(b).build();

  for (std::size_t i = 0; i < steps.size(); ++i)
    pq.gold_path.nodes.push_back({static_cast<NodeId>(i), steps[i].triple, steps[i].level, steps[i].branch});
  std::stable_sort(pq.gold_path.nodes.begin(), pq.gold_path.nodes.end(),
                   [](const PathNode& x, const PathNode& y) { return x.level < y.level; });
  pq.gold_path.hop_count = tpl.hops();
  pq.gold_path.terminal_entities = {gold.answer()};

  auto check = brute_force_answers(g, tpl, gold.topic(), keyword_filter(keyword));
  if (check != rec.gold_answers) throw GenerationError("planted query " + rec.id + " lost its unique answer");
  return {std::move(g), std::move(pq)};
}

template <class Rng>
std::pair<TextualKnowledgeGraph, PlantedQuery> plant_query(const TopologicalStructure& shape, std::size_t distractors,
                                                           Rng& rng) {
  NameFactory names;
  return plant_query(shape, distractors, rng, names);
}

inline void append_graph(TkgBuilder& into, const TextualKnowledgeGraph& g) {
  for (const auto& [id, e] : g.entities) into.add_entity(id, e.etype, e.label);
  for (const auto& t : g.triples) into.add_triple(t);
  for (const auto& [id, doc] : g.documents) into.add_document(id, doc);
}

inline Split split_for_index(std::size_t i) { return i % 10 < 8 ? Split::train : i % 10 == 8 ? Split::val : Split::test; }

inline std::string query_id(std::size_t i) {
  std::string n = std::to_string(i);
  return "q" + std::string(n.size() < 5 ? 5 - n.size() : 0, '0') + n;
}

struct PlantedSet {
  TextualKnowledgeGraph graph;
  std::vector<PlantedQuery> queries;  // gold_path node ids index `graph`
};

// `count` disjoint plants merged into one graph, cycling through `shapes`.
template <class Rng>
PlantedSet plant_many(std::span<const StructureKind> shapes, std::size_t count, std::size_t distractors, Rng& rng) {
  if (shapes.empty()) throw ArgumentError("plant_many needs at least one structure");
  NameFactory names;
  TkgBuilder b;
  PlantedSet out;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < count; ++i) {
    auto [g, pq] = plant_query(TopologicalStructure::of(shapes[i % shapes.size()]), distractors, rng, names,
                               PlantOptions{query_id(i), split_for_index(i)});
    for (auto& n : pq.gold_path.nodes) n.node += static_cast<NodeId>(offset);
    offset += g.triples.size();
    append_graph(b, g);
    out.queries.push_back(std::move(pq));
  }
  out.graph = std::move(b).build();
  return out;
}

// ---------------------------------------------------------------------------
// Template-driven generation over a random typed world

struct WorldParams {
  std::size_t entities_per_type = 60;
  std::size_t triples = 2400;
  std::size_t trait_pool = 30;  // distinct descriptive keywords shared across documents
};

// Random typed graph over the relation signatures used by `templates`.
// Documents read "<Name> <trait> <trait>. <filler>".
template <class Rng>
TextualKnowledgeGraph generate_world(std::span<const RelationalTemplate> templates, const WorldParams& p, Rng& rng) {
  std::set<std::tuple<std::string, std::string, std::string>> sig_set;
  for (const auto& t : templates) {
    t.check();
    const auto& ty = t.entity_type_sequence;
    const auto& r = t.relation_sequence;
    for (std::size_t i = 0; i < t.hops(); ++i) sig_set.insert({ty[i], r[i], ty[i + 1]});
    for (std::size_t j = 0; j < t.constraint_count(); ++j) {
      auto pos = t.structure.constraint_positions[j];
      auto tail = t.structure.intersection() ? ty[t.hops()] : ty[t.hops() + 1 + j];
      sig_set.insert({ty[pos], r[t.hops() + j], tail});
    }
  }
  if (sig_set.empty()) throw GenerationError("no relation signatures to build a world from");
  std::vector<std::tuple<std::string, std::string, std::string>> sigs(sig_set.begin(), sig_set.end());
  std::set<std::string> type_set;
  for (const auto& [h, _, t] : sigs) {
    type_set.insert(h);
    type_set.insert(t);
  }
  NameFactory names;
  std::vector<std::string> traits;
  for (std::size_t i = 0; i < std::max<std::size_t>(2, p.trait_pool); ++i) traits.push_back(text::to_lower(names.make(rng)));
  TkgBuilder b;
  std::map<std::string, std::vector<EntityId>> by_type;
  std::uniform_int_distribution<std::size_t> pick_trait(0, traits.size() - 1);
  for (const auto& ty : type_set)
    for (std::size_t i = 0; i < p.entities_per_type; ++i) {
      auto n = names.make(rng);
      b.add_entity(n, ty);
      auto t1 = pick_trait(rng), t2 = pick_trait(rng);
      b.add_document(n, n + " " + traits[t1] + " " + traits[t2] + ". " + detail::filler_text(rng, 4, 6) + ".");
      by_type[ty].push_back(n);
    }
  std::uniform_int_distribution<std::size_t> pick_sig(0, sigs.size() - 1);
  std::size_t added = 0;
  for (std::size_t attempt = 0; added < p.triples && attempt < p.triples * 20; ++attempt) {
    const auto& [ht, rel, tt] = sigs[pick_sig(rng)];
    const auto& hs = by_type[ht];
    const auto& ts = by_type[tt];
    std::uniform_int_distribution<std::size_t> ph(0, hs.size() - 1), pt(0, ts.size() - 1);
    const auto& h = hs[ph(rng)];
    const auto& t = ts[pt(rng)];
    if (h == t) continue;
    if (b.add_triple({h, rel, t}, ht, tt)) ++added;
  }
  return std::move(b).build();
}

inline std::string_view first_sentence(std::string_view doc) {
  for (std::size_t i = 0; i < doc.size(); ++i)
    if ((doc[i] == '.' || doc[i] == '!' || doc[i] == '?') && (i + 1 == doc.size() || text::is_space(doc[i + 1])))
      return doc.substr(0, i);
  return doc;
}

// Offline stand-in for LLM property extraction: the first-sentence token with
// the lowest document frequency, ignoring the entity's own name (ties: first).
class KeywordExtractor {
 public:
  explicit KeywordExtractor(const TextualKnowledgeGraph& g) : g_(&g) {
    for (const auto& [_, doc] : g.documents) {
      std::set<std::string> seen;
      for (auto& t : text::word_tokens(doc))
        if (seen.insert(t).second) ++df_[t];
    }
  }

  std::optional<std::string> keyword(const EntityId& entity) const {
    auto name = text::word_tokens(entity);
    std::optional<std::string> best;
    std::size_t best_df = 0;
    for (auto& t : text::word_tokens(first_sentence(g_->document(entity)))) {
      if (std::find(name.begin(), name.end(), t) != name.end()) continue;
      auto it = df_.find(t);
      std::size_t df = it == df_.end() ? 0 : it->second;
      if (!best || df < best_df) {
        best = t;
        best_df = df;
      }
    }
    return best;
  }

 private:
  const TextualKnowledgeGraph* g_;
  std::map<std::string, std::size_t> df_;
};

// Samples template bindings, derives a document keyword for the answer entity
// and keeps records whose filtered answer set has at most three members.
// With a text client the keyword is requested from it and used when it occurs
// in the document; otherwise the first-sentence keyword is used.
template <class Rng>
std::vector<QueryRecord> synth_queries(const TextualKnowledgeGraph& g, std::span<const RelationalTemplate> templates,
                                       std::size_t n, LlmClient* text_client, Rng& rng) {
  if (n < 1) throw ArgumentError("synth_queries needs n >= 1");
  std::vector<std::pair<const RelationalTemplate*, std::vector<TemplateBinding>>> usable;
  for (const auto& t : templates) {
    bool known = true;
    for (const auto& r : t.relation_sequence) known = known && g.relations.count(r);
    if (!known) continue;
    auto bindings = instantiate_template(g, t, rng);
    if (!bindings.empty()) usable.emplace_back(&t, std::move(bindings));
  }
  if (usable.empty()) throw GenerationError("no template can be instantiated on this graph");

  KeywordExtractor extractor(g);
  std::vector<QueryRecord> out;
  std::set<std::tuple<std::string, EntityId, std::string>> seen;
  std::uniform_int_distribution<std::size_t> pick_tpl(0, usable.size() - 1);
  for (std::size_t attempt = 0; out.size() < n && attempt < 50 * n; ++attempt) {
    const auto& [tpl, bindings] = usable[pick_tpl(rng)];
    std::uniform_int_distribution<std::size_t> pick_b(0, bindings.size() - 1);
    const auto& bnd = bindings[pick_b(rng)];
    auto doc = g.document(bnd.answer());
    std::optional<std::string> kw;
    if (text_client) {
      std::string prompt = "Extract one short distinctive keyword from this description.\nDescription: " +
                           std::string(doc) + "\nanswer: <keyword>";
      auto res = text_client->generate(prompt, {});
      if (!res.answers.empty() && keyword_filter(res.answers.front())(doc)) kw = text::to_lower(res.answers.front());
    }
    if (!kw) kw = extractor.keyword(bnd.answer());
    if (!kw) continue;
    if (!seen.insert({tpl->id, bnd.topic(), *kw}).second) continue;
    auto answers = brute_force_answers(g, *tpl, bnd.topic(), keyword_filter(*kw));
    if (answers.empty() || answers.size() > kMaxGoldAnswers) continue;
    QueryRecord r;
    r.id = query_id(out.size());
    r.topic_entity = bnd.topic();
    r.query = compose_query(*tpl, g.entities.at(bnd.topic()).label, *kw);
    r.gold_answers = std::move(answers);
    r.structure = std::string(to_string(tpl->structure.kind));
    r.split = split_for_index(out.size());
    r.template_id = tpl->id;
    r.filter_keyword = *kw;
    r.gold_path = binding_steps(*tpl, bnd);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace relpath
