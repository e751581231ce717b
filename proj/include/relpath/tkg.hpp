#pragma once

// Textual knowledge graph: entities, typed relations, triples and per-entity
// documents. Loaded from a TSV triple file plus a JSONL description file.

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "relpath/common.hpp"

namespace relpath {

using EntityId = std::string;

struct Entity {
  EntityId id;
  std::string label;
  std::string etype;
};

struct Triple {
  EntityId head;
  std::string relation;
  EntityId tail;

  bool contains(std::string_view e) const noexcept { return head == e || tail == e; }
  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    auto h = text::fnv1a(t.head);
    h = text::fnv1a("\x1f", h);
    h = text::fnv1a(t.relation, h);
    h = text::fnv1a("\x1f", h);
    return static_cast<std::size_t>(text::fnv1a(t.tail, h));
  }
};

// Immutable once built. Entities and documents are ordered maps so iteration
// (and anything serialized from it) is deterministic.
struct TextualKnowledgeGraph {
  std::map<EntityId, Entity> entities;
  std::set<std::string> relations;
  std::vector<Triple> triples;
  std::map<EntityId, std::string> documents;
  // Documents whose key names no entity. Kept out of `documents` so that
  // documents keys stay a subset of entity ids; surfaced by validate().
  std::map<std::string, std::string> orphan_documents;

  bool has_entity(std::string_view id) const { return entities.find(std::string(id)) != entities.end(); }

  std::string_view document(std::string_view id) const {
    auto it = documents.find(std::string(id));
    return it == documents.end() ? std::string_view{} : std::string_view{it->second};
  }

  const std::string& etype(std::string_view id) const {
    static const std::string empty;
    auto it = entities.find(std::string(id));
    return it == entities.end() ? empty : it->second.etype;
  }
};

// Accumulates entities/triples/documents while enforcing the graph invariants:
// no exact-duplicate triples, no empty ids, every triple endpoint has an entity.
class TkgBuilder {
 public:
  void add_entity(const EntityId& id, std::string etype = {}, std::string label = {}) {
    if (id.empty()) throw ArgumentError("entity id must be non-empty");
    auto [it, inserted] = g_.entities.try_emplace(id, Entity{id, label.empty() ? id : label, etype});
    if (!inserted) {
      if (it->second.etype.empty()) it->second.etype = std::move(etype);
      if (!label.empty()) it->second.label = std::move(label);
    }
  }

  // Returns false when the triple was a duplicate and got dropped.
  bool add_triple(const Triple& t, std::string_view head_type = {}, std::string_view tail_type = {}) {
    if (t.head.empty() || t.tail.empty()) throw ArgumentError("triple references an empty entity id");
    if (t.relation.empty()) throw ArgumentError("triple has an empty relation");
    add_entity(t.head, std::string(head_type));
    add_entity(t.tail, std::string(tail_type));
    if (!seen_.insert(t).second) return false;
    g_.relations.insert(t.relation);
    g_.triples.push_back(t);
    return true;
  }

  void add_document(const std::string& entity, std::string doc) { docs_[entity] = std::move(doc); }

  TextualKnowledgeGraph build() && {
    for (auto& [key, doc] : docs_) {
      if (g_.entities.count(key))
        g_.documents.emplace(key, std::move(doc));
      else
        g_.orphan_documents.emplace(key, std::move(doc));
    }
    docs_.clear();
    seen_.clear();
    return std::move(g_);
  }

 private:
  TextualKnowledgeGraph g_;
  std::map<std::string, std::string> docs_;
  std::unordered_set<Triple, TripleHash> seen_;
};

namespace detail {

inline std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace detail

// head<TAB>relation<TAB>tail[<TAB>htype|ttype]; '#' lines and blank lines skipped.
inline void read_triples(std::istream& in, TkgBuilder& builder) {
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto line = detail::strip_cr(raw);
    if (text::trim(line).empty() || line.front() == '#') continue;
    auto cols = text::split(line, '\t');
    if (cols.size() != 3 && cols.size() != 4)
      throw ParseError("expected 3 or 4 tab-separated columns, got " + std::to_string(cols.size()), lineno);
    Triple t{std::string(cols[0]), std::string(cols[1]), std::string(cols[2])};
    if (t.head.empty() || t.tail.empty())
      throw RejectedRecordError("triple references an empty entity id", lineno);
    if (t.relation.empty()) throw RejectedRecordError("empty relation", lineno);
    std::string_view htype, ttype;
    if (cols.size() == 4) {
      auto types = text::split(cols[3], '|');
      if (types.size() != 2) throw ParseError("type column must be 'htype|ttype'", lineno);
      htype = types[0];
      ttype = types[1];
    }
    builder.add_triple(t, htype, ttype);
  }
}

// JSON Lines: {"entity": <id>, "text": <document>}
inline void read_descriptions(std::istream& in, TkgBuilder& builder) {
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto line = text::trim(detail::strip_cr(raw));
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    if (!rec.is_object() || !rec.contains("entity") || !rec.contains("text") || !rec["entity"].is_string() ||
        !rec["text"].is_string())
      throw ParseError("description record needs string fields 'entity' and 'text'", lineno);
    auto id = rec["entity"].get<std::string>();
    if (id.empty()) throw RejectedRecordError("description for an empty entity id", lineno);
    builder.add_document(id, rec["text"].get<std::string>());
  }
}

inline TextualKnowledgeGraph load_tkg(std::istream& triples, std::istream* descriptions = nullptr) {
  TkgBuilder b;
  read_triples(triples, b);
  if (descriptions) read_descriptions(*descriptions, b);
  return std::move(b).build();
}

inline TextualKnowledgeGraph load_tkg_files(const std::string& triples_path, const std::string& descriptions_path = {}) {
  std::ifstream tin(triples_path);
  if (!tin) throw InputError("cannot open triples file: " + triples_path);
  if (descriptions_path.empty()) return load_tkg(tin);
  std::ifstream din(descriptions_path);
  if (!din) throw InputError("cannot open descriptions file: " + descriptions_path);
  return load_tkg(tin, &din);
}

inline void write_triples(std::ostream& out, const TextualKnowledgeGraph& g, bool with_types = true) {
  for (const auto& t : g.triples) {
    out << t.head << '\t' << t.relation << '\t' << t.tail;
    if (with_types) out << '\t' << g.etype(t.head) << '|' << g.etype(t.tail);
    out << '\n';
  }
}

inline void write_descriptions(std::ostream& out, const TextualKnowledgeGraph& g) {
  for (const auto& [id, doc] : g.documents) out << nlohmann::json{{"entity", id}, {"text", doc}}.dump() << '\n';
}

struct ValidationReport {
  std::vector<std::string> dangling_document_keys;
  std::vector<EntityId> entities_without_document;
  std::size_t entity_count = 0;
  std::size_t triple_count = 0;
  std::size_t relation_vocabulary_size = 0;
  std::size_t entity_type_count = 0;
  double coverage = 0.0;  // |entities with document| / |entities|

  bool ok() const noexcept { return dangling_document_keys.empty(); }
};

inline ValidationReport validate(const TextualKnowledgeGraph& g) {
  ValidationReport r;
  r.entity_count = g.entities.size();
  r.triple_count = g.triples.size();
  r.relation_vocabulary_size = g.relations.size();
  for (const auto& [key, _] : g.orphan_documents) r.dangling_document_keys.push_back(key);
  std::size_t covered = 0;
  for (const auto& [key, _] : g.documents)
    if (!g.entities.count(key)) r.dangling_document_keys.push_back(key);
  std::set<std::string> types;
  for (const auto& [id, e] : g.entities) {
    if (!e.etype.empty()) types.insert(e.etype);
    if (g.documents.count(id))
      ++covered;
    else
      r.entities_without_document.push_back(id);
  }
  std::sort(r.dangling_document_keys.begin(), r.dangling_document_keys.end());
  r.entity_type_count = types.size();
  r.coverage = r.entity_count ? static_cast<double>(covered) / static_cast<double>(r.entity_count) : 0.0;
  return r;
}

}  // namespace relpath
