#pragma once

// Textual triple graph: one node per triple, edges between triples that share
// an entity. Adjacency is implicit (derived from the entity index on demand);
// materialize_adjacency() gives the explicit map for small graphs.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relpath/tkg.hpp"

namespace relpath {

using NodeId = std::uint32_t;

struct TripleNode {
  NodeId id = 0;
  Triple triple;
  std::string_view head_text;  // empty when the head has no document
  std::string_view tail_text;
};

enum class EdgeRule {
  any_position,  // share an entity in any position
  tail_to_head,  // u.tail == w.head or w.tail == u.head
};

class TextualTripleGraph {
 public:
  TextualTripleGraph() = default;

  explicit TextualTripleGraph(std::shared_ptr<const TextualKnowledgeGraph> tkg,
                              EdgeRule rule = EdgeRule::any_position)
      : tkg_(std::move(tkg)), rule_(rule) {
    nodes_.reserve(tkg_->triples.size());
    for (std::size_t i = 0; i < tkg_->triples.size(); ++i) {
      const auto& t = tkg_->triples[i];
      auto id = static_cast<NodeId>(i);
      nodes_.push_back(TripleNode{id, t, tkg_->document(t.head), tkg_->document(t.tail)});
      entity_index_[t.head].push_back(id);
      if (t.tail != t.head) entity_index_[t.tail].push_back(id);
    }
  }

  const TextualKnowledgeGraph& tkg() const noexcept { return *tkg_; }
  EdgeRule edge_rule() const noexcept { return rule_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<TripleNode>& nodes() const noexcept { return nodes_; }
  const TripleNode& node(NodeId id) const { return nodes_.at(id); }

  // Nodes whose triple contains `entity`, ascending; empty for unknown entities.
  std::span<const NodeId> incident_nodes(std::string_view entity) const {
    auto it = entity_index_.find(std::string(entity));
    if (it == entity_index_.end()) return {};
    return it->second;
  }

  bool adjacent(NodeId u, NodeId w) const {
    if (u == w) return false;
    const auto& a = nodes_.at(u).triple;
    const auto& b = nodes_.at(w).triple;
    if (rule_ == EdgeRule::tail_to_head) return a.tail == b.head || b.tail == a.head;
    return a.head == b.head || a.head == b.tail || a.tail == b.head || a.tail == b.tail;
  }

  // Sorted, deduplicated, excludes u itself.
  std::vector<NodeId> neighbors(NodeId u) const {
    const auto& t = nodes_.at(u).triple;
    std::vector<NodeId> out;
    auto collect = [&](const std::string& e) {
      for (NodeId w : incident_nodes(e))
        if (w != u && adjacent(u, w)) out.push_back(w);
    };
    collect(t.head);
    if (t.tail != t.head) collect(t.tail);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Undirected edge count m. O(n) for the any-position rule.
  std::size_t edge_count() const {
    if (rule_ == EdgeRule::any_position) {
      // Pairs counted once per shared entity; pairs over the same two
      // entities were counted twice.
      std::size_t total = 0;
      for (const auto& [_, ids] : entity_index_) total += ids.size() * (ids.size() - 1) / 2;
      std::map<std::pair<std::string_view, std::string_view>, std::size_t> parallel;
      for (const auto& n : nodes_) {
        const auto& t = n.triple;
        if (t.head == t.tail) continue;
        std::string_view a = t.head, b = t.tail;
        if (b < a) std::swap(a, b);
        ++parallel[{a, b}];
      }
      for (const auto& [_, k] : parallel) total -= k * (k - 1) / 2;
      return total;
    }
    std::size_t twice = 0;
    for (const auto& n : nodes_) twice += neighbors(n.id).size();
    return twice / 2;
  }

  std::map<NodeId, std::set<NodeId>> materialize_adjacency() const {
    std::map<NodeId, std::set<NodeId>> adj;
    for (const auto& n : nodes_) {
      auto nb = neighbors(n.id);
      adj[n.id] = std::set<NodeId>(nb.begin(), nb.end());
    }
    return adj;
  }

  const std::unordered_map<EntityId, std::vector<NodeId>>& entity_index() const noexcept { return entity_index_; }

 private:
  std::shared_ptr<const TextualKnowledgeGraph> tkg_;
  EdgeRule rule_ = EdgeRule::any_position;
  std::vector<TripleNode> nodes_;
  std::unordered_map<EntityId, std::vector<NodeId>> entity_index_;
};

inline TextualTripleGraph build_ttg(std::shared_ptr<const TextualKnowledgeGraph> tkg,
                                    EdgeRule rule = EdgeRule::any_position) {
  return TextualTripleGraph(std::move(tkg), rule);
}

inline TextualTripleGraph build_ttg(const TextualKnowledgeGraph& tkg, EdgeRule rule = EdgeRule::any_position) {
  return TextualTripleGraph(std::make_shared<const TextualKnowledgeGraph>(tkg), rule);
}

inline std::vector<NodeId> incident_nodes(const TextualTripleGraph& ttg, std::string_view entity) {
  auto s = ttg.incident_nodes(entity);
  return {s.begin(), s.end()};
}

}  // namespace relpath
