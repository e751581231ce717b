#pragma once

// Path retrieval over a textual triple graph: UCT tree search in plain (MCTS)
// and relational (RMCTS) flavours, plus the random-walk baseline.
//
// A search state is a relational path: an ordered list of levels, each level
// holding one chain node and at most one branch (constraint) node. Plain MCTS
// only ever extends the chain. RMCTS additionally offers
//   - STOP, from depth >= 1, ending the path at any depth;
//   - a branch: an untaken alternative from the candidate set the current
//     level's chain node was chosen from (one per level);
// and after a branch is taken the next level is drawn from the children of
// both nodes of the level.
//
// Rewards come from any callable `double(std::span<const NodeId>)` over the
// flattened path (chain node, then branch node, level by level).

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <iterator>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "relpath/common.hpp"
#include "relpath/embed.hpp"
#include "relpath/ttg.hpp"

namespace relpath {

enum class SearchMode { mcts, rmcts };

enum class Method { mcts, rmcts, random_walk };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::mcts:
      return "mcts";
    case Method::rmcts:
      return "rmcts";
    case Method::random_walk:
      return "random-walk";
  }
  return "?";
}

inline Method method_from_string(std::string_view s) {
  if (s == "mcts") return Method::mcts;
  if (s == "rmcts") return Method::rmcts;
  if (s == "random-walk") return Method::random_walk;
  throw ArgumentError("unknown method: " + std::string(s));
}

// How the chain may be extended from its last level.
enum class ChainRule {
  // Attach through an entity the last level introduced and reach an entity not
  // yet on the path (entity-simple relational paths).
  frontier,
  // Any TTG neighbour of the last level's nodes not already on the path.
  any_neighbor,
};

inline std::string_view to_string(ChainRule r) { return r == ChainRule::frontier ? "frontier" : "any-neighbor"; }

inline ChainRule chain_rule_from_string(std::string_view s) {
  if (s == "frontier") return ChainRule::frontier;
  if (s == "any-neighbor") return ChainRule::any_neighbor;
  throw ArgumentError("unknown chain rule: " + std::string(s));
}

struct SearchParams {
  std::size_t iterations = 5000;
  std::size_t max_depth = 3;
  double uct_c = std::numbers::sqrt2;
  std::size_t rollouts_per_expansion = 3;
  std::uint64_t seed = 0;
  std::size_t top_k = 1;
  RewardMode reward_mode = RewardMode::verbalize_then_embed;
  ChainRule chain_rule = ChainRule::frontier;

  static SearchParams defaults_for(Method m) {
    SearchParams p;
    p.top_k = m == Method::rmcts ? 1 : 3;
    return p;
  }

  void check() const {
    if (iterations < 1) throw ArgumentError("iterations must be >= 1");
    if (max_depth < 1) throw ArgumentError("max_depth must be >= 1");
    if (top_k < 1) throw ArgumentError("top_k must be >= 1");
    if (rollouts_per_expansion < 1) throw ArgumentError("rollouts_per_expansion must be >= 1");
    if (!(uct_c >= 0.0) || !std::isfinite(uct_c)) throw ArgumentError("uct_c must be a finite non-negative number");
  }
};

template <class R>
concept PathReward = requires(const R& r, std::span<const NodeId> path) {
  { r(path) } -> std::convertible_to<double>;
};

// ---------------------------------------------------------------------------
// Path state and expansion rules

struct Level {
  NodeId chain = 0;
  std::optional<NodeId> branch;
  // Candidate set `chain` was drawn from; the branch pool for this level.
  std::shared_ptr<const std::vector<NodeId>> alternatives;
};

struct PathState {
  std::vector<Level> levels;
  bool stopped = false;

  std::size_t hops() const noexcept { return levels.size(); }

  std::vector<NodeId> flatten() const {
    std::vector<NodeId> out;
    out.reserve(levels.size() * 2);
    for (const auto& l : levels) {
      out.push_back(l.chain);
      if (l.branch) out.push_back(*l.branch);
    }
    return out;
  }

  bool contains(NodeId id) const noexcept {
    for (const auto& l : levels)
      if (l.chain == id || (l.branch && *l.branch == id)) return true;
    return false;
  }
};

struct Action {
  enum class Kind : std::uint8_t { chain, branch, stop };
  Kind kind = Kind::stop;
  NodeId node = 0;

  friend bool operator==(const Action&, const Action&) = default;
};

struct ActionSet {
  std::vector<Action> actions;
  // Chain candidates of the state; becomes the next level's branch pool.
  std::shared_ptr<const std::vector<NodeId>> chain_candidates;

  bool empty() const noexcept { return actions.empty(); }
};

// Expansion rules for one topic entity over one graph.
class PathSpace {
 public:
  PathSpace(const TextualTripleGraph& ttg, EntityId topic, SearchMode mode, std::size_t max_depth,
            ChainRule rule = ChainRule::frontier)
      : ttg_(&ttg), topic_(std::move(topic)), mode_(mode), max_depth_(max_depth), rule_(rule) {}

  const TextualTripleGraph& graph() const noexcept { return *ttg_; }
  const EntityId& topic() const noexcept { return topic_; }
  SearchMode mode() const noexcept { return mode_; }
  std::size_t max_depth() const noexcept { return max_depth_; }

  std::vector<NodeId> chain_candidates(const PathState& s) const {
    if (s.levels.empty()) {
      auto inc = ttg_->incident_nodes(topic_);
      return {inc.begin(), inc.end()};
    }
    if (s.hops() >= max_depth_) return {};
    const Level& last = s.levels.back();
    std::vector<NodeId> out;
    if (rule_ == ChainRule::any_neighbor) {
      auto add = [&](NodeId u) {
        for (NodeId w : ttg_->neighbors(u))
          if (!s.contains(w)) out.push_back(w);
      };
      add(last.chain);
      if (last.branch) add(*last.branch);
    } else {
      auto visited = visited_entities(s, s.hops());
      auto before = visited_entities(s, s.hops() - 1);
      std::vector<std::string_view> frontier;
      for (NodeId id : level_nodes(last)) {
        const auto& t = ttg_->node(id).triple;
        for (const auto* e : {&t.head, &t.tail})
          if (!before.count(*e)) frontier.push_back(*e);
      }
      for (auto f : frontier) {
        for (NodeId w : ttg_->incident_nodes(f)) {
          if (s.contains(w)) continue;
          const auto& t = ttg_->node(w).triple;
          const auto& other = t.head == f ? t.tail : t.head;
          if (visited.count(other)) continue;
          if (!ttg_->adjacent(last.chain, w) && !(last.branch && ttg_->adjacent(*last.branch, w))) continue;
          out.push_back(w);
        }
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Ordered: chain children, then branch candidates, then STOP.
  ActionSet candidates(const PathState& s) const {
    ActionSet set;
    if (s.stopped) return set;
    auto chain = std::make_shared<std::vector<NodeId>>(chain_candidates(s));
    for (NodeId id : *chain) set.actions.push_back({Action::Kind::chain, id});
    if (mode_ == SearchMode::rmcts && !s.levels.empty()) {
      const Level& last = s.levels.back();
      if (!last.branch && last.alternatives)
        for (NodeId id : *last.alternatives)
          if (!s.contains(id)) set.actions.push_back({Action::Kind::branch, id});
      set.actions.push_back({Action::Kind::stop, 0});
    }
    set.chain_candidates = std::move(chain);
    return set;
  }

  PathState apply(const PathState& s, const Action& a, const ActionSet& from) const {
    PathState next = s;
    switch (a.kind) {
      case Action::Kind::stop:
        next.stopped = true;
        break;
      case Action::Kind::branch:
        next.levels.back().branch = a.node;
        break;
      case Action::Kind::chain:
        if (!next.levels.empty()) {
          // Keep the chain connected: if the new node hangs off the branch,
          // the branch becomes this level's chain node.
          Level& last = next.levels.back();
          if (last.branch && !ttg_->adjacent(last.chain, a.node) && ttg_->adjacent(*last.branch, a.node))
            std::swap(last.chain, *last.branch);
        }
        next.levels.push_back(Level{a.node, std::nullopt, from.chain_candidates});
        break;
    }
    return next;
  }

  // Entity of the level's chain node that the level introduced (the one not
  // used to enter it).
  EntityId exit_entity(const PathState& s, std::size_t level) const {
    auto before = visited_entities(s, level);
    const auto& t = ttg_->node(s.levels.at(level).chain).triple;
    if (!before.count(t.tail)) return t.tail;
    if (!before.count(t.head)) return t.head;
    return t.tail;
  }

 private:
  static std::vector<NodeId> level_nodes(const Level& l) {
    if (l.branch) return {l.chain, *l.branch};
    return {l.chain};
  }

  // Topic plus every entity on levels [0, upto).
  std::set<std::string_view> visited_entities(const PathState& s, std::size_t upto) const {
    std::set<std::string_view> v{topic_};
    for (std::size_t i = 0; i < upto && i < s.levels.size(); ++i)
      for (NodeId id : level_nodes(s.levels[i])) {
        const auto& t = ttg_->node(id).triple;
        v.insert(t.head);
        v.insert(t.tail);
      }
    return v;
  }

  const TextualTripleGraph* ttg_;
  EntityId topic_;
  SearchMode mode_;
  std::size_t max_depth_;
  ChainRule rule_;
};

// ---------------------------------------------------------------------------
// Retrieved paths

struct PathNode {
  NodeId node = 0;
  Triple triple;
  std::size_t level = 0;  // 1-based depth
  bool branch = false;

  friend bool operator==(const PathNode&, const PathNode&) = default;
};

struct RetrievedPath {
  std::vector<PathNode> nodes;  // level order; chain node before its branch
  double score = 0.0;
  std::vector<EntityId> terminal_entities;
  std::size_t hop_count = 0;

  std::vector<PathNode> chain() const {
    std::vector<PathNode> out;
    for (const auto& n : nodes)
      if (!n.branch) out.push_back(n);
    return out;
  }
};

struct Trajectory {
  RetrievedPath path;
  bool stopped_early = false;
};

// Terminal entity of a path: the last chain node's entity that was not used to
// enter it; nullopt when that is the topic entity itself.
inline std::optional<EntityId> terminal_entity(const RetrievedPath& path, std::string_view topic) {
  if (path.nodes.empty()) return std::nullopt;
  std::size_t last_level = 0;
  for (const auto& n : path.nodes) last_level = std::max(last_level, n.level);
  std::set<std::string_view> before{topic};
  const PathNode* last_chain = nullptr;
  for (const auto& n : path.nodes) {
    if (n.level < last_level) {
      before.insert(n.triple.head);
      before.insert(n.triple.tail);
    } else if (!n.branch) {
      last_chain = &n;
    }
  }
  if (!last_chain) return std::nullopt;
  const auto& t = last_chain->triple;
  EntityId exit = !before.count(t.tail) ? t.tail : !before.count(t.head) ? t.head : t.tail;
  if (exit == topic) return std::nullopt;
  return exit;
}

// One answer per trajectory, deduplicated, rank order preserved.
inline std::vector<EntityId> extract_answers(std::span<const Trajectory> trajectories, std::string_view topic) {
  std::vector<EntityId> out;
  for (const auto& tr : trajectories) {
    auto e = terminal_entity(tr.path, topic);
    if (e && std::find(out.begin(), out.end(), *e) == out.end()) out.push_back(std::move(*e));
  }
  return out;
}

inline RetrievedPath make_path(const PathSpace& space, const PathState& s, double score) {
  RetrievedPath p;
  p.hop_count = s.hops();
  p.score = score;
  for (std::size_t i = 0; i < s.levels.size(); ++i) {
    const auto& l = s.levels[i];
    p.nodes.push_back({l.chain, space.graph().node(l.chain).triple, i + 1, false});
    if (l.branch) p.nodes.push_back({*l.branch, space.graph().node(*l.branch).triple, i + 1, true});
  }
  if (auto e = terminal_entity(p, space.topic())) p.terminal_entities.push_back(*e);
  return p;
}

// Jaccard overlap between the path's nodes and a fixed node set. Maximal (1)
// exactly when the path holds the set and nothing else; used as an oracle
// reward on planted graphs.
class NodeSetReward {
 public:
  explicit NodeSetReward(std::vector<NodeId> target) : target_(std::move(target)) {
    std::sort(target_.begin(), target_.end());
    target_.erase(std::unique(target_.begin(), target_.end()), target_.end());
  }

  double operator()(std::span<const NodeId> path) const {
    std::vector<NodeId> p(path.begin(), path.end());
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    std::vector<NodeId> common;
    std::set_intersection(p.begin(), p.end(), target_.begin(), target_.end(), std::back_inserter(common));
    std::size_t uni = p.size() + target_.size() - common.size();
    return uni ? static_cast<double>(common.size()) / static_cast<double>(uni) : 0.0;
  }

 private:
  std::vector<NodeId> target_;
};

// ---------------------------------------------------------------------------
// Search tree

struct SearchNode {
  enum class Kind : std::uint8_t { root, triple, stop };

  Kind kind = Kind::root;
  NodeId triple = 0;  // valid when kind == triple
  std::int64_t parent = -1;
  std::uint32_t depth = 0;   // path levels; branch and STOP steps keep the parent's depth
  bool branch_step = false;  // added as a branch of its level
  std::uint64_t visits = 0;
  double total_reward = 0.0;
  std::vector<std::uint32_t> children;
  bool expanded = false;
  bool terminal = false;
  PathState state;

  double mean_reward() const noexcept { return visits ? total_reward / static_cast<double>(visits) : 0.0; }
};

// W/N + c * sqrt(log_parent / N); +inf when N == 0.
inline double uct_value(double total_reward, double visits, double log_parent, double c) {
  if (visits <= 0.0) return std::numeric_limits<double>::infinity();
  return total_reward / visits + c * std::sqrt(std::max(0.0, log_parent) / visits);
}

inline double uct_score(const SearchNode& child, std::uint64_t parent_visits, double c) {
  double log_parent = parent_visits > 0 ? std::log(static_cast<double>(parent_visits)) : 0.0;
  return uct_value(child.total_reward, static_cast<double>(child.visits), log_parent, c);
}

// Adds one visit and `reward` to the leaf and every ancestor.
inline void backpropagate(std::vector<SearchNode>& tree, std::uint32_t leaf, double reward) {
  for (std::int64_t i = leaf; i >= 0; i = tree[static_cast<std::size_t>(i)].parent) {
    auto& n = tree[static_cast<std::size_t>(i)];
    ++n.visits;
    n.total_reward += reward;
  }
}

template <PathReward Reward>
class TreeSearch {
 public:
  TreeSearch(const TextualTripleGraph& ttg, EntityId topic, Reward reward, SearchParams params, SearchMode mode)
      : space_(ttg, std::move(topic), mode, params.max_depth, params.chain_rule),
        reward_(std::move(reward)),
        params_(params),
        rng_(params.seed) {
    params_.check();
    if (!ttg.tkg().has_entity(space_.topic())) throw RetrievalError("unknown topic entity: " + space_.topic());
    if (ttg.incident_nodes(space_.topic()).empty())
      throw RetrievalError("topic entity has no incident triples: " + space_.topic());
    tree_.emplace_back();
  }

  void run() {
    for (std::size_t i = 0; i < params_.iterations; ++i) iterate();
  }

  // One selection / expansion / simulation / back-propagation cycle.
  void iterate() {
    std::uint32_t idx = 0;
    double reward = 0.0;
    for (;;) {
      if (!tree_[idx].expanded) expand(idx);
      if (tree_[idx].terminal) {
        reward = state_reward(tree_[idx].state);
        break;
      }
      std::uint32_t child = select(idx);
      idx = child;
      if (tree_[idx].visits == 0) {
        reward = simulate(idx);
        break;
      }
    }
    backpropagate(tree_, idx, reward);
  }

  // Top-k trajectories by ranked descent: children ordered by mean reward,
  // then visit count, then node id. The first one is the greedy descent.
  std::vector<Trajectory> best(std::size_t k) const {
    std::vector<Trajectory> out;
    std::set<std::vector<NodeId>> seen;
    collect(0, k, out, seen);
    return out;
  }

  const std::vector<SearchNode>& tree() const noexcept { return tree_; }
  const PathSpace& space() const noexcept { return space_; }
  const SearchParams& params() const noexcept { return params_; }

  double state_reward(const PathState& s) const {
    if (s.levels.empty()) return 0.0;
    auto flat = s.flatten();
    return static_cast<double>(reward_(std::span<const NodeId>(flat)));
  }

  // Average reward of rollouts_per_expansion uniform rollouts from `idx`
  // (exact reward when the node is terminal).
  double simulate(std::uint32_t idx) {
    expand(idx);
    if (tree_[idx].terminal) return state_reward(tree_[idx].state);
    double sum = 0.0;
    for (std::size_t r = 0; r < params_.rollouts_per_expansion; ++r) sum += rollout(tree_[idx].state);
    return sum / static_cast<double>(params_.rollouts_per_expansion);
  }

  double rollout(PathState s) {
    for (;;) {
      auto set = space_.candidates(s);
      if (set.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0, set.actions.size() - 1);
      const Action a = set.actions[pick(rng_)];
      s = space_.apply(s, a, set);
      if (s.stopped) break;
    }
    return state_reward(s);
  }

  void expand(std::uint32_t idx) {
    if (tree_[idx].expanded) return;
    tree_[idx].expanded = true;
    if (tree_[idx].kind == SearchNode::Kind::stop) {
      tree_[idx].terminal = true;
      return;
    }
    auto set = space_.candidates(tree_[idx].state);
    if (set.empty()) {
      tree_[idx].terminal = true;
      return;
    }
    const std::uint32_t depth = tree_[idx].depth;
    for (const auto& a : set.actions) {
      SearchNode child;
      child.parent = idx;
      child.state = space_.apply(tree_[idx].state, a, set);
      switch (a.kind) {
        case Action::Kind::chain:
          child.kind = SearchNode::Kind::triple;
          child.triple = a.node;
          child.depth = depth + 1;
          break;
        case Action::Kind::branch:
          child.kind = SearchNode::Kind::triple;
          child.triple = a.node;
          child.depth = depth;
          child.branch_step = true;
          break;
        case Action::Kind::stop:
          child.kind = SearchNode::Kind::stop;
          child.depth = depth;
          break;
      }
      auto cidx = static_cast<std::uint32_t>(tree_.size());
      tree_.push_back(std::move(child));
      tree_[idx].children.push_back(cidx);
    }
  }

  // UCT argmax; unvisited children first, ties to the earliest child.
  std::uint32_t select(std::uint32_t idx) const {
    const auto& node = tree_[idx];
    std::uint32_t best = node.children.front();
    double best_score = -std::numeric_limits<double>::infinity();
    for (auto c : node.children) {
      double s = uct_score(tree_[c], node.visits, params_.uct_c);
      if (s > best_score) {
        best = c;
        best_score = s;
        if (std::isinf(s)) break;
      }
    }
    return best;
  }

 private:
  bool ranks_before(std::uint32_t a, std::uint32_t b) const {
    const auto& x = tree_[a];
    const auto& y = tree_[b];
    if (x.mean_reward() != y.mean_reward()) return x.mean_reward() > y.mean_reward();
    if (x.visits != y.visits) return x.visits > y.visits;
    return sort_id(x) < sort_id(y);
  }

  static std::uint64_t sort_id(const SearchNode& n) {
    return n.kind == SearchNode::Kind::stop ? std::numeric_limits<std::uint64_t>::max() : n.triple;
  }

  void collect(std::uint32_t idx, std::size_t k, std::vector<Trajectory>& out,
               std::set<std::vector<NodeId>>& seen) const {
    if (out.size() >= k) return;
    const auto& node = tree_[idx];
    std::vector<std::uint32_t> visited;
    for (auto c : node.children)
      if (tree_[c].visits > 0) visited.push_back(c);
    if (node.terminal || visited.empty()) {
      emit(node.terminal ? node.state : complete_greedily(node.state), out, seen);
      return;
    }
    std::sort(visited.begin(), visited.end(), [&](auto a, auto b) { return ranks_before(a, b); });
    for (auto c : visited) {
      if (out.size() >= k) return;
      collect(c, k, out, seen);
    }
  }

  // Deterministic completion for nodes the search never expanded: repeatedly
  // take the action with the best immediate reward.
  PathState complete_greedily(PathState s) const {
    for (;;) {
      auto set = space_.candidates(s);
      if (set.empty()) return s;
      PathState best_state;
      double best_r = -std::numeric_limits<double>::infinity();
      for (const auto& a : set.actions) {
        auto next = space_.apply(s, a, set);
        double r = state_reward(next);
        if (r > best_r) {
          best_r = r;
          best_state = std::move(next);
        }
      }
      s = std::move(best_state);
      if (s.stopped) return s;
    }
  }

  // The reward sees a level's two nodes as a set, so chain and branch of the
  // final level are interchangeable to the search. The one that matches the
  // query better on its own is taken as the chain (it carries the answer).
  PathState orient_last_level(PathState s) const {
    auto& last = s.levels.back();
    if (!last.branch) return s;
    PathState chain_only = s, branch_only = s;
    chain_only.levels.back().branch.reset();
    branch_only.levels.back().chain = *last.branch;
    branch_only.levels.back().branch.reset();
    if (state_reward(branch_only) > state_reward(chain_only)) std::swap(last.chain, *last.branch);
    return s;
  }

  void emit(PathState s, std::vector<Trajectory>& out, std::set<std::vector<NodeId>>& seen) const {
    if (s.levels.empty()) return;
    s = orient_last_level(std::move(s));
    std::vector<NodeId> key;
    for (const auto& l : s.levels) {
      key.push_back(l.chain);
      key.push_back(l.branch ? *l.branch : std::numeric_limits<NodeId>::max());
    }
    if (!seen.insert(key).second) return;
    Trajectory t;
    t.path = make_path(space_, s, state_reward(s));
    t.stopped_early = space_.mode() == SearchMode::rmcts && s.stopped && s.hops() < space_.max_depth();
    out.push_back(std::move(t));
  }

  PathSpace space_;
  Reward reward_;
  SearchParams params_;
  std::mt19937_64 rng_;
  std::vector<SearchNode> tree_;
};

template <PathReward Reward>
std::vector<Trajectory> tree_search_retrieve(const TextualTripleGraph& ttg, const EntityId& topic, Reward reward,
                                             const SearchParams& params, SearchMode mode) {
  TreeSearch<Reward> search(ttg, topic, std::move(reward), params, mode);
  search.run();
  return search.best(params.top_k);
}

// Uniform walks of length <= max_depth from the topic's incident nodes, never
// revisiting a node; distinct walks ranked by reward (ties: first seen).
template <PathReward Reward>
std::vector<Trajectory> random_walk_retrieve(const TextualTripleGraph& ttg, const EntityId& topic,
                                             const SearchParams& params, const Reward& reward) {
  params.check();
  if (!ttg.tkg().has_entity(topic)) throw RetrievalError("unknown topic entity: " + topic);
  if (ttg.incident_nodes(topic).empty()) throw RetrievalError("topic entity has no incident triples: " + topic);
  PathSpace space(ttg, topic, SearchMode::mcts, params.max_depth, params.chain_rule);
  std::mt19937_64 rng(params.seed);
  struct Walk {
    PathState state;
    double score;
    std::size_t order;
  };
  std::vector<Walk> walks;
  std::set<std::vector<NodeId>> seen;
  for (std::size_t i = 0; i < params.iterations; ++i) {
    PathState s;
    for (;;) {
      auto set = space.candidates(s);
      if (set.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0, set.actions.size() - 1);
      s = space.apply(s, set.actions[pick(rng)], set);
    }
    auto flat = s.flatten();
    if (!seen.insert(flat).second) continue;
    double r = static_cast<double>(reward(std::span<const NodeId>(flat)));
    walks.push_back({std::move(s), r, walks.size()});
  }
  std::stable_sort(walks.begin(), walks.end(), [](const Walk& a, const Walk& b) { return a.score > b.score; });
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < walks.size() && out.size() < params.top_k; ++i)
    out.push_back({make_path(space, walks[i].state, walks[i].score), false});
  return out;
}

inline std::vector<Trajectory> mcts_retrieve(const TextualTripleGraph& ttg, const EntityId& topic,
                                             std::string_view query, Embedder& embedder, const SearchParams& params) {
  return tree_search_retrieve(ttg, topic, EmbeddingReward(ttg, embedder, query, params.reward_mode), params,
                              SearchMode::mcts);
}

inline std::vector<Trajectory> rmcts_retrieve(const TextualTripleGraph& ttg, const EntityId& topic,
                                              std::string_view query, Embedder& embedder, const SearchParams& params) {
  return tree_search_retrieve(ttg, topic, EmbeddingReward(ttg, embedder, query, params.reward_mode), params,
                              SearchMode::rmcts);
}

inline std::vector<Trajectory> random_walk_retrieve(const TextualTripleGraph& ttg, const EntityId& topic,
                                                    std::string_view query, Embedder& embedder,
                                                    const SearchParams& params) {
  return random_walk_retrieve(ttg, topic, params, EmbeddingReward(ttg, embedder, query, params.reward_mode));
}

inline std::vector<Trajectory> retrieve(Method method, const TextualTripleGraph& ttg, const EntityId& topic,
                                        std::string_view query, Embedder& embedder, const SearchParams& params) {
  switch (method) {
    case Method::mcts:
      return mcts_retrieve(ttg, topic, query, embedder, params);
    case Method::rmcts:
      return rmcts_retrieve(ttg, topic, query, embedder, params);
    case Method::random_walk:
      return random_walk_retrieve(ttg, topic, query, embedder, params);
  }
  return {};
}

}  // namespace relpath
