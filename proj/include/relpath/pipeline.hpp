#pragma once

// Query batch driver: retrieval + prompting + answer generation per query,
// retrieval record files, and sweep bookkeeping.

#include <atomic>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "relpath/common.hpp"
#include "relpath/embed.hpp"
#include "relpath/eval.hpp"
#include "relpath/prompt.hpp"
#include "relpath/search.hpp"
#include "relpath/ttg.hpp"

namespace relpath {

struct RetrievalRecord {
  std::string id;
  Method method = Method::rmcts;
  SearchParams params;
  std::vector<Trajectory> trajectories;
  std::vector<std::string> answers;
  bool parse_warning = false;
  std::string error;  // non-empty when the query failed
};

inline nlohmann::json to_json(const SearchParams& p) {
  return {{"iterations", p.iterations},
          {"max_depth", p.max_depth},
          {"uct_c", p.uct_c},
          {"rollouts_per_expansion", p.rollouts_per_expansion},
          {"seed", p.seed},
          {"top_k", p.top_k},
          {"reward_mode", to_string(p.reward_mode)},
          {"chain_rule", to_string(p.chain_rule)}};
}

inline SearchParams search_params_from_json(const nlohmann::json& j) {
  SearchParams p;
  p.iterations = j.value("iterations", p.iterations);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.uct_c = j.value("uct_c", p.uct_c);
  p.rollouts_per_expansion = j.value("rollouts_per_expansion", p.rollouts_per_expansion);
  p.seed = j.value("seed", p.seed);
  p.top_k = j.value("top_k", p.top_k);
  p.reward_mode = reward_mode_from_string(j.value("reward_mode", std::string(to_string(p.reward_mode))));
  p.chain_rule = chain_rule_from_string(j.value("chain_rule", std::string(to_string(p.chain_rule))));
  return p;
}

inline nlohmann::json to_json(const RetrievalRecord& r) {
  nlohmann::json trajs = nlohmann::json::array();
  for (const auto& t : r.trajectories) {
    nlohmann::json nodes = nlohmann::json::array(), ids = nlohmann::json::array(), levels = nlohmann::json::array(),
                   branch = nlohmann::json::array();
    for (const auto& n : t.path.nodes) {
      nodes.push_back({n.triple.head, n.triple.relation, n.triple.tail});
      ids.push_back(n.node);
      levels.push_back(n.level);
      branch.push_back(n.branch);
    }
    trajs.push_back({{"nodes", nodes},
                     {"node_ids", ids},
                     {"levels", levels},
                     {"branch", branch},
                     {"score", t.path.score},
                     {"hops", t.path.hop_count},
                     {"stopped_early", t.stopped_early},
                     {"terminal", t.path.terminal_entities},
                     {"verbalized", verbalize_path(t.path)}});
  }
  nlohmann::json j{{"id", r.id},
                   {"method", to_string(r.method)},
                   {"params", to_json(r.params)},
                   {"trajectories", trajs},
                   {"answers", r.answers}};
  if (r.parse_warning) j["parse_warning"] = true;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline RetrievalRecord retrieval_record_from_json(const nlohmann::json& j) {
  RetrievalRecord r;
  r.id = j.at("id").get<std::string>();
  r.method = method_from_string(j.value("method", "rmcts"));
  if (j.contains("params")) r.params = search_params_from_json(j["params"]);
  for (const auto& t : j.value("trajectories", nlohmann::json::array())) {
    Trajectory tr;
    const auto& nodes = t.at("nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      PathNode n;
      n.triple = {nodes[i].at(0).get<std::string>(), nodes[i].at(1).get<std::string>(),
                  nodes[i].at(2).get<std::string>()};
      if (t.contains("node_ids")) n.node = t["node_ids"].at(i).get<NodeId>();
      n.level = t.contains("levels") ? t["levels"].at(i).get<std::size_t>() : i + 1;
      n.branch = t.contains("branch") ? t["branch"].at(i).get<bool>() : false;
      tr.path.nodes.push_back(std::move(n));
    }
    tr.path.score = t.value("score", 0.0);
    tr.path.hop_count = t.value("hops", std::size_t{0});
    tr.path.terminal_entities = t.value("terminal", std::vector<std::string>{});
    tr.stopped_early = t.value("stopped_early", false);
    r.trajectories.push_back(std::move(tr));
  }
  r.answers = j.value("answers", std::vector<std::string>{});
  r.parse_warning = j.value("parse_warning", false);
  r.error = j.value("error", "");
  return r;
}

inline void write_retrievals(std::ostream& out, std::span<const RetrievalRecord> records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

inline std::vector<RetrievalRecord> read_retrievals(std::istream& in) {
  std::vector<RetrievalRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(retrieval_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad retrieval record: ") + e.what(), lineno);
    } catch (const ArgumentError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

// id -> answers; a repeated id is an input error.
inline std::map<std::string, std::vector<std::string>> predictions_of(std::span<const RetrievalRecord> records) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& r : records)
    if (!out.emplace(r.id, r.answers).second) throw InputError("duplicate prediction id: " + r.id);
  return out;
}

struct RunOptions {
  Method method = Method::rmcts;
  SearchParams params;
  std::size_t workers = 1;
  LlmClient* llm = nullptr;  // null: no answers
  PromptTemplate prompt;
};

// Seed of one query: independent of worker count and query order.
inline std::uint64_t query_seed(std::uint64_t seed, std::string_view id) { return mix_seed(seed, text::fnv1a(id)); }

inline RetrievalRecord run_query(const TextualTripleGraph& ttg, const QueryRecord& q, Embedder& embedder,
                                 const RunOptions& opt) {
  RetrievalRecord r;
  r.id = q.id;
  r.method = opt.method;
  r.params = opt.params;
  try {
    SearchParams p = opt.params;
    p.seed = query_seed(opt.params.seed, q.id);
    r.trajectories = retrieve(opt.method, ttg, q.topic_entity, q.query, embedder, p);
    if (opt.llm) {
      std::vector<RetrievedPath> paths;
      for (const auto& t : r.trajectories) paths.push_back(t.path);
      auto gen = generate_answers(*opt.llm, build_prompt(q.query, paths, opt.prompt), paths);
      r.parse_warning = gen.parse_warning;
      // Entity ids become display labels.
      for (auto& a : gen.answers) {
        auto it = ttg.tkg().entities.find(a);
        r.answers.push_back(it == ttg.tkg().entities.end() ? a : it->second.label);
      }
    }
  } catch (const Error& e) {
    r.error = e.what();
    r.trajectories.clear();
    r.answers.clear();
  }
  return r;
}

// Output order follows `queries` regardless of the worker count.
inline std::vector<RetrievalRecord> run_queries(const TextualTripleGraph& ttg, std::span<const QueryRecord> queries,
                                                Embedder& embedder, const RunOptions& opt) {
  std::vector<RetrievalRecord> out(queries.size());
  std::size_t workers = std::max<std::size_t>(1, std::min(opt.workers, queries.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = run_query(ttg, queries[i], embedder, opt);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < queries.size();) out[i] = run_query(ttg, queries[i], embedder, opt);
    });
  for (auto& t : pool) t.join();
  return out;
}

// True when every gold step's triple appears in the path.
inline bool contains_gold(const RetrievedPath& path, std::span<const GoldStep> gold) {
  for (const auto& s : gold) {
    bool found = false;
    for (const auto& n : path.nodes) found = found || n.triple == s.triple;
    if (!found) return false;
  }
  return true;
}

// Fraction of queries with gold paths whose top trajectory contains every
// gold triple. Queries without a gold path are skipped.
inline double recovery_rate(std::span<const QueryRecord> queries, std::span<const RetrievalRecord> runs) {
  std::map<std::string, const RetrievalRecord*> by_id;
  for (const auto& r : runs) by_id[r.id] = &r;
  std::size_t total = 0, hit = 0;
  for (const auto& q : queries) {
    if (q.gold_path.empty()) continue;
    ++total;
    auto it = by_id.find(q.id);
    if (it == by_id.end() || it->second->trajectories.empty()) continue;
    hit += contains_gold(it->second->trajectories.front().path, q.gold_path);
  }
  return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

}  // namespace relpath
