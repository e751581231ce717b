#pragma once

// Query records, Exact Match / ROUGE-1 scoring and run-level aggregation.

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "relpath/common.hpp"
#include "relpath/tkg.hpp"

namespace relpath {

enum class Split { train, val, test };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train:
      return "train";
    case Split::val:
      return "val";
    case Split::test:
      return "test";
  }
  return "?";
}

inline Split split_from_string(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw ArgumentError("unknown split: " + std::string(s));
}

// Gold path step attached to synthetic queries (optional in query files).
struct GoldStep {
  Triple triple;
  std::size_t level = 1;
  bool branch = false;

  friend bool operator==(const GoldStep&, const GoldStep&) = default;
};

struct QueryRecord {
  std::string id;
  std::string query;
  EntityId topic_entity;
  std::vector<std::string> gold_answers;
  std::string structure;
  Split split = Split::test;
  // Provenance written by the synthetic generator; empty for external data.
  std::string template_id;
  std::string filter_keyword;
  std::vector<GoldStep> gold_path;
};

inline constexpr std::size_t kMaxGoldAnswers = 3;

inline nlohmann::json to_json(const QueryRecord& r) {
  nlohmann::json j{{"id", r.id},
                   {"query", r.query},
                   {"topic_entity", r.topic_entity},
                   {"answers", r.gold_answers},
                   {"structure", r.structure},
                   {"split", to_string(r.split)}};
  if (!r.template_id.empty()) j["template"] = r.template_id;
  if (!r.filter_keyword.empty()) j["filter"] = r.filter_keyword;
  if (!r.gold_path.empty()) {
    auto& gp = j["gold_path"] = nlohmann::json::array();
    for (const auto& s : r.gold_path)
      gp.push_back({{"triple", {s.triple.head, s.triple.relation, s.triple.tail}},
                    {"level", s.level},
                    {"branch", s.branch}});
  }
  return j;
}

inline QueryRecord query_record_from_json(const nlohmann::json& j) {
  QueryRecord r;
  r.id = j.at("id").get<std::string>();
  r.query = j.at("query").get<std::string>();
  r.topic_entity = j.at("topic_entity").get<std::string>();
  r.gold_answers = j.at("answers").get<std::vector<std::string>>();
  r.structure = j.value("structure", "");
  r.split = split_from_string(j.value("split", "test"));
  r.template_id = j.value("template", "");
  r.filter_keyword = j.value("filter", "");
  if (j.contains("gold_path"))
    for (const auto& s : j["gold_path"]) {
      const auto& t = s.at("triple");
      r.gold_path.push_back({Triple{t.at(0).get<std::string>(), t.at(1).get<std::string>(), t.at(2).get<std::string>()},
                             s.value("level", std::size_t{1}), s.value("branch", false)});
    }
  if (r.id.empty()) throw InputError("query record with empty id");
  if (r.gold_answers.empty()) throw InputError("query " + r.id + " has no gold answers");
  if (r.gold_answers.size() > kMaxGoldAnswers) throw InputError("query " + r.id + " has more than 3 gold answers");
  return r;
}

inline std::vector<QueryRecord> read_queries(std::istream& in) {
  std::vector<QueryRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(query_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad query record: ") + e.what(), lineno);
    } catch (const InputError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

inline void write_queries(std::ostream& out, std::span<const QueryRecord> records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Metrics

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

// Lowercase; punctuation becomes whitespace; whitespace collapsed and trimmed.
inline std::string normalize_answer(std::string_view s) {
  std::string spaced;
  spaced.reserve(s.size());
  for (unsigned char c : s) spaced.push_back(std::ispunct(c) ? ' ' : static_cast<char>(c));
  return text::normalize_whitespace_lower(spaced);
}

namespace detail {

inline std::vector<std::string> normalized_set(std::span<const std::string> xs) {
  std::vector<std::string> out;
  for (const auto& x : xs) {
    auto n = normalize_answer(x);
    if (!n.empty() && std::find(out.begin(), out.end(), n) == out.end()) out.push_back(std::move(n));
  }
  return out;
}

inline std::map<std::string, std::size_t> unigram_counts(std::string_view s) {
  std::map<std::string, std::size_t> c;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) ++c[tok];
  return c;
}

inline std::size_t total(const std::map<std::string, std::size_t>& c) {
  std::size_t n = 0;
  for (const auto& [_, k] : c) n += k;
  return n;
}

inline std::size_t overlap(const std::map<std::string, std::size_t>& a, const std::map<std::string, std::size_t>& b) {
  std::size_t n = 0;
  for (const auto& [tok, k] : a)
    if (auto it = b.find(tok); it != b.end()) n += std::min(k, it->second);
  return n;
}

struct RougeCounts {
  std::size_t overlap = 0, pred_tokens = 0, gold_tokens = 0;
};

}  // namespace detail

struct EmCounts {
  std::size_t hits = 0, predicted = 0, gold = 0;
};

inline EmCounts em_counts(std::span<const std::string> predicted, std::span<const std::string> gold) {
  auto p = detail::normalized_set(predicted);
  auto g = detail::normalized_set(gold);
  EmCounts c{0, p.size(), g.size()};
  for (const auto& x : p)
    if (std::find(g.begin(), g.end(), x) != g.end()) ++c.hits;
  return c;
}

// Set-level exact match over normalized answers.
inline Prf em_prf(std::span<const std::string> predicted, std::span<const std::string> gold) {
  auto c = em_counts(predicted, gold);
  Prf r;
  r.precision = c.predicted ? static_cast<double>(c.hits) / static_cast<double>(c.predicted) : 0.0;
  r.recall = c.gold ? static_cast<double>(c.hits) / static_cast<double>(c.gold) : 0.0;
  r.f1 = harmonic(r.precision, r.recall);
  return r;
}

struct RougeAlignment {
  Prf score;
  detail::RougeCounts counts;  // summed over aligned pairs; token totals over all answers
};

// Greedy alignment: predictions in order, each takes the unused gold with the
// highest unigram F1 (> 0). P averages over predictions, R over golds
// (unmatched entries count 0); F1 is their harmonic mean.
inline RougeAlignment rouge1_align(std::span<const std::string> predicted, std::span<const std::string> gold) {
  auto p = detail::normalized_set(predicted);
  auto g = detail::normalized_set(gold);
  std::vector<std::map<std::string, std::size_t>> pc, gc;
  for (const auto& x : p) pc.push_back(detail::unigram_counts(x));
  for (const auto& x : g) gc.push_back(detail::unigram_counts(x));
  std::vector<bool> used(g.size(), false);
  double psum = 0.0;
  std::vector<double> gold_recall(g.size(), 0.0);
  RougeAlignment out;
  for (const auto& c : pc) out.counts.pred_tokens += detail::total(c);
  for (const auto& c : gc) out.counts.gold_tokens += detail::total(c);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    std::size_t best = g.size();
    double best_f1 = 0.0;
    for (std::size_t j = 0; j < gc.size(); ++j) {
      if (used[j]) continue;
      auto ov = static_cast<double>(detail::overlap(pc[i], gc[j]));
      double f1 = harmonic(ov / static_cast<double>(detail::total(pc[i])), ov / static_cast<double>(detail::total(gc[j])));
      if (f1 > best_f1) {
        best_f1 = f1;
        best = j;
      }
    }
    if (best == g.size()) continue;
    used[best] = true;
    auto ov = detail::overlap(pc[i], gc[best]);
    out.counts.overlap += ov;
    psum += static_cast<double>(ov) / static_cast<double>(detail::total(pc[i]));
    gold_recall[best] = static_cast<double>(ov) / static_cast<double>(detail::total(gc[best]));
  }
  double rsum = 0.0;
  for (double r : gold_recall) rsum += r;
  out.score.precision = p.empty() ? 0.0 : psum / static_cast<double>(p.size());
  out.score.recall = g.empty() ? 0.0 : rsum / static_cast<double>(g.size());
  out.score.f1 = harmonic(out.score.precision, out.score.recall);
  return out;
}

inline Prf rouge1_prf(std::span<const std::string> predicted, std::span<const std::string> gold) {
  return rouge1_align(predicted, gold).score;
}

// ---------------------------------------------------------------------------
// Run aggregation

struct EvalRow {
  std::string id;
  std::vector<std::string> predicted;
  std::vector<std::string> gold;
  bool missing_prediction = false;
  Prf em;
  Prf rouge1;
};

struct EvalReport {
  std::string method;
  nlohmann::json params = nlohmann::json::object();
  std::vector<EvalRow> rows;
  Prf macro_em, macro_rouge1;
  Prf micro_em, micro_rouge1;
  std::vector<std::string> missing_ids;
  double mean_answers = 0.0;  // predicted answers per query
};

inline EvalReport evaluate_run(const std::map<std::string, std::vector<std::string>>& predictions,
                               std::span<const QueryRecord> records, std::optional<Split> split = std::nullopt) {
  std::set<std::string> ids;
  for (const auto& r : records)
    if (!ids.insert(r.id).second) throw InputError("duplicate query id: " + r.id);

  EvalReport rep;
  EmCounts em_sum;
  detail::RougeCounts rg_sum;
  std::size_t answer_sum = 0;
  for (const auto& rec : records) {
    if (split && rec.split != *split) continue;
    EvalRow row;
    row.id = rec.id;
    row.gold = rec.gold_answers;
    if (auto it = predictions.find(rec.id); it != predictions.end()) {
      row.predicted = it->second;
    } else {
      row.missing_prediction = true;
      rep.missing_ids.push_back(rec.id);
    }
    row.em = em_prf(row.predicted, row.gold);
    auto rg = rouge1_align(row.predicted, row.gold);
    row.rouge1 = rg.score;
    auto c = em_counts(row.predicted, row.gold);
    em_sum.hits += c.hits;
    em_sum.predicted += c.predicted;
    em_sum.gold += c.gold;
    rg_sum.overlap += rg.counts.overlap;
    rg_sum.pred_tokens += rg.counts.pred_tokens;
    rg_sum.gold_tokens += rg.counts.gold_tokens;
    answer_sum += c.predicted;
    rep.rows.push_back(std::move(row));
  }
  if (!rep.rows.empty()) {
    auto n = static_cast<double>(rep.rows.size());
    for (const auto& r : rep.rows) {
      rep.macro_em.precision += r.em.precision / n;
      rep.macro_em.recall += r.em.recall / n;
      rep.macro_em.f1 += r.em.f1 / n;
      rep.macro_rouge1.precision += r.rouge1.precision / n;
      rep.macro_rouge1.recall += r.rouge1.recall / n;
      rep.macro_rouge1.f1 += r.rouge1.f1 / n;
    }
    rep.mean_answers = static_cast<double>(answer_sum) / n;
  }
  auto ratio = [](std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
  rep.micro_em = {ratio(em_sum.hits, em_sum.predicted), ratio(em_sum.hits, em_sum.gold), 0.0};
  rep.micro_em.f1 = harmonic(rep.micro_em.precision, rep.micro_em.recall);
  rep.micro_rouge1 = {ratio(rg_sum.overlap, rg_sum.pred_tokens), ratio(rg_sum.overlap, rg_sum.gold_tokens), 0.0};
  rep.micro_rouge1.f1 = harmonic(rep.micro_rouge1.precision, rep.micro_rouge1.recall);
  return rep;
}

inline nlohmann::json to_json(const Prf& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"id", row.id},
                    {"predicted", row.predicted},
                    {"gold", row.gold},
                    {"missing_prediction", row.missing_prediction},
                    {"em", to_json(row.em)},
                    {"rouge1", to_json(row.rouge1)}});
  return {{"method", r.method},
          {"params", r.params},
          {"queries", r.rows.size()},
          {"macro", {{"em", to_json(r.macro_em)}, {"rouge1", to_json(r.macro_rouge1)}}},
          {"micro", {{"em", to_json(r.micro_em)}, {"rouge1", to_json(r.micro_rouge1)}}},
          {"mean_answers", r.mean_answers},
          {"missing_ids", r.missing_ids},
          {"rows", rows}};
}

namespace detail {
inline std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%6.2f", v * 100.0);
  return buf;
}
}  // namespace detail

// Macro and micro P/R/F1 table, in percent.
inline void write_table(std::ostream& out, const EvalReport& r) {
  out << "method: " << (r.method.empty() ? "-" : r.method) << "   queries: " << r.rows.size()
      << "   answers/query: " << std::fixed << std::setprecision(2) << r.mean_answers << "\n";
  out << "           |      Exact Match       |        ROUGE-1\n";
  out << "           |   P       R       F1   |   P       R       F1\n";
  auto line = [&](std::string_view name, const Prf& em, const Prf& rg) {
    out << std::left << std::setw(10) << name << " | " << detail::pct(em.precision) << "  " << detail::pct(em.recall)
        << "  " << detail::pct(em.f1) << " | " << detail::pct(rg.precision) << "  " << detail::pct(rg.recall) << "  "
        << detail::pct(rg.f1) << "\n";
  };
  line("macro", r.macro_em, r.macro_rouge1);
  line("micro", r.micro_em, r.micro_rouge1);
  out << std::right;
  if (!r.missing_ids.empty()) out << "missing predictions: " << r.missing_ids.size() << "\n";
}

inline void write_csv(std::ostream& out, const EvalReport& r) {
  out << "id,em_p,em_r,em_f1,rouge1_p,rouge1_r,rouge1_f1,missing\n";
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  auto row = [&](std::string_view id, const Prf& em, const Prf& rg, bool missing) {
    out << id << ',' << num(em.precision) << ',' << num(em.recall) << ',' << num(em.f1) << ',' << num(rg.precision)
        << ',' << num(rg.recall) << ',' << num(rg.f1) << ',' << (missing ? 1 : 0) << '\n';
  };
  for (const auto& x : r.rows) row(nlohmann::json(x.id).dump(), x.em, x.rouge1, x.missing_prediction);
  row("__macro__", r.macro_em, r.macro_rouge1, false);
  row("__micro__", r.micro_em, r.micro_rouge1, false);
}

}  // namespace relpath
