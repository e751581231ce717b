#pragma once

// Hand-computed metric fixtures, shared by the unit tests and the acceptance
// binary. Expected values were worked out by hand from the metric
// definitions, not by running the code.

#include <map>
#include <string>
#include <vector>

#include "relpath/eval.hpp"

namespace relpath::testing {

struct PrfCase {
  std::string name;
  std::vector<std::string> predicted;
  std::vector<std::string> gold;
  Prf expected;
};

inline std::vector<PrfCase> em_cases() {
  return {
      {"exact", {"nitric oxide"}, {"nitric oxide"}, {1, 1, 1}},
      {"empty prediction", {}, {"x"}, {0, 0, 0}},
      {"half overlap", {"a", "b"}, {"a", "c"}, {0.5, 0.5, 0.5}},
      {"normalized", {"Nitric Oxide."}, {"nitric oxide"}, {1, 1, 1}},
      {"duplicates ignored", {"a", "A", "a."}, {"a", "b"}, {1.0, 0.5, 2.0 / 3.0}},
      {"one of three", {"a", "x", "y"}, {"a"}, {1.0 / 3.0, 1.0, 0.5}},
  };
}

inline std::vector<PrfCase> rouge_cases() {
  return {
      {"exact", {"nitric oxide"}, {"nitric oxide"}, {1, 1, 1}},
      {"partial", {"oxide"}, {"nitric oxide"}, {1.0, 0.5, 2.0 / 3.0}},
      {"disjoint", {"heart failure"}, {"myocardial reperfusion injury"}, {0, 0, 0}},
      // "oxide" aligns with "nitric oxide" (1/1, 1/2); "heart failure" finds no
      // gold left with overlap. P = (1 + 0) / 2, R = (1/2 + 0) / 2.
      {"two by two",
       {"oxide", "heart failure"},
       {"nitric oxide", "myocardial reperfusion injury"},
       {0.5, 0.25, 1.0 / 3.0}},
      // Greedy in prediction order: "a b" takes "a b c" (F1 0.8) before "a"
      // can; "a" then matches nothing. P = (1 + 0) / 2, R = (2/3 + 0) / 2.
      {"greedy order", {"a b", "a"}, {"a b c", "d"}, {0.5, 1.0 / 3.0, 0.4}},
  };
}

// Three queries; q3 has no prediction.
struct ReportFixture {
  std::map<std::string, std::vector<std::string>> predictions;
  std::vector<QueryRecord> records;
  Prf macro_em, macro_rouge1, micro_em, micro_rouge1;
  double mean_answers;
};

inline ReportFixture three_query_report() {
  ReportFixture f;
  f.predictions = {{"q1", {"Nitric Oxide."}}, {"q2", {"oxide", "heart failure"}}};
  auto rec = [](std::string id, std::vector<std::string> gold) {
    QueryRecord r;
    r.id = std::move(id);
    r.query = "?";
    r.topic_entity = "T";
    r.gold_answers = std::move(gold);
    return r;
  };
  f.records = {rec("q1", {"nitric oxide"}), rec("q2", {"nitric oxide", "myocardial reperfusion injury"}),
               rec("q3", {"a", "c"})};
  // Per query EM: (1,1,1), (0,0,0), (0,0,0).
  f.macro_em = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  // Per query ROUGE-1: (1,1,1), (1/2, 1/4, 1/3), (0,0,0).
  f.macro_rouge1 = {0.5, 1.25 / 3.0, 4.0 / 9.0};
  // Pooled EM: 1 hit over 3 predictions and 5 golds.
  f.micro_em = {1.0 / 3.0, 0.2, 0.25};
  // Pooled ROUGE-1: overlap 2 + 1 over 5 predicted and 9 gold tokens.
  f.micro_rouge1 = {0.6, 1.0 / 3.0, 3.0 / 7.0};
  f.mean_answers = 1.0;
  return f;
}

}  // namespace relpath::testing
