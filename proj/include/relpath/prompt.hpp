#pragma once

// Path verbalization, prompt assembly and answer generation.

#include <algorithm>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "relpath/common.hpp"
#include "relpath/search.hpp"

namespace relpath {

inline std::string verbalize_triple(const Triple& t) { return t.head + " --" + t.relation + "--> " + t.tail; }

// "h1 --r1--> t1 ; t1 --r2--> t2", a level's branch bracketed after its chain
// segment: "h --r--> t [h' --r'--> t'] ; ...".
inline std::string verbalize_path(const RetrievedPath& path) {
  std::string out;
  std::size_t level = 0;
  for (const auto& n : path.nodes) {
    if (n.branch) {
      out += " [" + verbalize_triple(n.triple) + "]";
      continue;
    }
    if (level) out += " ; ";
    out += verbalize_triple(n.triple);
    level = n.level;
  }
  return out;
}

struct VerbalizedLevel {
  Triple chain;
  std::optional<Triple> branch;
};

// Inverse of verbalize_path for ids/relations free of " ; ", " --", "--> " and
// brackets.
inline std::vector<VerbalizedLevel> parse_verbalized(std::string_view text) {
  auto parse_triple = [](std::string_view s) {
    auto a = s.find(" --");
    auto b = s.rfind("--> ");
    if (a == std::string_view::npos || b == std::string_view::npos || b < a + 3)
      throw ParseError("not a verbalized triple: " + std::string(s), 0);
    return Triple{std::string(s.substr(0, a)), std::string(s.substr(a + 3, b - a - 3)), std::string(s.substr(b + 4))};
  };
  std::vector<VerbalizedLevel> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = text.find(" ; ", start);
    auto seg = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    VerbalizedLevel lvl;
    auto br = seg.find(" [");
    if (br != std::string_view::npos && !seg.empty() && seg.back() == ']') {
      lvl.chain = parse_triple(seg.substr(0, br));
      lvl.branch = parse_triple(seg.substr(br + 2, seg.size() - br - 3));
    } else {
      lvl.chain = parse_triple(seg);
    }
    out.push_back(std::move(lvl));
    if (pos == std::string_view::npos) break;
    start = pos + 3;
  }
  return out;
}

enum class PromptMode { zero_shot, few_shot };

struct Exemplar {
  std::string query;
  std::string paths_text;
  std::string answer;  // full expected response, e.g. "answer: nitric oxide"
};

struct PromptTemplate {
  PromptMode mode = PromptMode::zero_shot;
  bool cot = false;
  std::vector<Exemplar> exemplars;
  std::string instruction;
};

inline constexpr std::string_view kCotContract =
    "Reason step by step and format your output as: step-by-step reasoning: <explanation>, answer: <medical "
    "terms separated by commas>";

inline std::string build_prompt(std::string_view query, std::span<const RetrievedPath> paths,
                                const PromptTemplate& tpl) {
  if (tpl.mode == PromptMode::few_shot && tpl.exemplars.empty())
    throw ArgumentError("few-shot prompt template needs at least one exemplar");
  std::ostringstream out;
  out << text::trim(tpl.instruction) << "\n";
  if (tpl.cot) out << kCotContract << "\n";
  if (tpl.mode == PromptMode::few_shot) {
    for (std::size_t i = 0; i < tpl.exemplars.size(); ++i) {
      const auto& ex = tpl.exemplars[i];
      out << "\nExample " << i + 1 << ":\nQuestion: " << ex.query << "\n";
      if (!ex.paths_text.empty()) out << "Relational paths:\n" << ex.paths_text << "\n";
      out << ex.answer << "\n";
    }
  }
  if (!paths.empty()) {
    out << "\nRelational paths:\n";
    for (const auto& p : paths) out << verbalize_path(p) << "\n";
  }
  out << "\nQuestion: " << query << "\n";
  return out.str();
}

// Instruction text lives in editable asset files. Lines starting with '#' are
// comments.
inline std::string read_instruction_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open instruction file: " + path);
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') continue;
    out += line;
    out += '\n';
  }
  return std::string(text::trim(out));
}

// Substring after the last "answer:" (case-insensitive), split on ',' and ';',
// trimmed, empties dropped. nullopt when there is no marker.
inline std::optional<std::vector<std::string>> parse_answer_field(std::string_view response) {
  auto lower = text::to_lower(response);
  auto pos = lower.rfind("answer:");
  if (pos == std::string::npos) return std::nullopt;
  auto tail = response.substr(pos + 7);
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= tail.size(); ++i) {
    if (i == tail.size() || tail[i] == ',' || tail[i] == ';') {
      auto item = text::trim(tail.substr(start, i - start));
      if (!item.empty()) out.emplace_back(item);
      start = i + 1;
    }
  }
  return out;
}

struct GenerationResult {
  std::vector<std::string> answers;
  bool parse_warning = false;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string_view kind() const = 0;
  virtual GenerationResult generate(const std::string& prompt, std::span<const RetrievedPath> paths) = 0;
};

// Ignores the prompt and answers with the paths' terminal entities.
class MockLlm final : public LlmClient {
 public:
  std::string_view kind() const override { return "mock"; }
  GenerationResult generate(const std::string&, std::span<const RetrievedPath> paths) override {
    GenerationResult r;
    for (const auto& p : paths)
      for (const auto& e : p.terminal_entities)
        if (std::find(r.answers.begin(), r.answers.end(), e) == r.answers.end()) r.answers.push_back(e);
    return r;
  }
};

// Base for clients that return free text; parses the answer field.
class TextLlm : public LlmClient {
 public:
  virtual std::string complete(const std::string& prompt) = 0;

  GenerationResult generate(const std::string& prompt, std::span<const RetrievedPath>) override {
    GenerationResult r;
    auto parsed = parse_answer_field(complete(prompt));
    if (parsed)
      r.answers = std::move(*parsed);
    else
      r.parse_warning = true;
    return r;
  }
};

inline GenerationResult generate_answers(LlmClient& client, const std::string& prompt,
                                         std::span<const RetrievedPath> paths) {
  return client.generate(prompt, paths);
}

}  // namespace relpath
