#pragma once

// relpath command line. Subcommands: build, embed-cache, synth, retrieve, eval,
// sweep. Options can also come from a TOML/INI file given with --config, one
// [section] per subcommand; flags win over the file. --config goes before the
// subcommand name.
//
// run_cli() is the whole program; main() only forwards to it so tests can
// drive commands in-process.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relpath/relpath.hpp"

namespace relpath::cli {

inline constexpr std::string_view kZeroShotInstruction =
    "You are a medical expert. Answer the question using the relational paths retrieved from a medical knowledge "
    "graph. Reply with a single line of the form answer: <medical terms separated by commas>.";

struct GraphOptions {
  std::string triples;
  std::string descriptions;
  std::string edge_rule = "any-position";

  void add_to(CLI::App& cmd) {
    cmd.add_option("--triples", triples, "Triples file (TSV)")->required();
    cmd.add_option("--descriptions", descriptions, "Entity descriptions (JSONL)");
    cmd.add_option("--edge-rule", edge_rule, "TTG edge rule")
        ->check(CLI::IsMember({"any-position", "tail-to-head"}))
        ->capture_default_str();
  }

  EdgeRule rule() const { return edge_rule == "tail-to-head" ? EdgeRule::tail_to_head : EdgeRule::any_position; }

  TextualKnowledgeGraph load() const { return load_tkg_files(triples, descriptions); }

  TextualTripleGraph load_ttg() const {
    return build_ttg(std::make_shared<const TextualKnowledgeGraph>(load()), rule());
  }
};

struct EmbedOptions {
  std::string provider = "hash";
  std::size_t dim = 1024;
  std::string url;  // remote; empty falls back to TTG_EMBED_URL
  std::string cache;

  void add_to(CLI::App& cmd, bool with_cache = true) {
    cmd.add_option("--embedder", provider, "Embedding provider")
        ->check(CLI::IsMember({"hash", "remote"}))
        ->capture_default_str();
    cmd.add_option("--dim", dim, "Embedding dimension")->check(CLI::PositiveNumber)->capture_default_str();
    cmd.add_option("--embed-url", url, "Remote embedding endpoint (default: $TTG_EMBED_URL)");
    if (with_cache) cmd.add_option("--cache", cache, "Embedding cache file to preload");
  }

  std::shared_ptr<EmbeddingProvider> make_provider() const {
    if (provider == "remote") return std::make_shared<RemoteEmbedder>(RemoteEmbedderConfig{url, dim, 64, {}});
    return std::make_shared<HashEmbedder>(dim);
  }

  Embedder make() const {
    Embedder e(make_provider());
    if (!cache.empty()) {
      std::ifstream in(cache);
      if (!in) throw InputError("cannot open embedding cache: " + cache);
      e.cache().load(in);
    }
    return e;
  }
};

struct LlmOptions {
  std::string client = "mock";
  std::string url;
  std::string prompt = "zero-shot";
  std::string instruction_file;
  std::string exemplars_file;
  int max_tokens = 512;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--llm", client, "Answer generator")
        ->check(CLI::IsMember({"none", "mock", "remote"}))
        ->capture_default_str();
    cmd.add_option("--llm-url", url, "Remote completion endpoint");
    cmd.add_option("--max-tokens", max_tokens, "Remote completion budget")->capture_default_str();
    cmd.add_option("--prompt", prompt, "Prompt style")
        ->check(CLI::IsMember({"zero-shot", "few-shot", "cot"}))
        ->capture_default_str();
    cmd.add_option("--instruction-file", instruction_file, "Instruction text replacing the built-in one");
    cmd.add_option("--exemplars", exemplars_file, "Few-shot exemplars (JSONL: query, paths, answer)");
  }

  std::unique_ptr<LlmClient> make() const {
    if (client == "none") return nullptr;
    if (client == "remote") return std::make_unique<RemoteLlm>(RemoteLlmConfig{url, {}, max_tokens, {}});
    return std::make_unique<MockLlm>();
  }

  PromptTemplate make_prompt() const {
    PromptTemplate t;
    t.instruction = instruction_file.empty() ? std::string(kZeroShotInstruction) : read_instruction_file(instruction_file);
    t.cot = prompt == "cot";
    if (prompt == "few-shot") {
      t.mode = PromptMode::few_shot;
      if (exemplars_file.empty()) throw ArgumentError("--prompt few-shot needs --exemplars");
      t.exemplars = read_exemplars(exemplars_file);
    }
    return t;
  }

  static std::vector<Exemplar> read_exemplars(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open exemplars file: " + path);
    std::vector<Exemplar> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (text::trim(line).empty()) continue;
      try {
        auto j = nlohmann::json::parse(line);
        out.push_back({j.at("query").get<std::string>(), j.value("paths", ""), j.at("answer").get<std::string>()});
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad exemplar: ") + e.what(), lineno);
      }
    }
    return out;
  }
};

struct SearchOptions {
  std::string method = "rmcts";
  std::size_t iterations = 5000;
  std::size_t depth = 3;
  double c = std::numbers::sqrt2;
  std::size_t rollouts = 3;
  std::optional<std::size_t> top_k;
  std::uint64_t seed = 0;
  std::string reward_mode = "verbalize-then-embed";
  std::string chain_rule = "frontier";
  std::size_t workers = 1;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--method", method, "Retriever")
        ->check(CLI::IsMember({"mcts", "rmcts", "random-walk"}))
        ->capture_default_str();
    cmd.add_option("--iterations", iterations, "Search iterations (epsilon)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd.add_option("--depth", depth, "Maximum path depth d")->check(CLI::PositiveNumber)->capture_default_str();
    cmd.add_option("--c", c, "UCT exploration constant")->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd.add_option("--rollouts", rollouts, "Rollouts per expansion")->check(CLI::PositiveNumber)->capture_default_str();
    cmd.add_option("--top-k", top_k, "Trajectories per query (default: 1 for rmcts, 3 otherwise)")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--seed", seed, "Random seed")->required();
    cmd.add_option("--reward-mode", reward_mode, "Path reward")
        ->check(CLI::IsMember({"verbalize-then-embed", "mean-pool"}))
        ->capture_default_str();
    cmd.add_option("--chain-rule", chain_rule, "Chain extension rule")
        ->check(CLI::IsMember({"frontier", "any-neighbor"}))
        ->capture_default_str();
    cmd.add_option("--workers", workers, "Parallel queries")->check(CLI::PositiveNumber)->capture_default_str();
  }

  RunOptions make() const {
    RunOptions o;
    o.method = method_from_string(method);
    o.params = SearchParams::defaults_for(o.method);
    o.params.iterations = iterations;
    o.params.max_depth = depth;
    o.params.uct_c = c;
    o.params.rollouts_per_expansion = rollouts;
    if (top_k) o.params.top_k = *top_k;
    o.params.seed = seed;
    o.params.reward_mode = reward_mode_from_string(reward_mode);
    o.params.chain_rule = chain_rule_from_string(chain_rule);
    o.params.check();
    o.workers = workers;
    return o;
  }
};

inline std::vector<QueryRecord> load_queries(const std::string& path, const std::string& split) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open queries file: " + path);
  auto all = read_queries(in);
  if (split == "all") return all;
  auto s = split_from_string(split);
  std::vector<QueryRecord> out;
  for (auto& q : all)
    if (q.split == s) out.push_back(std::move(q));
  return out;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

inline std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// Every option of every subcommand, so the parsed values outlive parse().
struct Commands {
  GraphOptions graph;
  EmbedOptions embed;
  LlmOptions llm;
  SearchOptions search;

  std::string summary_out;
  std::string out;
  std::string out_dir;
  std::string queries;
  std::string predictions;
  std::string split = "all";
  std::string csv;
  std::string json_out;

  std::string mode = "planted";
  std::optional<std::uint64_t> synth_seed;
  std::size_t count = 200;
  std::size_t distractors = 50;
  std::vector<std::string> structures;
  std::string templates;
  WorldParams world;

  std::vector<std::size_t> iterations_grid{3000, 5000, 7000, 9000, 11000};
  std::vector<std::size_t> depth_grid{2, 3};
};

inline int cmd_build(const Commands& c, std::ostream& out, std::ostream& err) {
  auto g = c.graph.load();
  auto report = validate(g);
  auto ttg = build_ttg(g, c.graph.rule());
  for (const auto& k : report.dangling_document_keys) err << "warning: document for unknown entity '" << k << "'\n";
  out << "nodes: " << ttg.size() << ", edges: " << ttg.edge_count() << "\n";
  out << "entities: " << report.entity_count << ", relations: " << report.relation_vocabulary_size
      << ", entity types: " << report.entity_type_count << ", coverage: " << fixed(report.coverage, 4) << "\n";
  if (!c.summary_out.empty()) {
    auto f = open_out(c.summary_out);
    f << nlohmann::json{{"nodes", ttg.size()},
                        {"edges", ttg.edge_count()},
                        {"edge_rule", c.graph.edge_rule},
                        {"entities", report.entity_count},
                        {"triples", report.triple_count},
                        {"relations", report.relation_vocabulary_size},
                        {"entity_types", report.entity_type_count},
                        {"coverage", report.coverage},
                        {"dangling_documents", report.dangling_document_keys}}
             .dump(2)
      << "\n";
  }
  return 0;
}

inline int cmd_embed_cache(const Commands& c, std::ostream& out, std::ostream&) {
  auto ttg = c.graph.load_ttg();
  Embedder e = c.embed.make();
  std::vector<std::string> texts;
  texts.reserve(ttg.size());
  for (NodeId i = 0; i < ttg.size(); ++i) texts.push_back(serialize_node(ttg.node(i)));
  e.embed_texts(texts);
  auto f = open_out(c.out);
  e.cache().save(f);
  out << "cached: " << e.cache().size() << " vectors, dim " << e.dim() << ", provider " << e.provider().name()
      << "\n";
  return 0;
}

inline int cmd_synth(const Commands& c, std::ostream& out, std::ostream& err) {
  if (!c.synth_seed) throw ArgumentError("synth needs --seed");
  std::mt19937_64 rng(*c.synth_seed);
  std::filesystem::create_directories(c.out_dir);
  const auto dir = std::filesystem::path(c.out_dir);
  TextualKnowledgeGraph g;
  std::vector<QueryRecord> records;
  if (c.mode == "planted") {
    std::vector<StructureKind> shapes;
    for (const auto& s : c.structures) shapes.push_back(structure_from_string(s));
    if (shapes.empty()) shapes.assign(std::begin(kAllStructures), std::end(kAllStructures));
    auto set = plant_many(shapes, c.count, c.distractors, rng);
    g = std::move(set.graph);
    for (auto& pq : set.queries) records.push_back(std::move(pq.record));
  } else {
    std::vector<RelationalTemplate> bank;
    if (c.templates.empty()) {
      bank = default_template_bank();
    } else {
      std::ifstream in(c.templates);
      if (!in) throw InputError("cannot open template bank: " + c.templates);
      bank = read_template_bank(in);
    }
    g = generate_world(bank, c.world, rng);
    std::unique_ptr<LlmClient> client;
    if (c.llm.client == "remote") client = c.llm.make();
    records = synth_queries(g, bank, c.count, client.get(), rng);
    if (records.size() < c.count)
      err << "warning: only " << records.size() << " of " << c.count << " queries passed the answer filter\n";
  }
  {
    auto f = open_out((dir / "triples.tsv").string());
    write_triples(f, g);
  }
  {
    auto f = open_out((dir / "descriptions.jsonl").string());
    write_descriptions(f, g);
  }
  {
    auto f = open_out((dir / "queries.jsonl").string());
    write_queries(f, records);
  }
  out << "triples: " << g.triples.size() << ", entities: " << g.entities.size() << ", queries: " << records.size()
      << "\n";
  return 0;
}

inline int cmd_retrieve(const Commands& c, std::ostream& out, std::ostream& err) {
  auto ttg = c.graph.load_ttg();
  auto queries = load_queries(c.queries, c.split);
  Embedder embedder = c.embed.make();
  RunOptions opt = c.search.make();
  auto llm = c.llm.make();
  opt.llm = llm.get();
  if (llm) opt.prompt = c.llm.make_prompt();
  auto start = std::chrono::steady_clock::now();
  auto runs = run_queries(ttg, queries, embedder, opt);
  auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto f = open_out(c.out);
  write_retrievals(f, runs);
  std::size_t errors = 0, warnings = 0;
  for (const auto& r : runs) {
    if (!r.error.empty()) {
      ++errors;
      err << "error: " << r.id << ": " << r.error << "\n";
    }
    if (r.parse_warning) {
      ++warnings;
      err << "warning: " << r.id << ": no answer field in the model output\n";
    }
  }
  out << "queries: " << runs.size() << ", errors: " << errors << ", parse warnings: " << warnings << "\n";
  err << "retrieve: " << fixed(secs, 2) << " s\n";
  return errors ? 1 : 0;
}

inline void warn_missing(const EvalReport& r, std::ostream& err) {
  if (r.missing_ids.empty()) return;
  err << "warning: " << r.missing_ids.size() << " queries have no prediction and score as empty:";
  for (std::size_t i = 0; i < r.missing_ids.size() && i < 10; ++i) err << ' ' << r.missing_ids[i];
  if (r.missing_ids.size() > 10) err << " ...";
  err << "\n";
}

inline int cmd_eval(const Commands& c, std::ostream& out, std::ostream& err) {
  std::ifstream pin(c.predictions);
  if (!pin) throw InputError("cannot open predictions file: " + c.predictions);
  auto runs = read_retrievals(pin);
  auto queries = load_queries(c.queries, "all");
  std::optional<Split> split;
  if (c.split != "all") split = split_from_string(c.split);
  auto report = evaluate_run(predictions_of(runs), queries, split);
  if (!runs.empty()) {
    report.method = std::string(to_string(runs.front().method));
    report.params = to_json(runs.front().params);
  }
  warn_missing(report, err);
  write_table(out, report);
  if (!c.csv.empty()) {
    auto f = open_out(c.csv);
    write_csv(f, report);
  }
  if (!c.json_out.empty()) {
    auto f = open_out(c.json_out);
    f << to_json(report).dump(2) << "\n";
  }
  return 0;
}

inline int cmd_sweep(const Commands& c, std::ostream& out, std::ostream& err) {
  if (c.iterations_grid.empty() || c.depth_grid.empty()) throw ArgumentError("sweep grid must be non-empty");
  auto ttg = c.graph.load_ttg();
  auto queries = load_queries(c.queries, c.split);
  Embedder embedder = c.embed.make();
  auto llm = c.llm.make();
  nlohmann::json rows = nlohmann::json::array();
  out << std::left << std::setw(12) << "iterations" << std::setw(7) << "depth" << std::setw(10) << "recovery"
      << std::setw(8) << "em_f1" << "rouge1_f1\n";
  std::size_t errors = 0;
  for (auto d : c.depth_grid) {
    for (auto eps : c.iterations_grid) {
      RunOptions opt = c.search.make();
      opt.params.iterations = eps;
      opt.params.max_depth = d;
      opt.params.check();
      opt.llm = llm.get();
      if (llm) opt.prompt = c.llm.make_prompt();
      auto runs = run_queries(ttg, queries, embedder, opt);
      for (const auto& r : runs)
        if (!r.error.empty()) {
          ++errors;
          err << "error: " << r.id << " (iterations " << eps << ", depth " << d << "): " << r.error << "\n";
        }
      double recovery = recovery_rate(queries, runs);
      auto report = evaluate_run(predictions_of(runs), queries, std::nullopt);
      out << std::setw(12) << eps << std::setw(7) << d << std::setw(10) << fixed(recovery, 4) << std::setw(8)
          << fixed(report.macro_em.f1, 4) << fixed(report.macro_rouge1.f1, 4) << "\n";
      rows.push_back({{"iterations", eps},
                      {"depth", d},
                      {"recovery", recovery},
                      {"em", to_json(report.macro_em)},
                      {"rouge1", to_json(report.macro_rouge1)}});
    }
  }
  if (!c.out.empty()) {
    auto f = open_out(c.out);
    f << nlohmann::json{{"method", c.search.method}, {"seed", c.search.seed}, {"grid", rows}}.dump(2) << "\n";
  }
  return errors ? 1 : 0;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"relpath: relational path retrieval over textual knowledge graphs"};
  app.name("relpath");
  app.set_config("--config", "", "TOML/INI config file, given before the subcommand; one [section] per subcommand, flags win");
  app.require_subcommand(1);
  Commands c;

  auto* build = app.add_subcommand("build", "Load a graph, build its triple graph and print counts");
  c.graph.add_to(*build);
  build->add_option("--summary", c.summary_out, "Write the summary as JSON");

  auto* embed = app.add_subcommand("embed-cache", "Embed every triple node and write a vector cache");
  c.graph.add_to(*embed);
  c.embed.add_to(*embed, false);
  embed->add_option("--out", c.out, "Cache file")->required();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic graph and queries");
  synth->add_option("--mode", c.mode, "planted: one gold path per query; templates: mined from a random world")
      ->check(CLI::IsMember({"planted", "templates"}))
      ->capture_default_str();
  synth->add_option("--seed", c.synth_seed, "Random seed")->required();
  synth->add_option("--count", c.count, "Number of queries")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--out-dir", c.out_dir, "Output directory")->required();
  synth->add_option("--distractors", c.distractors, "Decoy triples per planted query")->capture_default_str();
  synth->add_option("--structures", c.structures, "Planted structures, e.g. CHAIN1,CHAIN2")->delimiter(',');
  synth->add_option("--templates", c.templates, "Template bank JSON (templates mode)");
  synth->add_option("--world-entities", c.world.entities_per_type, "Entities per type (templates mode)")
      ->capture_default_str();
  synth->add_option("--world-triples", c.world.triples, "Triples in the world (templates mode)")
      ->capture_default_str();
  synth->add_option("--llm", c.llm.client, "Keyword extractor (templates mode)")
      ->check(CLI::IsMember({"none", "mock", "remote"}))
      ->capture_default_str();
  synth->add_option("--llm-url", c.llm.url, "Remote completion endpoint");

  auto* retrieve = app.add_subcommand("retrieve", "Retrieve relational paths and answers for a query file");
  c.graph.add_to(*retrieve);
  c.embed.add_to(*retrieve);
  c.llm.add_to(*retrieve);
  c.search.add_to(*retrieve);
  retrieve->add_option("--queries", c.queries, "Queries file (JSONL)")->required();
  retrieve->add_option("--split", c.split, "Query split")
      ->check(CLI::IsMember({"all", "train", "val", "test"}))
      ->capture_default_str();
  retrieve->add_option("--out", c.out, "Retrieval records (JSONL)")->required();

  auto* eval = app.add_subcommand("eval", "Score retrieval answers against gold answers");
  eval->add_option("--predictions", c.predictions, "Retrieval records (JSONL)")->required();
  eval->add_option("--queries", c.queries, "Queries file (JSONL)")->required();
  eval->add_option("--split", c.split, "Only score this split")
      ->check(CLI::IsMember({"all", "train", "val", "test"}))
      ->capture_default_str();
  eval->add_option("--csv", c.csv, "Per-query CSV");
  eval->add_option("--json", c.json_out, "Full report as JSON");

  auto* sweep = app.add_subcommand("sweep", "Retrieval and evaluation over an iterations x depth grid");
  c.graph.add_to(*sweep);
  c.embed.add_to(*sweep);
  c.llm.add_to(*sweep);
  c.search.add_to(*sweep);
  sweep->add_option("--queries", c.queries, "Queries file (JSONL)")->required();
  sweep->add_option("--split", c.split, "Query split")
      ->check(CLI::IsMember({"all", "train", "val", "test"}))
      ->capture_default_str();
  sweep->add_option("--iterations-grid", c.iterations_grid, "Comma-separated iteration counts")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--depth-grid", c.depth_grid, "Comma-separated depths")->delimiter(',')->capture_default_str();
  sweep->add_option("--out", c.out, "Grid results (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (build->parsed()) return cmd_build(c, out, err);
    if (embed->parsed()) return cmd_embed_cache(c, out, err);
    if (synth->parsed()) return cmd_synth(c, out, err);
    if (retrieve->parsed()) return cmd_retrieve(c, out, err);
    if (eval->parsed()) return cmd_eval(c, out, err);
    if (sweep->parsed()) return cmd_sweep(c, out, err);
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace relpath::cli
