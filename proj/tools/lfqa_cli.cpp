// Command-line front end. Talks to the engine only through lfqa.h.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lfqa/lfqa.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Failure {
  lfqa_status status;
};

void check(lfqa_status status) {
  if (status != LFQA_OK) throw Failure{status};
}

struct StringDeleter {
  void operator()(lfqa_string* s) const { lfqa_string_free(s); }
};
struct CorpusDeleter {
  void operator()(lfqa_corpus* c) const { lfqa_corpus_free(c); }
};
struct IndexDeleter {
  void operator()(lfqa_index* i) const { lfqa_index_free(i); }
};
struct PipelineDeleter {
  void operator()(lfqa_pipeline* p) const { lfqa_pipeline_free(p); }
};
struct TableDeleter {
  void operator()(lfqa_table* t) const { lfqa_table_free(t); }
};
using Corpus = std::unique_ptr<lfqa_corpus, CorpusDeleter>;
using Index = std::unique_ptr<lfqa_index, IndexDeleter>;
using PipelineHandle = std::unique_ptr<lfqa_pipeline, PipelineDeleter>;
using Table = std::unique_ptr<lfqa_table, TableDeleter>;

std::string take(lfqa_string* s) {
  std::unique_ptr<lfqa_string, StringDeleter> owned(s);
  return std::string(lfqa_string_data(s), lfqa_string_size(s));
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "lfqa: cannot open '%s'\n", path.c_str());
    throw Failure{LFQA_ERR_IO};
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Creates the parent directory of an output file.
const std::string& output(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  return path;
}

const char* or_null(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

std::string absolute(const std::string& path) { return fs::absolute(path).lexically_normal().string(); }

// Settings shared by every subcommand. Precedence: flag > LFQA_* env > file.
struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string strategy;
  std::optional<std::size_t> k, n, budget;
  std::string endpoint;
  std::string out;
};

const char* env(const char* name) {
  const char* v = std::getenv(name);
  return v && *v ? v : nullptr;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Resolved {
  json config = json::object();
  std::string base_dir;
};

Resolved resolve(const Globals& g) {
  Resolved r;
  std::string path = g.config_path;
  if (path.empty()) {
    if (const char* e = env("LFQA_CONFIG")) path = e;
  }
  r.base_dir = fs::current_path().string();
  if (!path.empty()) {
    try {
      r.config = json::parse(read_text(path));
    } catch (const json::exception& e) {
      std::fprintf(stderr, "lfqa: config '%s' is not valid JSON: %s\n", path.c_str(), e.what());
      throw Failure{LFQA_ERR_PARSE};
    }
    r.base_dir = fs::absolute(path).parent_path().string();
  }
  json& c = r.config;

  auto apply = [&](const char* var, auto&& set) {
    if (const char* e = env(var)) set(std::string(e));
  };
  apply("LFQA_CORPUS", [&](const std::string& v) { c["corpus"] = absolute(v); });
  apply("LFQA_SEED", [&](const std::string& v) { c["seed"] = std::stoull(v); });
  apply("LFQA_STRATEGY", [&](const std::string& v) { c["strategies"] = split_list(v); });
  apply("LFQA_K", [&](const std::string& v) { c["k"] = std::stoull(v); });
  apply("LFQA_N", [&](const std::string& v) { c["n"] = std::stoull(v); });
  apply("LFQA_BUDGET", [&](const std::string& v) { c["budget"] = std::stoull(v); });
  apply("LFQA_ENDPOINT", [&](const std::string& v) { c["generator"]["endpoint"] = v; });
  apply("LFQA_OUT", [&](const std::string& v) { c["out"] = absolute(v); });

  if (g.seed) c["seed"] = *g.seed;
  if (!g.strategy.empty()) c["strategies"] = split_list(g.strategy);
  if (g.k) c["k"] = *g.k;
  if (g.n) c["n"] = *g.n;
  if (g.budget) c["budget"] = *g.budget;
  if (!g.endpoint.empty()) c["generator"]["endpoint"] = g.endpoint;
  if (!g.out.empty()) c["out"] = absolute(g.out);
  return r;
}

template <typename T>
T setting(const json& config, const char* key, T fallback) {
  auto it = config.find(key);
  return it == config.end() || it->is_null() ? fallback : it->get<T>();
}

std::string generator_endpoint(const json& config) {
  auto it = config.find("generator");
  if (it == config.end() || !it->is_object()) return {};
  return setting<std::string>(*it, "endpoint", "");
}

PipelineHandle open_pipeline(const Resolved& r) {
  lfqa_pipeline* p = nullptr;
  check(lfqa_pipeline_open(r.config.dump().c_str(), r.base_dir.c_str(), &p));
  return PipelineHandle(p);
}

std::string strategy_of(const json& config) {
  auto it = config.find("strategies");
  if (it != config.end() && it->is_array() && !it->empty()) return it->front().get<std::string>();
  return setting<std::string>(config, "strategy", "dense");
}

void print_line(const std::string& s) {
  std::fwrite(s.data(), 1, s.size(), stdout);
  if (s.empty() || s.back() != '\n') std::fputc('\n', stdout);
}

lfqa_report_format format_of(const std::string& name) {
  if (name == "csv") return LFQA_REPORT_CSV;
  if (name == "md" || name == "markdown") return LFQA_REPORT_MARKDOWN;
  std::fprintf(stderr, "lfqa: unknown report format '%s'\n", name.c_str());
  throw Failure{LFQA_ERR_INVALID_ARGUMENT};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieval-augmented long-form QA experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lfqa_version()));

  Globals g;
  app.add_option("--config", g.config_path, "JSON experiment config (env LFQA_CONFIG)");
  app.add_option("--seed", g.seed, "Seed for splits, stub embeddings and synthetic data");
  app.add_option("--strategy", g.strategy, "dense|bm25|late-interaction|seq2seq, comma separated");
  app.add_option("--k", g.k, "Dense candidates per query");
  app.add_option("--n", g.n, "Contexts kept after re-ranking");
  app.add_option("--budget", g.budget, "Prompt token budget");
  app.add_option("--endpoint", g.endpoint, "Generation service URL");
  app.add_option("--out", g.out, "Output file or directory");
  app.fallthrough();

  std::function<void()> action;

  auto* synth = app.add_subcommand("synth", "Write a synthetic QA corpus");
  std::size_t synth_count = 200;
  synth->add_option("--count", synth_count, "Number of pairs")->capture_default_str();
  synth->callback([&] {
    action = [&] {
      if (g.out.empty()) throw CLI::RequiredError("--out");
      lfqa_corpus* c = nullptr;
      check(lfqa_corpus_synthetic(synth_count, g.seed.value_or(0), &c));
      Corpus corpus(c);
      check(lfqa_corpus_write(corpus.get(), output(g.out).c_str()));
      std::printf("wrote %zu pairs to %s\n", lfqa_corpus_size(corpus.get()), g.out.c_str());
    };
  });

  auto* ingest = app.add_subcommand("ingest", "Load, clean and summarize a JSONL corpus");
  std::string ingest_path, abbreviations;
  bool strict = false;
  ingest->add_option("corpus", ingest_path, "JSONL file")->required();
  ingest->add_option("--abbreviations", abbreviations, "Two-column TSV of expansions");
  ingest->add_flag("--strict", strict, "Fail on the first malformed record");
  ingest->callback([&] {
    action = [&] {
      lfqa_corpus* c = nullptr;
      check(lfqa_corpus_ingest(ingest_path.c_str(), or_null(abbreviations), strict ? 1 : 0, &c));
      Corpus corpus(c);
      lfqa_string* s = nullptr;
      check(lfqa_corpus_warnings(corpus.get(), &s));
      for (const auto& w : json::parse(take(s))) std::fprintf(stderr, "warning: %s\n", w.get<std::string>().c_str());
      check(lfqa_corpus_stats(corpus.get(), &s));
      print_line(json::parse(take(s)).dump(2));
      if (!g.out.empty()) check(lfqa_corpus_write(corpus.get(), output(g.out).c_str()));
    };
  });

  auto* split = app.add_subcommand("split", "Assign pairs to train/validation/test");
  std::string split_path;
  std::vector<double> ratios{0.7, 0.15, 0.15};
  split->add_option("corpus", split_path, "JSONL file")->required();
  split->add_option("--ratios", ratios, "Three ratios summing to 1")->expected(3)->capture_default_str();
  split->callback([&] {
    action = [&] {
      lfqa_corpus* c = nullptr;
      check(lfqa_corpus_ingest(split_path.c_str(), nullptr, 0, &c));
      Corpus corpus(c);
      lfqa_string* s = nullptr;
      check(lfqa_corpus_split(corpus.get(), ratios[0], ratios[1], ratios[2], g.seed.value_or(0),
                              g.out.empty() ? nullptr : output(g.out).c_str(), &s));
      print_line(take(s));
    };
  });

  auto* embed = app.add_subcommand("embed", "Write stub embedding stores for a corpus");
  std::string embed_path, token_path, unit = "qa";
  std::uint32_t dim = 768;
  embed->add_option("corpus", embed_path, "JSONL file")->required();
  embed->add_option("--dim", dim, "Vector dimension")->capture_default_str();
  embed->add_option("--unit", unit, "qa or question")->check(CLI::IsMember({"qa", "question"}))->capture_default_str();
  embed->add_option("--tokens", token_path, "Also write a token store here");
  embed->callback([&] {
    action = [&] {
      if (g.out.empty()) throw CLI::RequiredError("--out");
      lfqa_corpus* c = nullptr;
      check(lfqa_corpus_ingest(embed_path.c_str(), nullptr, 0, &c));
      Corpus corpus(c);
      check(lfqa_corpus_embed_stub(corpus.get(), dim, g.seed.value_or(0),
                                   unit == "question" ? LFQA_TEXT_QUESTION : LFQA_TEXT_QA, output(g.out).c_str(),
                                   or_null(token_path)));
      std::printf("wrote %zu vectors to %s\n", lfqa_corpus_size(corpus.get()), g.out.c_str());
    };
  });

  auto* build = app.add_subcommand("build-index", "Validate a sentence store and write its index manifest");
  std::string store_path;
  build->add_option("store", store_path, "RBQE sentence store")->required();
  build->callback([&] {
    action = [&] {
      lfqa_index* i = nullptr;
      check(lfqa_index_open(store_path.c_str(), &i));
      Index index(i);
      const std::string manifest = g.out.empty() ? store_path + ".manifest.json" : g.out;
      check(lfqa_index_write_manifest(index.get(), manifest.c_str()));
      print_line(json{{"dim", lfqa_index_dim(index.get())}, {"count", lfqa_index_size(index.get())},
                      {"manifest", manifest}}
                     .dump(2));
    };
  });

  std::string query, query_id;
  auto add_query = [&](CLI::App* sub) {
    sub->add_option("--query", query, "Question text")->required();
    sub->add_option("--query-id", query_id, "Id of a precomputed query embedding");
  };

  auto* retrieve = app.add_subcommand("retrieve", "Dense top-k candidates for a question");
  add_query(retrieve);
  retrieve->callback([&] {
    action = [&] {
      const auto r = resolve(g);
      const auto pipeline = open_pipeline(r);
      lfqa_string* s = nullptr;
      check(lfqa_pipeline_retrieve(pipeline.get(), query.c_str(), or_null(query_id),
                                   setting<std::size_t>(r.config, "k", 16), &s));
      print_line(json::parse(take(s)).dump(2));
    };
  });

  auto* rerank = app.add_subcommand("rerank", "Re-rank the dense candidates and keep n");
  add_query(rerank);
  rerank->callback([&] {
    action = [&] {
      const auto r = resolve(g);
      const auto pipeline = open_pipeline(r);
      lfqa_string* s = nullptr;
      check(lfqa_pipeline_rerank(pipeline.get(), query.c_str(), or_null(query_id), strategy_of(r.config).c_str(),
                                 setting<std::size_t>(r.config, "k", 16), setting<std::size_t>(r.config, "n", 4),
                                 &s));
      print_line(json::parse(take(s)).dump(2));
    };
  });

  auto* assemble = app.add_subcommand("assemble", "Build a prompt from a question and ranked contexts");
  std::string contexts_path, tokenizer;
  bool reverse = false, as_json = false;
  assemble->add_option("--query", query, "Question text")->required();
  assemble->add_option("--contexts", contexts_path, "JSON array of {question, answer}, best first");
  assemble->add_option("--tokenizer", tokenizer, "Token counting service URL");
  assemble->add_flag("--reverse", reverse, "Show the best context last");
  assemble->add_flag("--json", as_json, "Print the whole prompt bundle");
  assemble->callback([&] {
    action = [&] {
      const auto r = resolve(g);
      const std::string contexts = contexts_path.empty() ? "[]" : read_text(contexts_path);
      lfqa_string* s = nullptr;
      check(lfqa_assemble_prompt(query.c_str(), contexts.c_str(), setting<std::size_t>(r.config, "budget", 512),
                                 reverse ? 1 : 0, or_null(tokenizer), &s));
      const auto bundle = json::parse(take(s));
      print_line(as_json ? bundle.dump(2) : bundle.at("rendered").get<std::string>());
    };
  });

  auto* generate = app.add_subcommand("generate", "Send one prompt to the generator, or answer a question end to end");
  std::string prompt;
  long timeout_ms = 60000;
  int retries = 0;
  generate->add_option("--prompt", prompt, "Prompt text sent as is");
  generate->add_option("--query", query, "Run retrieve, re-rank, assemble and generate for a question");
  generate->add_option("--query-id", query_id, "Id of a precomputed query embedding");
  generate->add_option("--timeout-ms", timeout_ms, "Request timeout")->capture_default_str();
  generate->add_option("--retries", retries, "Retries after transport failures")->capture_default_str();
  generate->callback([&] {
    action = [&] {
      const auto r = resolve(g);
      lfqa_string* s = nullptr;
      if (!prompt.empty()) {
        const auto url = generator_endpoint(r.config);
        if (url.empty()) throw CLI::RequiredError("--endpoint");
        json request{{"prompt", prompt}};
        if (auto it = r.config.find("generator"); it != r.config.end() && it->is_object()) {
          for (const char* key : {"beam_size", "length_penalty", "max_new_tokens"}) {
            if (it->contains(key)) request[key] = it->at(key);
          }
        }
        check(lfqa_generate(url.c_str(), timeout_ms, retries, request.dump().c_str(), &s));
        print_line(json::parse(take(s)).at("text").get<std::string>());
        return;
      }
      if (query.empty()) throw CLI::ValidationError("generate", "needs --prompt or --query");
      const auto pipeline = open_pipeline(r);
      check(lfqa_pipeline_answer(pipeline.get(), query.c_str(), or_null(query_id), strategy_of(r.config).c_str(), &s));
      print_line(json::parse(take(s)).dump(2));
    };
  });

  auto* evaluate = app.add_subcommand("evaluate", "Score generated text against references");
  std::string generated, reference, pairs_path;
  bool stem = false;
  evaluate->add_option("--generated", generated, "Generated answer");
  evaluate->add_option("--reference", reference, "Reference answer");
  evaluate->add_option("--pairs", pairs_path, "JSONL of {generated, reference}");
  evaluate->add_flag("--stem", stem, "METEOR matches on stemmed tokens");
  evaluate->callback([&] {
    action = [&] {
      lfqa_metric_options options;
      lfqa_metric_options_default(&options);
      options.meteor_stem = stem ? 1 : 0;
      std::vector<std::pair<std::string, std::string>> items;
      if (!pairs_path.empty()) {
        std::istringstream in(read_text(pairs_path));
        for (std::string line; std::getline(in, line);) {
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          const auto j = json::parse(line);
          items.emplace_back(j.at("generated").get<std::string>(), j.at("reference").get<std::string>());
        }
      } else {
        items.emplace_back(generated, reference);
      }
      std::vector<lfqa_metric_row> rows(items.size());
      auto to_json = [](double b, double r, bool has_bert, double bert, double m) {
        return json{{"bleu1", b}, {"rouge1", r}, {"bertscore_p", has_bert ? json(bert) : json(nullptr)}, {"meteor", m}};
      };
      for (std::size_t i = 0; i < items.size(); ++i) {
        check(lfqa_evaluate_pair(items[i].first.c_str(), items[i].second.c_str(), &options, &rows[i]));
      }
      lfqa_metric_summary summary;
      check(lfqa_aggregate(rows.data(), rows.size(), &summary));
      if (items.size() == 1) {
        const auto& m = rows[0];
        print_line(to_json(m.bleu1, m.rouge1, m.has_bertscore, m.bertscore_p, m.meteor).dump(2));
        return;
      }
      auto j = to_json(summary.bleu1, summary.rouge1, summary.has_bertscore, summary.bertscore_p, summary.meteor);
      j["count"] = summary.count;
      j["degenerate"] = summary.degenerate;
      print_line(j.dump(2));
    };
  });

  auto* experiment = app.add_subcommand("experiment", "Run every configured strategy and write reports");
  std::string experiment_format = "md";
  experiment->add_option("--format", experiment_format, "Table printed to stdout: md or csv")->capture_default_str();
  experiment->callback([&] {
    action = [&] {
      const auto r = resolve(g);
      lfqa_table* t = nullptr;
      check(lfqa_experiment_run(r.config.dump().c_str(), r.base_dir.c_str(), &t));
      Table table(t);
      lfqa_string* s = nullptr;
      check(lfqa_table_render(table.get(), format_of(experiment_format), &s));
      print_line(take(s));
    };
  });

  auto* report = app.add_subcommand("report", "Re-render a results CSV, or compare two runs");
  std::string report_path, compare_path, report_format = "md";
  report->add_option("results", report_path, "results.csv from an experiment")->required();
  report->add_option("--compare", compare_path, "Second results.csv; prints per-metric deltas");
  report->add_option("--format", report_format, "md or csv")->capture_default_str();
  report->callback([&] {
    action = [&] {
      lfqa_table* t = nullptr;
      check(lfqa_table_read_csv(report_path.c_str(), &t));
      Table table(t);
      const auto format = format_of(report_format);
      lfqa_string* s = nullptr;
      if (!compare_path.empty()) {
        check(lfqa_table_read_csv(compare_path.c_str(), &t));
        Table other(t);
        check(lfqa_table_compare(table.get(), other.get(), format, &s));
      } else {
        if (!g.out.empty()) {
          check(lfqa_table_emit(table.get(), format, output(g.out).c_str()));
          return;
        }
        check(lfqa_table_render(table.get(), format, &s));
      }
      print_line(take(s));
    };
  });

  try {
    app.parse(argc, argv);
    if (action) action();
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Failure& f) {
    const char* detail = lfqa_last_error();
    std::fprintf(stderr, "lfqa: %s%s%s\n", lfqa_status_string(f.status), *detail ? ": " : "", detail);
    return 10 + static_cast<int>(f.status);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "lfqa: %s\n", e.what());
    return 1;
  }
  return 0;
}
