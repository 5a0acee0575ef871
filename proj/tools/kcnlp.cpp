// kcnlp command-line driver: one subcommand per pipeline stage, `pipeline`
// for all of them, and `synth` for a synthetic corpus.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kcnlp/error.hpp"
#include "kcnlp/io.hpp"
#include "kcnlp/pipeline.hpp"
#include "kcnlp/synth.hpp"

namespace {

struct GlobalFlags {
  std::string config;
  std::string corpus;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
  std::optional<int> epochs;
  bool joint = false;
  bool quiet = false;
};

kcnlp::PipelineConfig resolve(const GlobalFlags& g) {
  kcnlp::PipelineConfig c;
  if (!g.config.empty()) c = kcnlp::load_config(g.config);
  if (!g.corpus.empty()) c.corpus_path = g.corpus;
  if (g.seed) c.seed = *g.seed;
  if (!g.out.empty()) c.output_dir = g.out;
  if (g.threads) c.threads = *g.threads;
  if (g.epochs) c.epochs = *g.epochs;
  if (g.joint) c.joint = true;
  return c;
}

int run_synth(const GlobalFlags& g, kcnlp::SynthConfig sc) {
  if (g.seed) sc.rng_seed = *g.seed;
  const std::string dir = g.out.empty() ? "." : g.out;
  auto out = kcnlp::generate(sc);
  kcnlp::io::write_file(std::filesystem::path(dir) / "corpus.jsonl", out.jsonl());
  kcnlp::io::write_file(std::filesystem::path(dir) / "synth_report.txt", out.report.to_text());
  if (!g.quiet) std::cerr << out.report.to_text();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keyword co-occurrence network link prediction"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags g;
  app.add_option("--config", g.config, "Pipeline config file (key = value lines)");
  app.add_option("--corpus", g.corpus, "Corpus file (overrides corpus_path)");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads for gradient computation")->check(CLI::PositiveNumber);
  app.add_option("--epochs", g.epochs, "Training epochs")->check(CLI::PositiveNumber);
  app.add_flag("--joint", g.joint, "Also train a classifier on all five pair features");
  app.add_flag("-q,--quiet", g.quiet, "No progress output");

  std::string chosen;
  for (auto stage : kcnlp::kStages) {
    const std::string name(stage);
    auto* sub = app.add_subcommand(name, name == "pipeline" ? "Run every stage in order" : "Run the " + name + " stage");
    sub->callback([&chosen, name] { chosen = name; });
  }

  kcnlp::SynthConfig sc;
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus (corpus.jsonl, synth_report.txt) to --out");
  synth->add_option("--first-year", sc.first_year);
  synth->add_option("--years", sc.years);
  synth->add_option("--articles-per-year", sc.articles_per_year);
  synth->add_option("--keyword-pool", sc.keyword_pool);
  synth->add_option("--authors", sc.authors);
  synth->add_option("--keywords-min", sc.keywords_min);
  synth->add_option("--keywords-max", sc.keywords_max);
  synth->add_option("--authors-per-article-max", sc.authors_per_article_max);
  synth->add_option("--hubs", sc.hubs);
  synth->add_option("--pa-strength", sc.pa_strength);
  synth->add_option("--citation-decay", sc.citation_decay);
  synth->add_option("--citation-base", sc.citation_base);
  synth->add_option("--topics", sc.topics);
  synth->add_option("--topic-focus", sc.topic_focus);
  synth->add_option("--topic-skew", sc.topic_skew);
  synth->add_option("--emerging-growth", sc.emerging_growth);
  synth->callback([&chosen] { chosen = "synth"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (chosen == "synth") return run_synth(g, sc);
    auto cfg = resolve(g);
    std::function<void(const std::string&)> log;
    if (!g.quiet) log = [](const std::string& m) { std::cerr << m << std::endl; };
    kcnlp::Pipeline p(std::move(cfg), log);
    p.run(chosen);
    return 0;
  } catch (const kcnlp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
