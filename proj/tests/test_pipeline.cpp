#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <map>

#include "helpers.hpp"
#include "kcnlp/pipeline.hpp"

using namespace kcnlp;
namespace fs = std::filesystem;

namespace {

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(KCNLP_CLI) + " " + args + " > '" + log.string() + "' 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::map<std::string, std::string> key_values(const fs::path& p) {
  std::map<std::string, std::string> kv;
  std::istringstream in(io::read_file(p));
  for (std::string line; std::getline(in, line);)
    if (auto eq = line.find('='); eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  return kv;
}

// A small synthetic corpus and a fast config next to it, shared by all tests.
class PipelineTest : public ::testing::Test {
 protected:
  static fs::path root;

  static void SetUpTestSuite() {
    root = testing_support::scratch_dir("pipeline");
    ASSERT_EQ(cli("synth --out '" + (root / "data").string() +
                      "' --seed 7 --years 5 --articles-per-year 80 --keyword-pool 180 --authors 60 -q",
                  root / "synth.log"),
              0)
        << io::read_file(root / "synth.log");
    io::write_file(root / "fast.conf",
                   "# fast settings for tests\n"
                   "corpus_path = data/corpus.jsonl\n"
                   "epochs = 4\n"
                   "hidden = 6\n"
                   "seed = 7\n"
                   "joint = true\n");
  }

  static std::string conf() { return "--config '" + (root / "fast.conf").string() + "'"; }
  static PipelineConfig config(const fs::path& out) {
    auto c = load_config(root / "fast.conf");
    c.output_dir = out.string();
    return c;
  }
};

fs::path PipelineTest::root;

}  // namespace

TEST_F(PipelineTest, StagewiseEqualsMonolithic) {
  const auto a = root / "stagewise", b = root / "monolithic";
  fs::remove_all(a);
  fs::remove_all(b);
  for (auto s : kStages) {
    if (s == "pipeline") continue;
    ASSERT_EQ(cli(std::string(s) + " " + conf() + " --out '" + a.string() + "' -q", root / "stage.log"), 0)
        << s << ": " << io::read_file(root / "stage.log");
  }
  ASSERT_EQ(cli("pipeline " + conf() + " --out '" + b.string() + "' --threads 3 -q", root / "mono.log"), 0)
      << io::read_file(root / "mono.log");
  const auto ma = io::read_file(a / "manifest.txt"), mb = io::read_file(b / "manifest.txt");
  EXPECT_EQ(ma, mb);
  EXPECT_NE(ma.find("file.summary.csv="), std::string::npos);
  EXPECT_NE(ma.find("file.scores_joint.csv="), std::string::npos);
  EXPECT_EQ(ma.find(a.string()), std::string::npos);  // no absolute output paths
  EXPECT_FALSE(fs::exists(a / "FAILED"));
}

TEST_F(PipelineTest, RerunIsByteIdentical) {
  const auto a = root / "rerun";
  fs::remove_all(a);
  Pipeline p(config(a));
  p.run("pipeline");
  const auto first = io::read_file(a / "manifest.txt");
  p.run("pipeline");
  EXPECT_EQ(io::read_file(a / "manifest.txt"), first);
}

TEST_F(PipelineTest, MissingUpstreamArtifact) {
  const auto a = root / "missing";
  fs::remove_all(a);
  ASSERT_EQ(cli("centrality " + conf() + " --out '" + a.string() + "'", root / "missing.log"), 2);
  EXPECT_NE(io::read_file(root / "missing.log").find("missing upstream artifact"), std::string::npos);
  auto failed = key_values(a / "FAILED");
  EXPECT_EQ(failed["stage"], "centrality");
  EXPECT_TRUE(fs::exists(a / "manifest.txt"));

  Pipeline p(config(a));
  try {
    p.run("classify");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("corpus.jsonl"), std::string::npos);
  }
  p.run("ingest");
  EXPECT_FALSE(fs::exists(a / "FAILED"));
  EXPECT_THROW(p.run("features"), DataError);
}

TEST_F(PipelineTest, ExitCodes) {
  const auto log = root / "codes.log";
  EXPECT_EQ(cli("", log), 1);
  EXPECT_EQ(cli("ingest --no-such-flag", log), 1);
  EXPECT_EQ(cli("ingest", log), 1);  // no corpus configured
  io::write_file(root / "bad.conf", "corpus_path = data/corpus.jsonl\nfrobnicate = 3\n");
  EXPECT_EQ(cli("ingest --config '" + (root / "bad.conf").string() + "'", log), 1);
  EXPECT_EQ(cli("ingest --corpus '" + (root / "nope.jsonl").string() + "' --out '" + (root / "codes").string() + "'", log), 2);
  io::write_file(root / "broken.jsonl", "{\"id\": 1\n");
  EXPECT_EQ(cli("ingest --corpus '" + (root / "broken.jsonl").string() + "' --out '" + (root / "codes").string() + "'", log), 2);
  EXPECT_NE(io::read_file(log).find("line 1"), std::string::npos);
  EXPECT_EQ(cli("synth --keywords-min 0 --out '" + (root / "codes").string() + "'", log), 1);

  // A huge learning rate drives the loss to a non-finite value.
  const auto a = root / "numeric";
  fs::remove_all(a);
  io::write_file(root / "numeric.conf", "corpus_path = data/corpus.jsonl\nepochs = 30\nhidden = 4\nlearning_rate = 1e300\n");
  EXPECT_EQ(cli("pipeline --config '" + (root / "numeric.conf").string() + "' --out '" + a.string() + "' -q", log), 3)
      << io::read_file(log);
  EXPECT_EQ(key_values(a / "FAILED")["stage"], "forecast");
}

TEST_F(PipelineTest, EvaluateFromFilesMatchesScores) {
  const auto a = root / "evaluate";
  fs::remove_all(a);
  Pipeline p(config(a));
  p.run("pipeline");
  for (const auto& name : p.feature_sets()) {
    auto rep = p.report_from_files(name);
    EXPECT_EQ(io::read_file(a / ("report_" + name + ".txt")), rep.to_text());
    EXPECT_EQ(io::read_file(a / ("roc_" + name + ".csv")), rep.roc_csv());

    std::vector<double> scores;
    std::vector<int> labels;
    std::size_t rows = 0;
    for (const auto& r : io::read_csv(a / ("scores_" + name + ".csv"), Pipeline::kScoreHeader)) {
      ++rows;
      if (r[3] != "holdout") continue;
      scores.push_back(std::stod(r[4]));
      labels.push_back(r[2] == "1");
    }
    auto direct = evaluate_scores(name, scores, labels, 0.5);
    EXPECT_EQ(direct.auc, rep.auc);
    EXPECT_EQ(direct.accuracy, rep.accuracy);
    auto summary = key_values(a / "instances_summary.txt");
    EXPECT_EQ(std::to_string(rows), summary["instances"]);
  }
  auto rep = p.report_from_files("score_h_au");
  EXPECT_EQ(rep.nrmse.size(), 1u);
  EXPECT_TRUE(rep.nrmse.count("score_h_au"));
}

TEST_F(PipelineTest, SplitAndLossFiles) {
  const auto a = root / "evaluate";
  if (!fs::exists(a / "summary.csv")) GTEST_SKIP() << "depends on EvaluateFromFilesMatchesScores";
  auto cfg = config(a);
  Pipeline p(cfg);
  auto c = p.stage_corpus();
  auto set = p.stage_instances(c);
  auto held = p.stage_split(set, c);
  std::size_t hp = 0, hn = 0;
  for (std::size_t i = 0; i < held.size(); ++i)
    if (held[i]) (set.instances[i].positive ? hp : hn)++;
  EXPECT_EQ(hp, static_cast<std::size_t>(std::llround(0.3 * static_cast<double>(set.positives))));
  EXPECT_EQ(hn, static_cast<std::size_t>(std::llround(0.3 * static_cast<double>(set.negatives))));
  EXPECT_EQ(set.negatives, 10 * set.positives);
  auto loss = io::read_csv(a / "loss_classifier_score_pa.csv", Pipeline::kLossHeader);
  EXPECT_EQ(loss.size(), 4u);
  auto ckpt = checkpoint_from_string(io::read_file(a / "classifier_score_pa.ckpt"));
  EXPECT_EQ(ckpt.epochs_trained(), 4);
  EXPECT_EQ(ckpt.shape().input_dim, 1);
}

TEST_F(PipelineTest, SynthThenIngestCountsMatch) {
  const auto a = root / "ingest_counts";
  fs::remove_all(a);
  Pipeline p(config(a));
  p.run("ingest");
  auto synth = key_values(root / "data" / "synth_report.txt");
  auto ingest = key_values(a / "ingest_report.txt");
  EXPECT_EQ(ingest["records_parsed"], synth["articles"]);
  EXPECT_EQ(ingest["keywords_retained"], synth["keywords_in_two_or_more_articles"]);
  EXPECT_EQ(ingest["keywords_before_filter"], synth["distinct_keywords"]);
  EXPECT_EQ(ingest["first_year"], "2008");
  EXPECT_EQ(ingest["last_year"], "2012");
}

TEST_F(PipelineTest, ConfigParsing) {
  auto c = parse_config("corpus_path = x.jsonl  # trailing\nvariants = au, d\ncommunity_scores = 4,3,2,1\njoint = true\n",
                        "/base");
  EXPECT_EQ(c.corpus_path, "/base/x.jsonl");
  EXPECT_EQ(c.variants, (std::vector<Variant>{Variant::Au, Variant::D}));
  EXPECT_EQ(c.community_scores.gp, 4.0);
  EXPECT_TRUE(c.joint);
  EXPECT_THROW(parse_config("epochs = many\n"), UsageError);
  EXPECT_THROW(parse_config("variants = xy\n"), UsageError);
  EXPECT_THROW(parse_config("no equals\n"), UsageError);
  auto v = parse_config("corpus_path = a\ntrain_first = 2001\ntrain_last = 2005\ntest_year = 2007\n");
  EXPECT_THROW(v.validate(), UsageError);
  auto d = parse_config("corpus_path = a\noutput_dir = o1\nthreads = 4\n");
  auto e = parse_config("corpus_path = a\noutput_dir = o2\n");
  EXPECT_EQ(d.canonical_text(), e.canonical_text());
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(PipelineTest, YearRangeInConfig) {
  const auto a = root / "years";
  fs::remove_all(a);
  auto cfg = config(a);
  cfg.train_first = 2009;
  cfg.train_last = 2011;
  Pipeline p(cfg);
  EXPECT_THROW(p.run("ingest"), DataError);  // the corpus has 2008 and 2012 records
  EXPECT_EQ(key_values(a / "FAILED")["stage"], "ingest");
}
