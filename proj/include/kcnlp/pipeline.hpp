#pragma once

// Disk-staged pipeline. Every stage reads its inputs from files in the output
// directory (or the configured corpus) and writes its own files there, then
// rewrites manifest.txt. Running the stages one by one and running `pipeline`
// execute the same code on the same files.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include "kcnlp/centrality.hpp"
#include "kcnlp/corpus.hpp"
#include "kcnlp/error.hpp"
#include "kcnlp/eval.hpp"
#include "kcnlp/features.hpp"
#include "kcnlp/genealogy.hpp"
#include "kcnlp/io.hpp"
#include "kcnlp/kcn.hpp"
#include "kcnlp/neural.hpp"
#include "kcnlp/protocol.hpp"

namespace kcnlp {

namespace fs = std::filesystem;

struct PipelineConfig {
  std::string corpus_path;
  std::string rules_path;  // empty = built-in English plural rules
  int min_article_count = 2;
  int train_first = 0;  // 0 = first corpus year
  int train_last = 0;   // 0 = one before the last corpus year
  int test_year = 0;    // 0 = train_last + 1
  std::vector<Variant> variants{Variant::Au, Variant::At, Variant::D};
  int top_n = 20;
  int n_iters = 20;
  CommunityScores community_scores;
  int neg_ratio = 10;
  double holdout_fraction = 0.30;
  double threshold = 0.5;
  int epochs = 500;
  double learning_rate = 1e-3;
  int batch_size = 0;
  int hidden = 32;
  std::uint64_t seed = 7;
  std::string output_dir = "out";
  int threads = 1;
  bool joint = false;

  void validate() const {
    if (corpus_path.empty()) throw UsageError("config: corpus_path is required");
    if (min_article_count < 1) throw UsageError("config: min_article_count must be >= 1");
    if ((train_first == 0) != (train_last == 0)) throw UsageError("config: set both train_first and train_last or neither");
    if (train_first != 0 && train_last < train_first) throw UsageError("config: train_last < train_first");
    if (test_year != 0 && train_last != 0 && test_year != train_last + 1)
      throw UsageError("config: test_year must equal train_last + 1");
    if (variants.empty()) throw UsageError("config: at least one centrality variant is required");
    if (top_n < 1 || n_iters < 1) throw UsageError("config: top_n and n_iters must be >= 1");
    community_scores.validate();
    if (neg_ratio < 1) throw UsageError("config: neg_ratio must be >= 1");
    if (!(holdout_fraction > 0 && holdout_fraction <= 0.5)) throw UsageError("config: holdout_fraction must lie in (0, 0.5]");
    if (!(threshold > 0 && threshold < 1)) throw UsageError("config: threshold must lie in (0, 1)");
    if (epochs < 1 || !(learning_rate > 0) || batch_size < 0 || hidden < 1 || threads < 1)
      throw UsageError("config: epochs, learning_rate, hidden and threads must be positive; batch_size >= 0");
    if (output_dir.empty()) throw UsageError("config: output_dir must not be empty");
  }

  TrainConfig train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.learning_rate = learning_rate;
    t.batch_size = batch_size;
    t.hidden = hidden;
    t.rng_seed = seed;
    t.threads = threads;
    return t;
  }

  /// Settings that determine the outputs, one `key=value` per line in key
  /// order. output_dir and threads are left out: neither changes any result.
  std::string canonical_text() const {
    std::map<std::string, std::string> kv;
    kv["corpus_path"] = corpus_path;
    kv["rules_path"] = rules_path;
    kv["min_article_count"] = std::to_string(min_article_count);
    kv["train_first"] = std::to_string(train_first);
    kv["train_last"] = std::to_string(train_last);
    kv["test_year"] = std::to_string(test_year);
    std::string vs;
    for (auto v : variants) vs += (vs.empty() ? "" : ",") + std::string(to_string(v));
    kv["variants"] = vs;
    kv["top_n"] = std::to_string(top_n);
    kv["n_iters"] = std::to_string(n_iters);
    kv["community_scores"] = io::fmt_real(community_scores.gp) + ',' + io::fmt_real(community_scores.p) + ',' +
                             io::fmt_real(community_scores.c) + ',' + io::fmt_real(community_scores.g);
    kv["neg_ratio"] = std::to_string(neg_ratio);
    kv["holdout_fraction"] = io::fmt_real(holdout_fraction);
    kv["threshold"] = io::fmt_real(threshold);
    kv["epochs"] = std::to_string(epochs);
    kv["learning_rate"] = io::fmt_real(learning_rate);
    kv["batch_size"] = std::to_string(batch_size);
    kv["hidden"] = std::to_string(hidden);
    kv["seed"] = std::to_string(seed);
    kv["joint"] = joint ? "true" : "false";
    std::string out;
    for (const auto& [k, v] : kv) out += k + '=' + v + '\n';
    return out;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T config_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    T out;
    if constexpr (std::is_same_v<T, double>)
      out = std::stod(v, &used);
    else if constexpr (std::is_same_v<T, std::uint64_t>)
      out = std::stoull(v, &used);
    else
      out = static_cast<T>(std::stoll(v, &used));
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw UsageError("config: bad value for " + key + ": '" + v + "'");
  }
}

}  // namespace detail

/// Parses `key = value` lines; `#` starts a comment. Relative corpus and rules
/// paths are taken relative to `base_dir`.
inline PipelineConfig parse_config(std::string_view text, const fs::path& base_dir = {}) {
  PipelineConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto t = detail::trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    auto key = detail::trim(std::string_view(t).substr(0, eq));
    auto val = detail::trim(std::string_view(t).substr(eq + 1));
    auto path = [&](const std::string& v) {
      if (v.empty()) return v;
      fs::path p(v);
      return (p.is_relative() && !base_dir.empty() ? base_dir / p : p).lexically_normal().string();
    };
    if (key == "corpus_path") c.corpus_path = path(val);
    else if (key == "rules_path") c.rules_path = path(val);
    else if (key == "min_article_count") c.min_article_count = detail::config_number<int>(key, val);
    else if (key == "train_first") c.train_first = detail::config_number<int>(key, val);
    else if (key == "train_last") c.train_last = detail::config_number<int>(key, val);
    else if (key == "test_year") c.test_year = detail::config_number<int>(key, val);
    else if (key == "variants") {
      c.variants.clear();
      for (const auto& v : io::split(val)) {
        try {
          c.variants.push_back(parse_variant(detail::trim(v)));
        } catch (const Error&) {
          throw UsageError("config: unknown variant '" + v + "'");
        }
      }
    } else if (key == "top_n") c.top_n = detail::config_number<int>(key, val);
    else if (key == "n_iters") c.n_iters = detail::config_number<int>(key, val);
    else if (key == "community_scores") {
      auto parts = io::split(val);
      if (parts.size() != 4) throw UsageError("config: community_scores needs four values");
      c.community_scores = {detail::config_number<double>(key, detail::trim(parts[0])),
                            detail::config_number<double>(key, detail::trim(parts[1])),
                            detail::config_number<double>(key, detail::trim(parts[2])),
                            detail::config_number<double>(key, detail::trim(parts[3]))};
    } else if (key == "neg_ratio") c.neg_ratio = detail::config_number<int>(key, val);
    else if (key == "holdout_fraction") c.holdout_fraction = detail::config_number<double>(key, val);
    else if (key == "threshold") c.threshold = detail::config_number<double>(key, val);
    else if (key == "epochs") c.epochs = detail::config_number<int>(key, val);
    else if (key == "learning_rate") c.learning_rate = detail::config_number<double>(key, val);
    else if (key == "batch_size") c.batch_size = detail::config_number<int>(key, val);
    else if (key == "hidden") c.hidden = detail::config_number<int>(key, val);
    else if (key == "seed") c.seed = detail::config_number<std::uint64_t>(key, val);
    else if (key == "output_dir") c.output_dir = path(val);
    else if (key == "threads") c.threads = detail::config_number<int>(key, val);
    else if (key == "joint") {
      if (val != "true" && val != "false") throw UsageError("config: joint must be true or false");
      c.joint = val == "true";
    } else
      throw UsageError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return c;
}

inline PipelineConfig load_config(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw UsageError("cannot open config '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), p.parent_path());
}

/// Lower-case hex SHA-256 of a byte string.
inline std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

inline constexpr std::array<std::string_view, 9> kStages = {"ingest",   "build-kcn", "centrality",
                                                              "communities", "features", "forecast",
                                                              "classify", "evaluate", "pipeline"};

/// Runs stages against one output directory.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg, std::function<void(const std::string&)> log = {})
      : cfg_(std::move(cfg)), log_(std::move(log)), dir_(cfg_.output_dir) {
    cfg_.validate();
  }

  const PipelineConfig& config() const { return cfg_; }
  const fs::path& dir() const { return dir_; }

  /// Runs one stage by name ("pipeline" runs all eight in order). On failure
  /// writes FAILED naming the stage and rethrows; files written so far stay.
  void run(std::string_view stage) {
    if (std::find(kStages.begin(), kStages.end(), stage) == kStages.end())
      throw UsageError("unknown stage '" + std::string(stage) + "'");
    if (stage == "pipeline") {
      for (auto s : kStages)
        if (s != "pipeline") run(s);
      return;
    }
    fs::create_directories(dir_);
    fs::remove(dir_ / "FAILED");
    try {
      say("stage " + std::string(stage));
      if (stage == "ingest") ingest();
      else if (stage == "build-kcn") build_kcn();
      else if (stage == "centrality") centrality();
      else if (stage == "communities") communities();
      else if (stage == "features") features();
      else if (stage == "forecast") forecast();
      else if (stage == "classify") classify();
      else if (stage == "evaluate") evaluate();
      write_manifest();
    } catch (const Error& e) {
      io::write_file(dir_ / "FAILED", "stage=" + std::string(stage) + "\nerror=" + e.what() + "\n");
      write_manifest();
      throw;
    } catch (const std::exception& e) {
      io::write_file(dir_ / "FAILED", "stage=" + std::string(stage) + "\nerror=" + e.what() + "\n");
      write_manifest();
      throw Error("stage " + std::string(stage) + ": " + e.what());
    }
  }

  /// Manifest text for the current directory contents.
  std::string manifest_text() const {
    std::string out = "# kcnlp run manifest\n";
    std::istringstream cfg(cfg_.canonical_text());
    for (std::string line; std::getline(cfg, line);) out += "config." + line + "\n";
    out += "input.corpus=" + hash_file(cfg_.corpus_path) + "\n";
    if (!cfg_.rules_path.empty()) out += "input.rules=" + hash_file(cfg_.rules_path) + "\n";
    std::vector<std::string> files;
    if (fs::exists(dir_))
      for (const auto& e : fs::recursive_directory_iterator(dir_)) {
        if (!e.is_regular_file()) continue;
        auto rel = fs::relative(e.path(), dir_).generic_string();
        if (rel == "manifest.txt") continue;
        files.push_back(rel);
      }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out += "file." + f + "=" + hash_file(dir_ / f) + "\n";
    return out;
  }

  void write_manifest() const { io::write_file(dir_ / "manifest.txt", manifest_text()); }

  // Stage input helpers, public for tests and the CLI.

  NormalizationRules rules() const {
    return cfg_.rules_path.empty() ? NormalizationRules::english_plurals() : load_rules(cfg_.rules_path);
  }

  /// Corpus as written by the ingest stage.
  Corpus stage_corpus() const {
    auto p = require("corpus.jsonl", "ingest");
    auto rp = require("ingest_report.txt", "ingest");
    std::map<std::string, std::string> kv;
    std::istringstream in(io::read_file(rp));
    for (std::string line; std::getline(in, line);)
      if (auto eq = line.find('='); eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    if (!kv.count("first_year") || !kv.count("last_year")) throw DataError(rp.string() + ": year range missing");
    const YearRange range{static_cast<int>(io::parse_int(kv["first_year"], rp.string())),
                          static_cast<int>(io::parse_int(kv["last_year"], rp.string()))};
    // Already normalized and filtered; re-reading with empty rules is exact.
    return kcnlp::ingest(p, NormalizationRules{}, 1, range);
  }

  TemporalKcn stage_kcn(const Corpus& c) const {
    return kcn_from_csv(require("kcn_nodes.csv", "build-kcn"), require("kcn_edges.csv", "build-kcn"), c.keyword_index,
                        c.year_range, "corpus.jsonl");
  }

  std::vector<CentralityTable> stage_centrality(const Corpus& c) const {
    return centrality_from_csv(require("centrality.csv", "centrality"), c.keyword_index, cfg_.n_iters);
  }

  std::vector<CommunityAssignment> stage_communities(const Corpus& c) const {
    return communities_from_csv(require("communities.csv", "communities"), c.keyword_index);
  }

  InstanceSet stage_instances(const Corpus& c) const {
    return instances_from_csv(require("instances.csv", "features"), c.keyword_index);
  }

  /// Holdout flags in instance order, from split.csv.
  std::vector<bool> stage_split(const InstanceSet& set, const Corpus& c) const {
    auto p = require("split.csv", "features");
    auto rows = io::read_csv(p, kSplitHeader);
    if (rows.size() != set.instances.size()) throw DataError(p.string() + ": row count differs from instances.csv");
    std::vector<bool> held(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto [x, y] = pair_names(set.instances[i], c.keyword_index);
      if (rows[i][0] != x || rows[i][1] != y) throw DataError(p.string() + ": pair order differs from instances.csv");
      if (rows[i][3] != "train" && rows[i][3] != "holdout") throw DataError(p.string() + ": bad split '" + rows[i][3] + "'");
      held[i] = rows[i][3] == "holdout";
    }
    return held;
  }

  static constexpr std::string_view kSplitHeader = "pair_a,pair_b,label,split";
  static constexpr std::string_view kForecastHeader = "pair_a,pair_b,feature_name,value";
  static constexpr std::string_view kScoreHeader = "pair_a,pair_b,label,split,score";
  static constexpr std::string_view kNrmseHeader = "feature,nrmse";
  static constexpr std::string_view kLossHeader = "epoch,loss";

  std::vector<std::string> feature_sets() const { return feature_set_names(cfg_.joint); }

 private:
  PipelineConfig cfg_;
  std::function<void(const std::string&)> log_;
  fs::path dir_;

  void say(const std::string& m) const {
    if (log_) log_(m);
  }

  static std::string hash_file(const fs::path& p) {
    if (!fs::exists(p)) throw DataError("cannot hash missing file '" + p.string() + "'");
    return sha256_hex(io::read_file(p));
  }

  fs::path require(const std::string& name, std::string_view producer) const {
    auto p = dir_ / name;
    if (!fs::exists(p))
      throw DataError("missing upstream artifact '" + p.string() + "' (run the " + std::string(producer) +
                      " stage first)");
    return p;
  }

  void put(const std::string& name, std::string_view content) const { io::write_file(dir_ / name, content); }

  // Training and test years, resolved against the corpus range.
  std::pair<YearRange, int> years(const YearRange& corpus_years) const {
    YearRange train{cfg_.train_first, cfg_.train_last};
    if (train.first == 0) train = {corpus_years.first, corpus_years.last - 1};
    const int test = train.last + 1;
    if (cfg_.test_year != 0 && cfg_.test_year != test) throw UsageError("config: test_year must equal train_last + 1");
    if (train.last < train.first) throw DataError("corpus spans a single year; need training years and a test year");
    return {train, test};
  }

  static std::string loss_csv(const std::vector<double>& loss) {
    std::string out(kLossHeader);
    out += '\n';
    for (std::size_t i = 0; i < loss.size(); ++i) out += std::to_string(i + 1) + ',' + io::fmt_real(loss[i]) + '\n';
    return out;
  }

  void ingest() {
    std::optional<YearRange> range;
    if (cfg_.train_first != 0) range = YearRange{cfg_.train_first, cfg_.train_last + 1};
    auto c = kcnlp::ingest(cfg_.corpus_path, rules(), cfg_.min_article_count, range);
    if (c.records.empty()) throw DataError("no records left after ingestion");
    years(c.year_range);
    put("corpus.jsonl", corpus_to_jsonl(c));
    put("ingest_report.txt", "first_year=" + std::to_string(c.year_range.first) + "\nlast_year=" +
                                 std::to_string(c.year_range.last) + "\n" + c.report.to_text());
  }

  void build_kcn() {
    const auto c = stage_corpus();
    const auto kcn = build_temporal_kcn(c, "corpus.jsonl");
    put("kcn_nodes.csv", node_list_csv(kcn, c.keyword_index));
    put("kcn_edges.csv", edge_list_csv(kcn, c.keyword_index));
    put("evolution.csv", evolution_csv(yearly_evolution_stats(c, kcn)));
  }

  void centrality() {
    const auto c = stage_corpus();
    const auto kcn = stage_kcn(c);
    std::vector<CentralityTable> tables;
    for (auto v : cfg_.variants)
      for (const auto& s : kcn.snapshots()) tables.push_back(centrality_table(kcn, c, s.year(), v, cfg_.n_iters));
    put("centrality.csv", centrality_csv(tables, c.keyword_index));
  }

  void communities() {
    const auto c = stage_corpus();
    const auto kcn = stage_kcn(c);
    const auto tables = stage_centrality(c);
    std::vector<CommunityAssignment> all;
    for (auto v : cfg_.variants) {
      auto a = assign_all_years(kcn, tables, v, cfg_.top_n, cfg_.community_scores);
      all.insert(all.end(), a.begin(), a.end());
    }
    const auto rows = typed_edge_stats(kcn, all);
    put("communities.csv", community_csv(all, c.keyword_index));
    put("typed_edges.csv", typed_edge_csv(rows));
    put("edge_shares.csv", edge_share_csv(rows, years(c.year_range).second));
  }

  void features() {
    const auto c = stage_corpus();
    const auto kcn = stage_kcn(c);
    const auto tables = stage_centrality(c);
    const auto assignments = stage_communities(c);
    const auto [train, test] = years(c.year_range);
    FeatureContext ctx(kcn, c, tables, assignments);
    InstanceOptions opt;
    opt.train_first = train.first;
    opt.ratio_neg_per_pos = cfg_.neg_ratio;
    opt.rng_seed = cfg_.seed;
    const auto set = build_instances(kcn, ctx, test, opt);
    if (set.positives == 0) throw DataError("no positive instances in test year " + std::to_string(test));
    const auto held = stratified_holdout(set, cfg_.holdout_fraction, cfg_.seed + 1);
    put("instances.csv", instances_csv(set, c.keyword_index));
    put("feature_density.csv", density_csv(set));
    std::string split(kSplitHeader);
    split += '\n';
    for (std::size_t i = 0; i < set.instances.size(); ++i) {
      auto [x, y] = pair_names(set.instances[i], c.keyword_index);
      split += x + ',' + y + ',' + (set.instances[i].positive ? "1" : "0") + ',' + (held[i] ? "holdout" : "train") + '\n';
    }
    put("split.csv", split);
    put("instances_summary.txt", "instances=" + std::to_string(set.instances.size()) +
                                     "\npositives=" + std::to_string(set.positives) +
                                     "\nnegatives=" + std::to_string(set.negatives) +
                                     "\ntest_year=" + std::to_string(set.test_year) + "\n");
  }

  void forecast() {
    const auto c = stage_corpus();
    const auto set = stage_instances(c);
    const auto held = stage_split(set, c);
    auto tc = cfg_.train_config();
    tc.on_epoch = [this](int e, double loss) {
      if (e % 100 == 0) say("  epoch " + std::to_string(e) + " loss " + io::fmt_real(loss));
    };
    const auto f = train_forecasters(set, held, tc);
    const auto fc = forecast_test_year(set, f);
    put("forecaster_numeric.ckpt", checkpoint_to_string(f.numeric));
    put("forecaster_categorical.ckpt", checkpoint_to_string(f.categorical));
    put("loss_forecaster_numeric.csv", loss_csv(f.numeric_loss));
    put("loss_forecaster_categorical.csv", loss_csv(f.categorical_loss));
    std::string out(kForecastHeader);
    out += '\n';
    for (std::size_t i = 0; i < set.instances.size(); ++i) {
      auto [x, y] = pair_names(set.instances[i], c.keyword_index);
      for (std::size_t d = 0; d < set.dims(); ++d)
        out += x + ',' + y + ',' + set.feature_names[d] + ',' + io::fmt_real(fc[i][d]) + '\n';
    }
    put("forecasts.csv", out);

    std::string nr(kNrmseHeader);
    nr += '\n';
    const auto T = set.train_steps();
    for (auto d : forecast_layout().numeric) {
      std::vector<double> pred, actual;
      for (std::size_t i = 0; i < set.instances.size(); ++i)
        if (held[i]) {
          pred.push_back(fc[i][d]);
          actual.push_back(set.instances[i].series[T][d]);
        }
      std::string value;
      try {
        value = io::fmt_real(normalized_rmse(pred, actual));
      } catch (const NumericError&) {
        value = "nan";
      }
      nr += set.feature_names[d] + ',' + value + '\n';
    }
    put("nrmse.csv", nr);
  }

  std::vector<std::vector<double>> stage_forecasts(const InstanceSet& set, const Corpus& c) const {
    auto p = require("forecasts.csv", "forecast");
    auto rows = io::read_csv(p, kForecastHeader);
    if (rows.size() != set.instances.size() * set.dims()) throw DataError(p.string() + ": row count differs from instances");
    std::vector<std::vector<double>> fc(set.instances.size(), std::vector<double>(set.dims()));
    std::size_t r = 0;
    for (std::size_t i = 0; i < set.instances.size(); ++i) {
      auto [x, y] = pair_names(set.instances[i], c.keyword_index);
      for (std::size_t d = 0; d < set.dims(); ++d, ++r) {
        if (rows[r][0] != x || rows[r][1] != y || rows[r][2] != set.feature_names[d])
          throw DataError(p.string() + ": row " + std::to_string(r + 2) + " out of order");
        fc[i][d] = io::parse_real(rows[r][3], p.string());
      }
    }
    return fc;
  }

  void classify() {
    const auto c = stage_corpus();
    const auto set = stage_instances(c);
    const auto held = stage_split(set, c);
    const auto fc = stage_forecasts(set, c);
    for (const auto& name : feature_sets()) {
      say("  classifier " + name);
      auto tc = cfg_.train_config();
      const auto run = run_classifier(set, fc, held, name, tc);
      put("classifier_" + name + ".ckpt", checkpoint_to_string(run.params));
      put("loss_classifier_" + name + ".csv", loss_csv(run.epoch_loss));
      std::string out(kScoreHeader);
      out += '\n';
      for (std::size_t i = 0; i < set.instances.size(); ++i) {
        auto [x, y] = pair_names(set.instances[i], c.keyword_index);
        out += x + ',' + y + ',' + (set.instances[i].positive ? "1" : "0") + ',' + (held[i] ? "holdout" : "train") + ',' +
               io::fmt_real(run.scores[i]) + '\n';
      }
      put("scores_" + name + ".csv", out);
    }
  }

 public:
  /// Report for one feature set from its scores file (holdout rows only) and
  /// nrmse.csv.
  EvalReport report_from_files(const std::string& name) const {
    auto p = require("scores_" + name + ".csv", "classify");
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& r : io::read_csv(p, kScoreHeader)) {
      if (r[3] != "holdout") continue;
      scores.push_back(io::parse_real(r[4], p.string()));
      labels.push_back(r[2] == "1" ? 1 : 0);
    }
    if (scores.empty()) throw DataError(p.string() + ": no holdout rows");
    auto rep = evaluate_scores(name, scores, labels, cfg_.threshold);
    std::map<std::string, double> nrmse;
    auto np = require("nrmse.csv", "forecast");
    for (const auto& r : io::read_csv(np, kNrmseHeader)) nrmse[r[0]] = io::parse_real(r[1], np.string());
    auto names = pair_feature_names();
    for (auto d : feature_set_dims(name))
      if (auto it = nrmse.find(names[d]); it != nrmse.end()) rep.nrmse[names[d]] = it->second;
    return rep;
  }

 private:
  void evaluate() {
    std::string summary = "feature_set,auc,accuracy\n";
    for (const auto& name : feature_sets()) {
      const auto rep = report_from_files(name);
      put("report_" + name + ".txt", rep.to_text());
      put("roc_" + name + ".csv", rep.roc_csv());
      put("pr_" + name + ".csv", rep.pr_csv());
      summary += name + ',' + io::fmt_real(rep.auc) + ',' + io::fmt_real(rep.accuracy) + '\n';
      say("  " + name + " auc=" + io::fmt_real(rep.auc) + " accuracy=" + io::fmt_real(rep.accuracy));
    }
    put("summary.csv", summary);
  }
};

}  // namespace kcnlp
