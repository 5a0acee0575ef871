#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "kcnlp/corpus.hpp"
#include "kcnlp/synth.hpp"

using namespace kcnlp;

namespace {

NormalizationRules file_rules() { return load_rules(std::string(KCNLP_DATA_DIR) + "/normalization_rules.txt"); }

ArticleRecord rec(std::string id, int year, std::vector<std::string> authors, std::vector<std::string> kws,
                  std::int64_t cites = 0) {
  return {std::move(id), year, std::move(authors), std::move(kws), cites};
}

}  // namespace

TEST(Normalize, PluralAndCase) {
  const auto r = NormalizationRules::english_plurals();
  EXPECT_EQ(normalize_keyword("Dilator Muscles", r), "dilator muscle");
  EXPECT_EQ(normalize_keyword("sleep", r), "sleep");
  EXPECT_EQ(normalize_keyword("  Sleep   Studies ", r), "sleep study");
  EXPECT_EQ(normalize_keyword("boxes", r), "box");
  EXPECT_EQ(normalize_keyword("Diabetes", r), "diabetes");
  EXPECT_EQ(normalize_keyword("stress", r), "stress");
  EXPECT_EQ(normalize_keyword("diagnosis", r), "diagnosis");
  EXPECT_EQ(normalize_keyword("gas", r), "gas");
}

TEST(Normalize, PunctuationAndApostrophes) {
  const auto r = NormalizationRules::english_plurals();
  EXPECT_EQ(normalize_keyword("Alzheimer's disease", r), "alzheimers disease");
  EXPECT_EQ(normalize_keyword("sleep, (REM) stage", r), "sleep rem stage");
  EXPECT_EQ(normalize_keyword("non-REM", r), "non-rem");
  EXPECT_EQ(normalize_keyword(" -- ", r), "");
  EXPECT_EQ(normalize_keyword("", r), "");
}

TEST(Normalize, AbbreviationAndSynonym) {
  const auto r = file_rules();
  EXPECT_EQ(normalize_keyword("bmi", r), "body mass index");
  EXPECT_EQ(normalize_keyword("BMI", r), "body mass index");
  EXPECT_EQ(normalize_keyword("OSAS", r), "obstructive sleep apnea");
  EXPECT_EQ(normalize_keyword("Sleep Apnoea", r), "sleep apnea");
  EXPECT_EQ(normalize_keyword("dreaming", r), "dream");
}

TEST(Normalize, CanonicalFormsAreFixedPoints) {
  const auto r = file_rules();
  for (const auto* m : {&r.abbreviation_map, &r.synonym_map})
    for (const auto& [raw, canon] : *m) EXPECT_EQ(normalize_keyword(canon, r), canon) << raw;
}

TEST(Normalize, IdempotentOnFuzzSet) {
  const auto rules = file_rules();
  const std::vector<std::string> pieces = {
      "Sleep", "apnoea", "BMI", "osa", "studies", "boxes", "classes", "glasses", "Diabetes", "bus",   "cases",
      "ies",   "s",      "ss",  "-",   "--",      "'",     ",",       "(",       ")",        "  ",    "\t",
      "Ä",     "x",      "ys",  "apnea", "dreaming", "series", "analyses", "virus", "mice", "type 2", "rem",
      "sleep disordered breathing", "overweight and obesity", "ahi", "1", "2s", "Ies", "SSES", "XES"};
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> len(1, 6);
  std::uniform_int_distribution<int> sep(0, 3);
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    for (int k = len(rng); k > 0; --k) {
      s += pieces[pick(rng)];
      if (sep(rng) == 0) s += ' ';
    }
    const auto once = normalize_keyword(s, rules);
    EXPECT_EQ(normalize_keyword(once, rules), once) << "input: '" << s << "'";
  }
}

TEST(Rules, ParseDirectives) {
  auto r = parse_rules("plural ae a\nprotect data\nabbrev icu = intensive care unit\n# comment\n\n");
  EXPECT_EQ(normalize_keyword("vertebrae", r), "vertebra");
  EXPECT_EQ(normalize_keyword("data", r), "data");
  EXPECT_EQ(normalize_keyword("ICU", r), "intensive care unit");
  EXPECT_THROW(parse_rules("frobnicate x\n"), DataError);
  EXPECT_THROW(parse_rules("synonym no equals sign\n"), DataError);
}

TEST(Rules, ResetDropsBuiltins) {
  auto r = parse_rules("reset\n");
  EXPECT_EQ(normalize_keyword("muscles", r), "muscles");
}

TEST(Ingest, FiltersSingleArticleKeywords) {
  std::vector<ArticleRecord> raw = {rec("1", 2000, {"A"}, {"x", "y"}), rec("2", 2000, {"B"}, {"y", "z"}),
                                    rec("3", 2001, {"C"}, {"z", "y"})};
  auto c = build_corpus(raw, NormalizationRules::english_plurals());
  EXPECT_FALSE(c.keyword_index.find("x").has_value());
  EXPECT_EQ(c.keyword_count(), 2u);
  EXPECT_EQ(c.records.size(), 3u);
  EXPECT_EQ(c.report.keywords_filtered, 1u);
}

TEST(Ingest, DeduplicatesWithinRecord) {
  std::vector<ArticleRecord> raw = {rec("1", 2000, {"A"}, {"Sleep", "sleep"}), rec("2", 2000, {"A"}, {"sleep"})};
  auto c = build_corpus(raw, NormalizationRules::english_plurals());
  EXPECT_EQ(c.keyword_count(), 1u);
  EXPECT_EQ(c.records.size(), 2u);
  EXPECT_EQ(c.records[0].keywords.size(), 1u);
}

TEST(Ingest, DropsRecordsLeftWithoutKeywords) {
  std::vector<ArticleRecord> raw = {rec("1", 2000, {"A"}, {"--"}), rec("2", 2000, {"A"}, {"only"}),
                                    rec("3", 2000, {"A"}, {"k"}), rec("4", 2001, {"B"}, {"k"})};
  auto c = build_corpus(raw, NormalizationRules::english_plurals());
  EXPECT_EQ(c.records.size(), 2u);
  EXPECT_EQ(c.report.records_without_keywords, 1u);
  EXPECT_EQ(c.report.records_emptied_by_filter, 1u);
}

TEST(Ingest, DenseIdsInFirstOccurrenceOrder) {
  std::vector<ArticleRecord> raw = {rec("1", 2000, {"A"}, {"b", "a"}), rec("2", 2000, {"A"}, {"a", "b", "c"}),
                                    rec("3", 2000, {"A"}, {"c"})};
  auto c = build_corpus(raw, NormalizationRules::english_plurals());
  EXPECT_EQ(*c.keyword_index.find("b"), 0);
  EXPECT_EQ(*c.keyword_index.find("a"), 1);
  EXPECT_EQ(*c.keyword_index.find("c"), 2);
}

TEST(Ingest, ErrorsNameTheLine) {
  auto dir = testing_support::scratch_dir("ingest_errors");
  auto write = [&](const std::string& body) {
    io::write_file(dir / "c.jsonl", body);
    return dir / "c.jsonl";
  };
  const std::string good = R"({"id":"a","year":2000,"authors":["x"],"keywords":["k"],"citations":1})";
  try {
    ingest(write(good + "\n{not json\n"), NormalizationRules::english_plurals());
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ingest(write(R"({"id":"a","year":2000,"authors":["x"],"keywords":["k"],"citations":-1})"),
                      NormalizationRules::english_plurals()),
               DataError);
  EXPECT_THROW(ingest(write(R"({"id":"a","year":"2000","authors":["x"],"keywords":["k"],"citations":1})"),
                      NormalizationRules::english_plurals()),
               DataError);
  EXPECT_THROW(ingest(write(good + "\n"), NormalizationRules::english_plurals(), 1, YearRange{2001, 2005}),
               DataError);
  EXPECT_THROW(ingest(write(R"({"id":"a","year":2000,"authors":[],"keywords":["k"],"citations":1})"),
                      NormalizationRules::english_plurals(), 1),
               DataError);
  EXPECT_THROW(ingest(dir / "missing.jsonl", NormalizationRules::english_plurals()), DataError);
}

// Keyword count of an ingested synthetic file against a one-pass hash count
// over the emitted lines.
TEST(Ingest, SynthKeywordCountMatchesScanOracle) {
  SynthConfig sc;
  sc.rng_seed = 7;
  sc.years = 2;
  sc.articles_per_year = 100;
  auto out = generate(sc);
  auto dir = testing_support::scratch_dir("ingest_scan");
  io::write_file(dir / "corpus.jsonl", out.jsonl());

  std::unordered_map<std::string, int> articles_with;
  std::istringstream in(io::read_file(dir / "corpus.jsonl"));
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) {
    ++lines;
    auto j = nlohmann::json::parse(line);
    std::set<std::string> seen(j["keywords"].begin(), j["keywords"].end());
    for (const auto& k : seen) ++articles_with[k];
  }
  std::size_t expected = 0;
  for (auto& [k, n] : articles_with) expected += n >= 2;

  auto c = ingest(dir / "corpus.jsonl", NormalizationRules::english_plurals());
  EXPECT_EQ(lines, 200u);
  EXPECT_EQ(c.keyword_count(), expected);
  EXPECT_EQ(c.keyword_count(), out.report.keywords_in_two_or_more_articles);
  auto all = ingest(dir / "corpus.jsonl", NormalizationRules::english_plurals(), 1);
  EXPECT_EQ(all.keyword_count(), articles_with.size());
  EXPECT_EQ(all.keyword_count(), out.report.distinct_keywords);
  EXPECT_EQ(all.author_count(), out.report.distinct_authors);
}

TEST(Ingest, RetainedKeywordsMeetThreshold) {
  auto c = testing_support::synth_corpus(testing_support::small_synth());
  std::vector<int> n(c.keyword_count(), 0);
  for (const auto& a : c.records) {
    EXPECT_FALSE(a.keywords.empty());
    for (auto k : a.keywords) ++n[static_cast<std::size_t>(k)];
  }
  for (int x : n) EXPECT_GE(x, 2);
}

TEST(Ingest, JsonlRoundTrip) {
  auto c = testing_support::synth_corpus(testing_support::small_synth());
  auto dir = testing_support::scratch_dir("roundtrip");
  io::write_file(dir / "c.jsonl", corpus_to_jsonl(c));
  auto d = ingest(dir / "c.jsonl", NormalizationRules{}, 1);
  EXPECT_EQ(corpus_to_jsonl(d), corpus_to_jsonl(c));
  EXPECT_EQ(d.year_range, c.year_range);
}
