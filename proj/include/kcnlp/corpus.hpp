#pragma once

// Bibliographic record ingestion: keyword normalization, rare-keyword
// filtering and dense interning of keywords and authors.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kcnlp/error.hpp"
#include "kcnlp/io.hpp"

namespace kcnlp {

using KeywordId = std::int32_t;
using AuthorId = std::int32_t;

struct YearRange {
  int first = 0;
  int last = 0;

  bool contains(int y) const { return y >= first && y <= last; }
  int size() const { return last - first + 1; }
  bool operator==(const YearRange&) const = default;
};

/// One publication as it appears in an input file (strings not yet interned).
struct ArticleRecord {
  std::string id;
  int year = 0;
  std::vector<std::string> authors;
  std::vector<std::string> keywords;
  std::int64_t citations = 0;
};

struct SuffixRule {
  std::string suffix;
  std::string replacement;
};

/// Deterministic keyword canonicalization table.
///
/// Plural rules rewrite the last token of a keyword; the first matching rule
/// wins. Tokens listed in `protected_words`, or ending in one of
/// `protected_suffixes`, are never rewritten. After plural rewriting the
/// whole string is looked up in `abbreviation_map` and then `synonym_map`.
struct NormalizationRules {
  std::map<std::string, std::string> synonym_map;
  std::map<std::string, std::string> abbreviation_map;
  std::vector<SuffixRule> plural_suffix_rules;
  std::unordered_set<std::string> protected_words;
  std::vector<std::string> protected_suffixes;
  std::size_t min_stem = 3;

  /// English plural rules only; no synonym or abbreviation entries.
  static NormalizationRules english_plurals() {
    NormalizationRules r;
    r.plural_suffix_rules = {{"ies", "y"}, {"sses", "ss"}, {"xes", "x"}, {"s", ""}};
    r.protected_suffixes = {"ss", "us", "is", "ous", "ics", "sis"};
    r.protected_words = {"diabetes", "series", "species", "news", "herpes", "rabies",
                         "measles", "mumps", "aids", "lens", "gas", "bias", "atlas",
                         "kudos", "physics", "genetics", "ethics", "economics",
                         "statistics", "mathematics", "pediatrics", "obstetrics",
                         "geriatrics", "orthopedics", "diagnosis", "prognosis",
                         "sepsis", "stress"};
    return r;
  }
};

namespace detail {

inline bool ends_with(std::string_view s, std::string_view suf) {
  return s.size() >= suf.size() && s.substr(s.size() - suf.size()) == suf;
}

// Lower-case ASCII, drop apostrophes, turn other ASCII punctuation (except
// '-') into spaces, collapse whitespace, drop tokens made only of hyphens.
inline std::string clean_text(std::string_view raw) {
  std::string spaced;
  spaced.reserve(raw.size());
  for (unsigned char c : raw) {
    if (c == '\'' || c == '`') continue;
    if (c >= 0x80 || std::isalnum(c) || c == '-') {
      spaced.push_back(static_cast<char>(std::tolower(c)));
    } else {
      spaced.push_back(' ');
    }
  }
  std::string out;
  std::istringstream ss(spaced);
  std::string tok;
  while (ss >> tok) {
    auto b = tok.find_first_not_of('-');
    if (b == std::string::npos) continue;
    auto e = tok.find_last_not_of('-');
    tok = tok.substr(b, e - b + 1);
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

inline std::string singularize(std::string_view token, const NormalizationRules& rules) {
  std::string t(token);
  if (rules.protected_words.count(t)) return t;
  for (const auto& ps : rules.protected_suffixes)
    if (ends_with(t, ps)) return t;
  for (const auto& rule : rules.plural_suffix_rules) {
    if (!ends_with(t, rule.suffix)) continue;
    auto out = t.substr(0, t.size() - rule.suffix.size()) + rule.replacement;
    return out.size() < rules.min_stem ? t : out;
  }
  return t;
}

inline std::string pre_map(std::string_view raw, const NormalizationRules& rules) {
  std::string s = clean_text(raw);
  // Singularizing can expose a trailing hyphen, so repeat until stable.
  for (;;) {
    if (s.empty()) return s;
    auto sp = s.rfind(' ');
    std::size_t start = sp == std::string::npos ? 0 : sp + 1;
    auto next = clean_text(s.substr(0, start) + singularize(std::string_view(s).substr(start), rules));
    if (next == s) return s;
    s = std::move(next);
  }
}

}  // namespace detail

/// Canonical form of a raw keyword. May return an empty string, which the
/// caller treats as "drop this keyword".
inline std::string normalize_keyword(std::string_view raw, const NormalizationRules& rules) {
  std::string s = detail::pre_map(raw, rules);
  if (auto it = rules.abbreviation_map.find(s); it != rules.abbreviation_map.end()) s = it->second;
  if (auto it = rules.synonym_map.find(s); it != rules.synonym_map.end()) s = it->second;
  return s;
}

/// Author strings are only lower-cased and whitespace-collapsed.
inline std::string normalize_author(std::string_view raw) {
  std::string out;
  std::istringstream ss{std::string(raw)};
  std::string tok;
  while (ss >> tok) {
    for (auto& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

/// Re-keys both maps by their normalized keys and rejects tables whose
/// canonical forms are not fixed points of normalize_keyword.
inline void finalize_rules(NormalizationRules& rules) {
  auto rekey = [&](std::map<std::string, std::string>& m) {
    std::map<std::string, std::string> out;
    for (auto& [k, v] : m) {
      auto key = detail::pre_map(k, rules);
      auto val = detail::pre_map(v, rules);
      if (key.empty() || val.empty()) throw DataError("normalization rule with empty side: '" + k + "'");
      if (key != val) out[key] = val;
    }
    m = std::move(out);
  };
  rekey(rules.abbreviation_map);
  rekey(rules.synonym_map);
  for (const auto* m : {&rules.abbreviation_map, &rules.synonym_map}) {
    for (const auto& [k, v] : *m) {
      if (normalize_keyword(v, rules) != v)
        throw DataError("normalization rules are cyclic or chained: '" + k + "' -> '" + v +
                        "' -> '" + normalize_keyword(v, rules) + "'");
    }
  }
}

/// Loads a rule table. Line forms (blank lines and '#' comments ignored):
///   plural <suffix> <replacement|->      protect <word>
///   protect-suffix <suffix>               min-stem <n>
///   abbrev <raw> = <canonical>            synonym <raw> = <canonical>
/// Rule tables extend the built-in English plural rules unless the file
/// contains a `reset` line.
inline NormalizationRules parse_rules(std::string_view text) {
  NormalizationRules rules = NormalizationRules::english_plurals();
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::size_t user_plurals = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto where = "rules line " + std::to_string(lineno);
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    if (kind == "reset") {
      rules = NormalizationRules{};
      user_plurals = 0;
    } else if (kind == "plural") {
      SuffixRule r;
      if (!(ls >> r.suffix >> r.replacement)) throw DataError(where + ": plural needs 2 fields");
      if (r.replacement == "-") r.replacement.clear();
      // File rules take precedence over the built-in ones, in file order.
      auto& pr = rules.plural_suffix_rules;
      pr.insert(pr.begin() + static_cast<std::ptrdiff_t>(user_plurals++), r);
    } else if (kind == "protect") {
      std::string w;
      if (!(ls >> w)) throw DataError(where + ": protect needs a word");
      rules.protected_words.insert(w);
    } else if (kind == "protect-suffix") {
      std::string w;
      if (!(ls >> w)) throw DataError(where + ": protect-suffix needs a suffix");
      rules.protected_suffixes.push_back(w);
    } else if (kind == "min-stem") {
      if (!(ls >> rules.min_stem)) throw DataError(where + ": min-stem needs an integer");
    } else if (kind == "abbrev" || kind == "synonym") {
      std::string rest;
      std::getline(ls, rest);
      auto eq = rest.find('=');
      if (eq == std::string::npos) throw DataError(where + ": expected '<raw> = <canonical>'");
      auto lhs = rest.substr(0, eq), rhs = rest.substr(eq + 1);
      auto& m = kind == "abbrev" ? rules.abbreviation_map : rules.synonym_map;
      m[lhs] = rhs;
    } else {
      throw DataError(where + ": unknown directive '" + kind + "'");
    }
  }
  finalize_rules(rules);
  return rules;
}

inline NormalizationRules load_rules(const std::filesystem::path& p) {
  return parse_rules(io::read_file(p));
}

/// Dense bidirectional string <-> id map; ids follow first insertion.
class Interner {
 public:
  std::int32_t intern(const std::string& s) {
    auto [it, inserted] = ids_.try_emplace(s, static_cast<std::int32_t>(names_.size()));
    if (inserted) names_.push_back(s);
    return it->second;
  }
  std::optional<std::int32_t> find(const std::string& s) const {
    auto it = ids_.find(s);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  const std::string& name(std::int32_t id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::unordered_map<std::string, std::int32_t> ids_;
  std::vector<std::string> names_;
};

/// A retained article with interned, de-duplicated keywords and authors.
struct Article {
  std::string id;
  int year = 0;
  std::vector<AuthorId> authors;
  std::vector<KeywordId> keywords;
  std::int64_t citations = 0;
};

struct IngestReport {
  std::size_t lines = 0;
  std::size_t records_parsed = 0;
  std::size_t records_without_keywords = 0;  // empty after normalization
  std::size_t records_emptied_by_filter = 0;
  std::size_t records_retained = 0;
  std::size_t keywords_before_filter = 0;
  std::size_t keywords_filtered = 0;
  std::size_t keywords_retained = 0;
  std::size_t authors = 0;

  std::string to_text() const {
    std::ostringstream o;
    o << "lines=" << lines << "\n"
      << "records_parsed=" << records_parsed << "\n"
      << "records_without_keywords=" << records_without_keywords << "\n"
      << "records_emptied_by_filter=" << records_emptied_by_filter << "\n"
      << "records_retained=" << records_retained << "\n"
      << "keywords_before_filter=" << keywords_before_filter << "\n"
      << "keywords_filtered=" << keywords_filtered << "\n"
      << "keywords_retained=" << keywords_retained << "\n"
      << "authors=" << authors << "\n";
    return o.str();
  }
};

/// Immutable after ingestion.
struct Corpus {
  std::vector<Article> records;
  Interner keyword_index;
  Interner author_index;
  YearRange year_range;
  IngestReport report;

  std::size_t keyword_count() const { return keyword_index.size(); }
  std::size_t author_count() const { return author_index.size(); }
};

inline nlohmann::json record_to_json(const ArticleRecord& r) {
  return nlohmann::json{{"id", r.id},
                        {"year", r.year},
                        {"authors", r.authors},
                        {"keywords", r.keywords},
                        {"citations", r.citations}};
}

inline ArticleRecord parse_record_line(std::string_view line, std::size_t lineno) {
  auto where = "line " + std::to_string(lineno);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(where + ": malformed record: " + e.what());
  }
  if (!j.is_object()) throw DataError(where + ": record is not an object");
  ArticleRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    if (!j.at("year").is_number_integer()) throw DataError(where + ": 'year' must be an integer");
    r.year = j.at("year").get<int>();
    r.authors = j.at("authors").get<std::vector<std::string>>();
    r.keywords = j.at("keywords").get<std::vector<std::string>>();
    if (!j.at("citations").is_number_integer())
      throw DataError(where + ": 'citations' must be an integer");
    r.citations = j.at("citations").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(where + ": malformed record: " + e.what());
  }
  if (r.citations < 0) throw DataError(where + ": negative citation count");
  return r;
}

/// Builds a corpus from already-parsed records. `line_of[i]` is used in error
/// messages only.
inline Corpus build_corpus(const std::vector<ArticleRecord>& raw, const NormalizationRules& rules,
                           int min_article_count = 2,
                           std::optional<YearRange> year_range = std::nullopt,
                           std::vector<std::size_t> line_of = {}) {
  if (min_article_count < 1) throw UsageError("min_article_count must be >= 1");
  Corpus c;
  c.report.records_parsed = raw.size();

  struct Pending {
    const ArticleRecord* src;
    std::vector<std::string> keywords;
    std::vector<std::string> authors;
  };
  std::vector<Pending> pending;
  pending.reserve(raw.size());
  std::unordered_map<std::string, int> article_count;

  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& r = raw[i];
    auto where = "line " + std::to_string(i < line_of.size() ? line_of[i] : i + 1);
    if (year_range && !year_range->contains(r.year))
      throw DataError(where + ": year " + std::to_string(r.year) + " outside configured range [" +
                      std::to_string(year_range->first) + ", " + std::to_string(year_range->last) + "]");
    if (r.citations < 0) throw DataError(where + ": negative citation count");
    Pending p{&r, {}, {}};
    std::unordered_set<std::string> seen;
    for (const auto& k : r.keywords) {
      auto n = normalize_keyword(k, rules);
      if (!n.empty() && seen.insert(n).second) p.keywords.push_back(std::move(n));
    }
    std::unordered_set<std::string> seen_authors;
    for (const auto& a : r.authors) {
      auto n = normalize_author(a);
      if (!n.empty() && seen_authors.insert(n).second) p.authors.push_back(std::move(n));
    }
    if (p.keywords.empty()) {
      ++c.report.records_without_keywords;
      continue;
    }
    if (p.authors.empty()) throw DataError(where + ": record '" + r.id + "' has no authors");
    for (const auto& k : p.keywords) ++article_count[k];
    pending.push_back(std::move(p));
  }

  c.report.keywords_before_filter = article_count.size();
  int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
  for (auto& p : pending) {
    Article a;
    a.id = p.src->id;
    a.year = p.src->year;
    a.citations = p.src->citations;
    for (const auto& k : p.keywords)
      if (article_count[k] >= min_article_count) a.keywords.push_back(c.keyword_index.intern(k));
    if (a.keywords.empty()) {
      ++c.report.records_emptied_by_filter;
      continue;
    }
    for (const auto& au : p.authors) a.authors.push_back(c.author_index.intern(au));
    lo = std::min(lo, a.year);
    hi = std::max(hi, a.year);
    c.records.push_back(std::move(a));
  }
  c.report.keywords_retained = c.keyword_index.size();
  c.report.keywords_filtered = c.report.keywords_before_filter - c.report.keywords_retained;
  c.report.records_retained = c.records.size();
  c.report.authors = c.author_index.size();
  if (year_range)
    c.year_range = *year_range;
  else if (!c.records.empty())
    c.year_range = {lo, hi};
  return c;
}

/// Reads line-delimited JSON records (`id`, `year`, `authors`, `keywords`,
/// `citations`). Blank lines are skipped.
inline Corpus ingest(const std::filesystem::path& path, const NormalizationRules& rules,
                     int min_article_count = 2, std::optional<YearRange> year_range = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus '" + path.string() + "'");
  std::vector<ArticleRecord> raw;
  std::vector<std::size_t> line_of;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    raw.push_back(parse_record_line(line, lineno));
    line_of.push_back(lineno);
  }
  auto c = build_corpus(raw, rules, min_article_count, year_range, std::move(line_of));
  c.report.lines = lineno;
  return c;
}

/// Writes the corpus back in the input format with canonical strings.
inline std::string corpus_to_jsonl(const Corpus& c) {
  std::string out;
  for (const auto& a : c.records) {
    ArticleRecord r{a.id, a.year, {}, {}, a.citations};
    for (auto id : a.authors) r.authors.push_back(c.author_index.name(id));
    for (auto id : a.keywords) r.keywords.push_back(c.keyword_index.name(id));
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

}  // namespace kcnlp
