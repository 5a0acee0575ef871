#pragma once

// Seeded synthetic corpora with preferential keyword attachment, a few
// persistent hub keywords, citation counts that shrink for newer years and
// research topics, one of which grows in share every year.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kcnlp/corpus.hpp"
#include "kcnlp/error.hpp"

namespace kcnlp {

struct SynthConfig {
  std::uint64_t rng_seed = 7;
  int first_year = 2008;
  int years = 8;
  int articles_per_year = 150;
  int keyword_pool = 400;
  int authors = 120;
  int keywords_min = 3;
  int keywords_max = 6;
  int authors_per_article_max = 4;
  int hubs = 5;
  double pa_strength = 1.5;
  double citation_decay = 0.8;
  double citation_base = 20.0;  // mean citations of a first-year article
  // Research topics: every author and keyword has a home topic (id modulo
  // topics); an article picks a topic with weight (topic + 1)^-topic_skew,
  // times emerging_growth^year_index for the last topic, and draws its authors
  // and keywords from that topic with probability topic_focus. topics = 1
  // turns the structure off.
  int topics = 4;
  double topic_focus = 0.95;
  double topic_skew = 0.5;
  double emerging_growth = 2.0;

  void validate() const {
    if (years < 1 || articles_per_year < 1 || keyword_pool < 1 || authors < 1 || authors_per_article_max < 1)
      throw UsageError("synthetic corpus counts must be positive");
    if (keywords_min < 1 || keywords_max < keywords_min || keywords_max > keyword_pool)
      throw UsageError("keywords per article must satisfy 1 <= min <= max <= pool");
    if (hubs < 0 || hubs > keyword_pool) throw UsageError("hub count must lie in [0, pool]");
    if (pa_strength < 0) throw UsageError("pa_strength must be >= 0");
    if (!(citation_decay > 0 && citation_decay <= 1)) throw UsageError("citation_decay must lie in (0, 1]");
    if (topics < 1 || topics > keyword_pool || topics > authors) throw UsageError("topics must lie in [1, min(pool, authors)]");
    if (!(topic_focus >= 0 && topic_focus <= 1)) throw UsageError("topic_focus must lie in [0, 1]");
    if (topic_skew < 0) throw UsageError("topic_skew must be >= 0");
    if (!(emerging_growth > 0)) throw UsageError("emerging_growth must be > 0");
  }
};

/// Counts the generator knows about its own output.
struct SynthReport {
  std::size_t articles = 0;
  std::size_t distinct_keywords = 0;
  std::size_t keywords_in_two_or_more_articles = 0;
  std::size_t distinct_authors = 0;

  std::string to_text() const {
    std::ostringstream o;
    o << "articles=" << articles << "\n"
      << "distinct_keywords=" << distinct_keywords << "\n"
      << "keywords_in_two_or_more_articles=" << keywords_in_two_or_more_articles << "\n"
      << "distinct_authors=" << distinct_authors << "\n";
    return o.str();
  }
};

struct SynthOutput {
  std::vector<ArticleRecord> records;
  SynthReport report;

  std::string jsonl() const {
    std::string out;
    for (const auto& r : records) {
      out += record_to_json(r).dump();
      out += '\n';
    }
    return out;
  }
};

inline std::string synth_keyword_name(int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "kw%04d", k);
  return buf;
}

inline std::string synth_author_name(int a) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "author %03d", a);
  return buf;
}

/// Each article draws distinct keywords with weight (degree + 1)^pa_strength,
/// where degree is taken in the co-occurrence graph generated so far. Hubs
/// (the first `hubs` keywords) are placed into one article each per year.
inline SynthOutput generate(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  const auto pool = static_cast<std::size_t>(cfg.keyword_pool);
  std::vector<std::vector<bool>> adj(pool, std::vector<bool>(pool, false));
  std::vector<double> degree(pool, 0.0);
  SynthOutput out;
  std::map<int, int> keyword_articles;
  std::map<int, int> author_used;

  std::uniform_int_distribution<int> n_kw(cfg.keywords_min, cfg.keywords_max);
  std::uniform_int_distribution<int> n_au(1, cfg.authors_per_article_max);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const auto ntopics = static_cast<std::size_t>(cfg.topics);
  auto topic_of_keyword = [&](std::size_t k) { return k % ntopics; };
  std::vector<std::vector<int>> topic_authors(ntopics);
  for (int a = 0; a < cfg.authors; ++a) topic_authors[static_cast<std::size_t>(a) % ntopics].push_back(a);
  std::vector<double> topic_weight(ntopics);
  for (std::size_t t = 0; t < ntopics; ++t) topic_weight[t] = std::pow(static_cast<double>(t + 1), -cfg.topic_skew);
  std::uniform_int_distribution<int> pick_author(0, cfg.authors - 1);

  for (int yi = 0; yi < cfg.years; ++yi) {
    const int year = cfg.first_year + yi;
    const double mean_cites = cfg.citation_base * std::pow(cfg.citation_decay, yi);
    std::poisson_distribution<long> cites(mean_cites);
    std::vector<double> tw = topic_weight;
    tw.back() *= std::pow(cfg.emerging_growth, yi);
    std::discrete_distribution<std::size_t> pick_topic(tw.begin(), tw.end());
    std::vector<std::pair<int, int>> year_edges;
    std::vector<double> base(pool);
    for (std::size_t k = 0; k < pool; ++k) base[k] = std::pow(degree[k] + 1.0, cfg.pa_strength);
    for (int ai = 0; ai < cfg.articles_per_year; ++ai) {
      const std::size_t topic = pick_topic(rng);
      std::vector<double> in_topic(pool, 0.0), w = base;
      for (std::size_t k = 0; k < pool; ++k)
        if (topic_of_keyword(k) == topic) in_topic[k] = base[k];
      const int want = n_kw(rng);
      std::vector<int> kws;
      if (ai < cfg.hubs) {
        kws.push_back(ai);
        w[static_cast<std::size_t>(ai)] = in_topic[static_cast<std::size_t>(ai)] = 0.0;
      }
      while (static_cast<int>(kws.size()) < want) {
        const bool focused = coin(rng) < cfg.topic_focus &&
                             std::any_of(in_topic.begin(), in_topic.end(), [](double x) { return x > 0; });
        auto& src = focused ? in_topic : w;
        std::discrete_distribution<int> d(src.begin(), src.end());
        const int k = d(rng);
        kws.push_back(k);
        w[static_cast<std::size_t>(k)] = in_topic[static_cast<std::size_t>(k)] = 0.0;
      }
      ArticleRecord r;
      r.id = "syn-" + std::to_string(year) + "-" + std::to_string(ai);
      r.year = year;
      r.citations = cites(rng);
      for (int k : kws) {
        r.keywords.push_back(synth_keyword_name(k));
        ++keyword_articles[k];
      }
      const auto& home = topic_authors[topic];
      std::uniform_int_distribution<std::size_t> pick_home(0, home.size() - 1);
      const int na = std::min(n_au(rng), cfg.authors);
      std::vector<int> aus;
      for (int tries = 0; static_cast<int>(aus.size()) < na && tries < 64; ++tries) {
        const int a = coin(rng) < cfg.topic_focus ? home[pick_home(rng)] : pick_author(rng);
        if (std::find(aus.begin(), aus.end(), a) == aus.end()) aus.push_back(a);
      }
      for (int a : aus) {
        r.authors.push_back(synth_author_name(a));
        ++author_used[a];
      }
      for (std::size_t i = 0; i < kws.size(); ++i)
        for (std::size_t j = i + 1; j < kws.size(); ++j) year_edges.emplace_back(kws[i], kws[j]);
      out.records.push_back(std::move(r));
    }
    // Degrees advance once per year so all articles of a year share weights.
    for (auto [a, b] : year_edges) {
      auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
      if (!adj[ua][ub]) {
        adj[ua][ub] = adj[ub][ua] = true;
        degree[ua] += 1;
        degree[ub] += 1;
      }
    }
  }
  out.report.articles = out.records.size();
  out.report.distinct_keywords = keyword_articles.size();
  for (auto [k, n] : keyword_articles) out.report.keywords_in_two_or_more_articles += n >= 2;
  out.report.distinct_authors = author_used.size();
  return out;
}

}  // namespace kcnlp
