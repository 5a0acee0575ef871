#pragma once

// Genealogical communities: last year's top-N central keywords are this
// year's grandparents; their neighbors are parents, the parents' remaining
// neighbors children, and everything else guests.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kcnlp/centrality.hpp"
#include "kcnlp/error.hpp"
#include "kcnlp/io.hpp"
#include "kcnlp/kcn.hpp"

namespace kcnlp {

enum class Community : std::uint8_t { GP = 0, P = 1, C = 2, G = 3 };

inline constexpr std::array<Community, 4> kCommunities = {Community::GP, Community::P, Community::C, Community::G};

inline std::string_view to_string(Community c) {
  static constexpr std::string_view names[] = {"GP", "P", "C", "G"};
  return names[static_cast<int>(c)];
}

inline Community parse_community(std::string_view s) {
  for (auto c : kCommunities)
    if (to_string(c) == s) return c;
  throw DataError("unknown community label '" + std::string(s) + "'");
}

/// Score attached to each label. Defaults form a geometric ladder with a
/// 4x gap between grandparents and parents and 2x steps below.
struct CommunityScores {
  double gp = 1.0, p = 0.25, c = 0.125, g = 0.0625;

  double of(Community k) const {
    switch (k) {
      case Community::GP: return gp;
      case Community::P: return p;
      case Community::C: return c;
      case Community::G: return g;
    }
    return 0;
  }

  void validate() const {
    if (!(gp > p && p > c && c > g && g > 0))
      throw UsageError("community scores must satisfy GP > P > C > G > 0");
  }
};

/// Keywords by descending z-score, ties by ascending id; first min(n, size).
inline std::vector<KeywordId> top_n_central(const CentralityTable& table, int n = 20) {
  if (n < 1) throw UsageError("top-N must be >= 1");
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (table.zscored[a] != table.zscored[b]) return table.zscored[a] > table.zscored[b];
    return table.keywords[a] < table.keywords[b];
  });
  order.resize(std::min(order.size(), static_cast<std::size_t>(n)));
  std::vector<KeywordId> out;
  for (auto i : order) out.push_back(table.keywords[i]);
  return out;
}

struct CommunityAssignment {
  int year = 0;
  Variant variant = Variant::D;
  std::vector<KeywordId> keywords;  // snapshot nodes, ascending
  std::vector<Community> labels;
  std::vector<double> scores;
  std::vector<KeywordId> grandparent_set;  // includes grandparents absent this year

  std::optional<Community> label(KeywordId k) const {
    auto it = std::lower_bound(keywords.begin(), keywords.end(), k);
    if (it == keywords.end() || *it != k) return std::nullopt;
    return labels[static_cast<std::size_t>(it - keywords.begin())];
  }

  std::size_t count(Community c) const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), c)); }
};

inline CommunityAssignment assign_communities(const YearlySnapshot& snapshot, const std::vector<KeywordId>& grandparents,
                                              const CommunityScores& scores = {}) {
  CommunityAssignment a;
  a.year = snapshot.year();
  a.grandparent_set = grandparents;
  a.keywords = snapshot.nodes();
  std::vector<Community> label(snapshot.universe(), Community::G);
  auto at = [&](KeywordId k) -> Community& { return label[static_cast<std::size_t>(k)]; };

  std::vector<KeywordId> gp, parents;
  for (auto k : grandparents)
    if (snapshot.has_node(k)) {
      at(k) = Community::GP;
      gp.push_back(k);
    }
  for (auto k : gp)
    for (auto n : snapshot.neighbors(k))
      if (at(n) == Community::G) {
        at(n) = Community::P;
        parents.push_back(n);
      }
  for (auto k : parents)
    for (auto n : snapshot.neighbors(k))
      if (at(n) == Community::G) at(n) = Community::C;

  for (auto k : a.keywords) {
    a.labels.push_back(at(k));
    a.scores.push_back(scores.of(at(k)));
  }
  return a;
}

/// Assignments for every year of the network. Year t draws grandparents from
/// the year t-1 table of the same variant; the first year has none, so all its
/// keywords are guests. `tables` must hold one table per network year.
inline std::vector<CommunityAssignment> assign_all_years(const TemporalKcn& kcn,
                                                         const std::vector<CentralityTable>& tables, Variant variant,
                                                         int top_n = 20, const CommunityScores& scores = {}) {
  std::map<int, const CentralityTable*> by_year;
  for (const auto& t : tables)
    if (t.variant == variant) by_year[t.year] = &t;
  std::vector<CommunityAssignment> out;
  for (const auto& snap : kcn.snapshots()) {
    std::vector<KeywordId> gp;
    if (auto it = by_year.find(snap.year() - 1); it != by_year.end()) gp = top_n_central(*it->second, top_n);
    auto a = assign_communities(snap, gp, scores);
    a.variant = variant;
    out.push_back(std::move(a));
  }
  return out;
}

/// Unordered label pairs, in the order used for counting and CSV columns.
inline constexpr std::array<std::pair<Community, Community>, 10> kEdgeClasses = {{
    {Community::GP, Community::GP},
    {Community::GP, Community::P},
    {Community::GP, Community::C},
    {Community::GP, Community::G},
    {Community::P, Community::P},
    {Community::P, Community::C},
    {Community::P, Community::G},
    {Community::C, Community::C},
    {Community::C, Community::G},
    {Community::G, Community::G},
}};

inline std::size_t edge_class_index(Community a, Community b) {
  if (b < a) std::swap(a, b);
  for (std::size_t i = 0; i < kEdgeClasses.size(); ++i)
    if (kEdgeClasses[i].first == a && kEdgeClasses[i].second == b) return i;
  return kEdgeClasses.size();
}

struct TypedEdgeRow {
  int year = 0;
  Variant variant = Variant::D;
  std::array<std::int64_t, 10> counts{};

  std::int64_t total() const { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }

  /// Percentages of the year's total edges (all zeros for an edgeless year).
  std::array<double, 10> percentages() const {
    std::array<double, 10> p{};
    auto t = total();
    if (t == 0) return p;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(t);
    return p;
  }
};

inline std::vector<TypedEdgeRow> typed_edge_stats(const TemporalKcn& kcn,
                                                  const std::vector<CommunityAssignment>& assignments) {
  std::vector<TypedEdgeRow> out;
  for (const auto& a : assignments) {
    const auto& snap = kcn.at(a.year);
    TypedEdgeRow r;
    r.year = a.year;
    r.variant = a.variant;
    for (auto [x, y] : snap.edges()) {
      auto lx = a.label(x), ly = a.label(y);
      if (!lx || !ly) throw DataError("edge endpoint without community label in year " + std::to_string(a.year));
      ++r.counts[edge_class_index(*lx, *ly)];
    }
    out.push_back(r);
  }
  return out;
}

inline std::string edge_class_name(std::size_t i) {
  return std::string(to_string(kEdgeClasses[i].first)) + "-" + std::string(to_string(kEdgeClasses[i].second));
}

inline std::string typed_edge_header() {
  std::string h = "year,variant";
  for (std::size_t i = 0; i < kEdgeClasses.size(); ++i) h += ',' + edge_class_name(i);
  return h;
}

inline std::string typed_edge_csv(const std::vector<TypedEdgeRow>& rows) {
  std::string out = typed_edge_header() + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.year) + ',' + std::string(to_string(r.variant));
    for (auto c : r.counts) out += ',' + std::to_string(c);
    out += '\n';
  }
  return out;
}

/// Edge-class percentages for one year (long format: variant,edge_class,percent).
inline std::string edge_share_csv(const std::vector<TypedEdgeRow>& rows, int year) {
  std::string out = "variant,edge_class,percent\n";
  for (const auto& r : rows) {
    if (r.year != year) continue;
    auto p = r.percentages();
    for (std::size_t i = 0; i < p.size(); ++i)
      out += std::string(to_string(r.variant)) + ',' + edge_class_name(i) + ',' + io::fmt_real(p[i]) + '\n';
  }
  return out;
}

inline constexpr std::string_view kCommunityHeader = "year,variant,keyword,label,score";

inline std::string community_csv(const std::vector<CommunityAssignment>& assignments, const Interner& keywords) {
  std::string out(kCommunityHeader);
  out += '\n';
  for (const auto& a : assignments)
    for (std::size_t i = 0; i < a.keywords.size(); ++i)
      out += std::to_string(a.year) + ',' + std::string(to_string(a.variant)) + ',' + keywords.name(a.keywords[i]) +
             ',' + std::string(to_string(a.labels[i])) + ',' + io::fmt_real(a.scores[i]) + '\n';
  return out;
}

/// Inverse of community_csv (grandparent sets are not persisted).
inline std::vector<CommunityAssignment> communities_from_csv(const std::filesystem::path& p, const Interner& keywords) {
  std::map<std::pair<int, int>, CommunityAssignment> by_key;
  for (const auto& r : io::read_csv(p, kCommunityHeader)) {
    int year = static_cast<int>(io::parse_int(r[0], p.string()));
    auto v = parse_variant(r[1]);
    auto id = keywords.find(r[2]);
    if (!id) throw DataError(p.string() + ": unknown keyword '" + r[2] + "'");
    auto& a = by_key[{static_cast<int>(v), year}];
    a.year = year;
    a.variant = v;
    a.keywords.push_back(*id);
    a.labels.push_back(parse_community(r[3]));
    a.scores.push_back(io::parse_real(r[4], p.string()));
  }
  std::vector<CommunityAssignment> out;
  for (auto& [k, a] : by_key) {
    std::vector<std::size_t> order(a.keywords.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a.keywords[x] < a.keywords[y]; });
    CommunityAssignment s;
    s.year = a.year;
    s.variant = a.variant;
    for (auto i : order) {
      s.keywords.push_back(a.keywords[i]);
      s.labels.push_back(a.labels[i]);
      s.scores.push_back(a.scores[i]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace kcnlp
