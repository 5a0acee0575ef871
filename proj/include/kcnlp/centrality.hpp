#pragma once

// Yearly keyword centralities: recursive keyword-author and keyword-article
// scores over the bipartite incidence, plus plain co-occurrence degree. All
// three are z-scored per year.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kcnlp/corpus.hpp"
#include "kcnlp/error.hpp"
#include "kcnlp/io.hpp"
#include "kcnlp/kcn.hpp"

namespace kcnlp {

enum class Variant { Au, At, D };

inline constexpr Variant kAllVariants[] = {Variant::Au, Variant::At, Variant::D};

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Au: return "au";
    case Variant::At: return "at";
    case Variant::D: return "d";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "au") return Variant::Au;
  if (s == "at") return Variant::At;
  if (s == "d") return Variant::D;
  throw UsageError("unknown centrality variant '" + std::string(s) + "' (expected au, at or d)");
}

struct RecursiveScores {
  std::vector<double> keyword;  // psi_k, aligned with incidence.col_ids
  std::vector<double> row;      // psi_a, aligned with incidence.row_ids
};

/// Mutually recursive keyword/row scores.
///
/// Iteration 0 is the bipartite degree (column sums for keywords, row sums for
/// rows). Each later keyword score is the sum of the previous row scores over
/// the rows using it, divided elementwise by the keyword's degree; rows
/// symmetrically. Returns iterate `n_iters` of both vectors.
inline RecursiveScores recursive_centrality(const BipartiteIncidence& inc, int n_iters = 20) {
  if (inc.rows() == 0 || inc.cols() == 0) throw DataError("recursive centrality on an empty incidence");
  if (n_iters < 0) throw UsageError("n_iters must be >= 0");
  const auto nk = inc.cols(), na = inc.rows();
  std::vector<double> k0(nk), a0(na);
  for (std::size_t j = 0; j < nk; ++j) k0[j] = static_cast<double>(inc.by_col[j].size());
  for (std::size_t i = 0; i < na; ++i) a0[i] = static_cast<double>(inc.by_row[i].size());
  for (double d : k0)
    if (d <= 0) throw DataError("incidence has an empty column");
  for (double d : a0)
    if (d <= 0) throw DataError("incidence has an empty row");

  RecursiveScores cur{k0, a0};
  RecursiveScores next{std::vector<double>(nk), std::vector<double>(na)};
  for (int n = 1; n <= n_iters; ++n) {
    for (std::size_t j = 0; j < nk; ++j) {
      double s = 0;
      for (auto i : inc.by_col[j]) s += cur.row[static_cast<std::size_t>(i)];
      next.keyword[j] = s / k0[j];
    }
    for (std::size_t i = 0; i < na; ++i) {
      double s = 0;
      for (auto j : inc.by_row[i]) s += cur.keyword[static_cast<std::size_t>(j)];
      next.row[i] = s / a0[i];
    }
    std::swap(cur, next);
    for (double v : cur.keyword)
      if (!std::isfinite(v)) throw NumericError("non-finite keyword score at iteration " + std::to_string(n));
    for (double v : cur.row)
      if (!std::isfinite(v)) throw NumericError("non-finite row score at iteration " + std::to_string(n));
  }
  return cur;
}

/// (x - mean) / population stddev; constant input maps to all zeros.
inline std::vector<double> zscore(const std::vector<double>& x) {
  std::vector<double> z(x.size(), 0.0);
  if (x.empty()) return z;
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) return z;
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mean) / sd;
  return z;
}

struct CentralityTable {
  int year = 0;
  Variant variant = Variant::D;
  int iterations_used = 0;
  std::vector<KeywordId> keywords;  // ascending
  std::vector<double> raw;
  std::vector<double> zscored;

  std::size_t size() const { return keywords.size(); }
  bool empty() const { return keywords.empty(); }

  /// z-score of `k`, or nullopt when the keyword is absent that year.
  std::optional<double> z(KeywordId k) const {
    auto it = std::lower_bound(keywords.begin(), keywords.end(), k);
    if (it == keywords.end() || *it != k) return std::nullopt;
    return zscored[static_cast<std::size_t>(it - keywords.begin())];
  }
};

inline IncidenceMode incidence_mode(Variant v) {
  return v == Variant::Au ? IncidenceMode::KeywordAuthor : IncidenceMode::KeywordArticle;
}

inline CentralityTable centrality_table(const TemporalKcn& kcn, const Corpus& corpus, int year, Variant variant,
                                        int n_iters = 20) {
  CentralityTable t;
  t.year = year;
  t.variant = variant;
  const auto& snap = kcn.at(year);
  if (variant == Variant::D) {
    t.keywords = snap.nodes();
    for (auto d : degree_vector(snap)) t.raw.push_back(static_cast<double>(d));
  } else {
    t.iterations_used = n_iters;
    auto inc = build_bipartite(corpus, year, incidence_mode(variant));
    if (inc.cols() > 0) {
      t.keywords = inc.col_ids;
      t.raw = recursive_centrality(inc, n_iters).keyword;
    }
  }
  t.zscored = zscore(t.raw);
  return t;
}

struct ConvergenceRow {
  int n = 0;
  std::int64_t rank_swaps = 0;  // keyword pairs whose strict order flips
  double max_abs_change = 0;    // L-infinity distance between iterates
};

/// For n = 1..max_n, compares the keyword scores at n-1 and n. O(K^2) per step.
inline std::vector<ConvergenceRow> convergence_report(const BipartiteIncidence& inc, int max_n) {
  if (max_n < 2) throw UsageError("convergence_report needs max_n >= 2");
  std::vector<ConvergenceRow> out;
  auto prev = recursive_centrality(inc, 0).keyword;
  for (int n = 1; n <= max_n; ++n) {
    auto cur = recursive_centrality(inc, n).keyword;
    ConvergenceRow r{n, 0, 0.0};
    for (std::size_t i = 0; i < cur.size(); ++i) {
      r.max_abs_change = std::max(r.max_abs_change, std::abs(cur[i] - prev[i]));
      for (std::size_t j = i + 1; j < cur.size(); ++j) {
        double dp = prev[i] - prev[j], dc = cur[i] - cur[j];
        if ((dp < 0 && dc > 0) || (dp > 0 && dc < 0)) ++r.rank_swaps;
      }
    }
    out.push_back(r);
    prev = std::move(cur);
  }
  return out;
}

inline constexpr std::string_view kCentralityHeader = "year,variant,keyword,raw,zscore";

inline std::string centrality_csv(const std::vector<CentralityTable>& tables, const Interner& keywords) {
  std::vector<const CentralityTable*> sorted;
  for (const auto& t : tables) sorted.push_back(&t);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto a, auto b) {
    return std::pair(a->year, static_cast<int>(a->variant)) < std::pair(b->year, static_cast<int>(b->variant));
  });
  std::string out(kCentralityHeader);
  out += '\n';
  for (const auto* tp : sorted) {
    const auto& t = *tp;
    for (std::size_t i = 0; i < t.size(); ++i) {
      out += std::to_string(t.year) + ',' + std::string(to_string(t.variant)) + ',' + keywords.name(t.keywords[i]) +
             ',' + io::fmt_real(t.raw[i]) + ',' + io::fmt_real(t.zscored[i]) + '\n';
    }
  }
  return out;
}

/// Inverse of centrality_csv. `iterations` is recorded on au/at tables.
inline std::vector<CentralityTable> centrality_from_csv(const std::filesystem::path& p, const Interner& keywords,
                                                        int iterations) {
  std::map<std::pair<int, int>, CentralityTable> by_key;
  for (const auto& r : io::read_csv(p, kCentralityHeader)) {
    int year = static_cast<int>(io::parse_int(r[0], p.string()));
    auto v = parse_variant(r[1]);
    auto id = keywords.find(r[2]);
    if (!id) throw DataError(p.string() + ": unknown keyword '" + r[2] + "'");
    auto& t = by_key[{year, static_cast<int>(v)}];
    t.year = year;
    t.variant = v;
    t.iterations_used = v == Variant::D ? 0 : iterations;
    t.keywords.push_back(*id);
    t.raw.push_back(io::parse_real(r[3], p.string()));
    t.zscored.push_back(io::parse_real(r[4], p.string()));
  }
  std::vector<CentralityTable> out;
  for (auto& [k, t] : by_key) {
    std::vector<std::size_t> order(t.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return t.keywords[a] < t.keywords[b]; });
    CentralityTable s{t.year, t.variant, t.iterations_used, {}, {}, {}};
    for (auto i : order) {
      s.keywords.push_back(t.keywords[i]);
      s.raw.push_back(t.raw[i]);
      s.zscored.push_back(t.zscored[i]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace kcnlp
