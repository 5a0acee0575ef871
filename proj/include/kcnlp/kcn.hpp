#pragma once

// Temporal keyword co-occurrence network: one undirected, unweighted graph
// per year plus the yearly keyword-author / keyword-article incidences.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kcnlp/corpus.hpp"
#include "kcnlp/error.hpp"
#include "kcnlp/io.hpp"

namespace kcnlp {

using Edge = std::pair<KeywordId, KeywordId>;  // first < second

inline Edge make_edge(KeywordId a, KeywordId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

inline std::uint64_t edge_key(KeywordId a, KeywordId b) {
  auto e = make_edge(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(e.first)) << 32) |
         static_cast<std::uint32_t>(e.second);
}

class YearlySnapshot {
 public:
  YearlySnapshot() = default;

  /// `universe` is the size of the global keyword id space.
  YearlySnapshot(int year, std::size_t universe) : year_(year), present_(universe, false), adjacency_(universe) {}

  void add_node(KeywordId k) {
    if (!present_[idx(k)]) {
      present_[idx(k)] = true;
      nodes_.push_back(k);
    }
  }

  void add_edge(KeywordId a, KeywordId b) {
    if (a == b) return;
    add_node(a);
    add_node(b);
    edges_.push_back(make_edge(a, b));
  }

  /// Sorts and de-duplicates; must be called once after the last add_*.
  void seal() {
    std::sort(nodes_.begin(), nodes_.end());
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (auto& n : adjacency_) n.clear();
    for (auto [a, b] : edges_) {
      adjacency_[idx(a)].push_back(b);
      adjacency_[idx(b)].push_back(a);
    }
    for (auto& n : adjacency_) std::sort(n.begin(), n.end());
  }

  int year() const { return year_; }
  std::size_t universe() const { return present_.size(); }
  const std::vector<KeywordId>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_node(KeywordId k) const { return k >= 0 && idx(k) < present_.size() && present_[idx(k)]; }

  const std::vector<KeywordId>& neighbors(KeywordId k) const { return adjacency_.at(idx(k)); }

  std::int64_t degree(KeywordId k) const {
    return has_node(k) ? static_cast<std::int64_t>(adjacency_[idx(k)].size()) : 0;
  }

  bool has_edge(KeywordId a, KeywordId b) const {
    if (!has_node(a) || !has_node(b)) return false;
    const auto& n = adjacency_[idx(a)];
    return std::binary_search(n.begin(), n.end(), b);
  }

 private:
  static std::size_t idx(KeywordId k) { return static_cast<std::size_t>(k); }

  int year_ = 0;
  std::vector<bool> present_;
  std::vector<KeywordId> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<KeywordId>> adjacency_;
};

class TemporalKcn {
 public:
  TemporalKcn() = default;
  TemporalKcn(std::vector<YearlySnapshot> snapshots, std::string corpus_ref)
      : snapshots_(std::move(snapshots)), corpus_ref_(std::move(corpus_ref)) {
    for (std::size_t i = 1; i < snapshots_.size(); ++i)
      if (snapshots_[i].year() != snapshots_[i - 1].year() + 1)
        throw DataError("snapshot years must be consecutive");
  }

  const std::vector<YearlySnapshot>& snapshots() const { return snapshots_; }
  const std::string& corpus_ref() const { return corpus_ref_; }
  bool empty() const { return snapshots_.empty(); }
  int first_year() const { return snapshots_.front().year(); }
  int last_year() const { return snapshots_.back().year(); }
  bool has_year(int y) const { return !empty() && y >= first_year() && y <= last_year(); }

  const YearlySnapshot& at(int year) const {
    if (!has_year(year)) throw DataError("year " + std::to_string(year) + " not in the network");
    return snapshots_[static_cast<std::size_t>(year - first_year())];
  }

 private:
  std::vector<YearlySnapshot> snapshots_;
  std::string corpus_ref_;
};

/// One snapshot per year of the corpus range; nodes are the keywords used that
/// year (including ones from single-keyword articles), edges join keywords that
/// co-appear in at least one article.
inline TemporalKcn build_temporal_kcn(const Corpus& corpus, std::string corpus_ref = {}) {
  if (corpus.records.empty()) throw DataError("cannot build a network from an empty corpus");
  const auto universe = corpus.keyword_count();
  std::vector<YearlySnapshot> snaps;
  for (int y = corpus.year_range.first; y <= corpus.year_range.last; ++y) snaps.emplace_back(y, universe);
  for (const auto& a : corpus.records) {
    auto& s = snaps[static_cast<std::size_t>(a.year - corpus.year_range.first)];
    for (std::size_t i = 0; i < a.keywords.size(); ++i) {
      s.add_node(a.keywords[i]);
      for (std::size_t j = i + 1; j < a.keywords.size(); ++j) s.add_edge(a.keywords[i], a.keywords[j]);
    }
  }
  for (auto& s : snaps) s.seal();
  return TemporalKcn(std::move(snaps), std::move(corpus_ref));
}

/// Degrees aligned with snapshot.nodes().
inline std::vector<std::int64_t> degree_vector(const YearlySnapshot& snapshot) {
  std::vector<std::int64_t> d;
  d.reserve(snapshot.nodes().size());
  for (auto k : snapshot.nodes()) d.push_back(snapshot.degree(k));
  return d;
}

enum class IncidenceMode { KeywordAuthor, KeywordArticle };

inline std::string_view to_string(IncidenceMode m) {
  return m == IncidenceMode::KeywordAuthor ? "keyword-author" : "keyword-article";
}

/// Binary incidence (rows = authors or articles, columns = keywords) stored
/// sparsely twice: by row and by column. Indices inside `by_row`/`by_col` are
/// local positions; `row_ids`/`col_ids` map them back to corpus ids.
struct BipartiteIncidence {
  int year = 0;
  IncidenceMode mode = IncidenceMode::KeywordAuthor;
  std::vector<std::int32_t> row_ids;
  std::vector<KeywordId> col_ids;
  std::vector<std::vector<std::int32_t>> by_row;
  std::vector<std::vector<std::int32_t>> by_col;

  std::size_t rows() const { return row_ids.size(); }
  std::size_t cols() const { return col_ids.size(); }
  std::size_t nonzeros() const {
    std::size_t n = 0;
    for (const auto& r : by_row) n += r.size();
    return n;
  }

  /// Builds from a dense 0/1 matrix (rows x cols); ids are 0..n-1. Rejects
  /// empty rows or columns.
  static BipartiteIncidence from_dense(const std::vector<std::vector<int>>& m) {
    BipartiteIncidence inc;
    inc.mode = IncidenceMode::KeywordArticle;
    const std::size_t ncols = m.empty() ? 0 : m.front().size();
    inc.by_col.resize(ncols);
    for (std::size_t j = 0; j < ncols; ++j) inc.col_ids.push_back(static_cast<KeywordId>(j));
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i].size() != ncols) throw DataError("ragged incidence matrix");
      inc.row_ids.push_back(static_cast<std::int32_t>(i));
      inc.by_row.emplace_back();
      for (std::size_t j = 0; j < ncols; ++j) {
        if (m[i][j] == 0) continue;
        inc.by_row.back().push_back(static_cast<std::int32_t>(j));
        inc.by_col[j].push_back(static_cast<std::int32_t>(i));
      }
    }
    inc.validate();
    return inc;
  }

  void validate() const {
    for (const auto& r : by_row)
      if (r.empty()) throw DataError("incidence has an empty row");
    for (const auto& c : by_col)
      if (c.empty()) throw DataError("incidence has an empty column");
  }
};

inline BipartiteIncidence build_bipartite(const Corpus& corpus, int year, IncidenceMode mode) {
  if (!corpus.year_range.contains(year))
    throw DataError("year " + std::to_string(year) + " outside corpus range");
  BipartiteIncidence inc;
  inc.year = year;
  inc.mode = mode;

  // Row contents as sorted keyword sets, rows in first-appearance order.
  std::vector<std::vector<KeywordId>> row_keywords;
  std::unordered_map<std::int32_t, std::size_t> row_pos;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const auto& a = corpus.records[i];
    if (a.year != year) continue;
    if (mode == IncidenceMode::KeywordArticle) {
      inc.row_ids.push_back(static_cast<std::int32_t>(i));
      row_keywords.push_back(a.keywords);
      continue;
    }
    for (auto au : a.authors) {
      auto [it, fresh] = row_pos.try_emplace(au, row_keywords.size());
      if (fresh) {
        inc.row_ids.push_back(au);
        row_keywords.emplace_back();
      }
      auto& ks = row_keywords[it->second];
      ks.insert(ks.end(), a.keywords.begin(), a.keywords.end());
    }
  }
  std::vector<KeywordId> cols;
  for (auto& ks : row_keywords) {
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    cols.insert(cols.end(), ks.begin(), ks.end());
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  inc.col_ids = cols;
  std::unordered_map<KeywordId, std::int32_t> col_pos;
  for (std::size_t j = 0; j < cols.size(); ++j) col_pos[cols[j]] = static_cast<std::int32_t>(j);
  inc.by_col.resize(cols.size());
  inc.by_row.resize(row_keywords.size());
  for (std::size_t i = 0; i < row_keywords.size(); ++i) {
    for (auto k : row_keywords[i]) {
      auto j = col_pos[k];
      inc.by_row[i].push_back(j);
      inc.by_col[static_cast<std::size_t>(j)].push_back(static_cast<std::int32_t>(i));
    }
  }
  return inc;
}

/// Per-year keyword/edge turnover counts.
struct EvolutionRow {
  int year = 0;
  std::int64_t v_t = 0, v_n = 0, v_o = 0;
  std::int64_t e = 0, e_oo_recurring = 0, e_oo_new = 0, e_no = 0, e_nn = 0;
  bool operator==(const EvolutionRow&) const = default;
};

inline std::vector<EvolutionRow> yearly_evolution_stats(const TemporalKcn& kcn) {
  std::vector<EvolutionRow> rows;
  if (kcn.empty()) return rows;
  std::vector<bool> seen_node(kcn.snapshots().front().universe(), false);
  std::unordered_set<std::uint64_t> seen_edge;
  for (const auto& s : kcn.snapshots()) {
    EvolutionRow r;
    r.year = s.year();
    r.v_t = static_cast<std::int64_t>(s.nodes().size());
    for (auto k : s.nodes()) (seen_node[static_cast<std::size_t>(k)] ? r.v_o : r.v_n)++;
    r.e = static_cast<std::int64_t>(s.edges().size());
    for (auto [a, b] : s.edges()) {
      bool oa = seen_node[static_cast<std::size_t>(a)], ob = seen_node[static_cast<std::size_t>(b)];
      if (oa && ob)
        (seen_edge.count(edge_key(a, b)) ? r.e_oo_recurring : r.e_oo_new)++;
      else if (oa || ob)
        ++r.e_no;
      else
        ++r.e_nn;
    }
    for (auto k : s.nodes()) seen_node[static_cast<std::size_t>(k)] = true;
    for (auto [a, b] : s.edges()) seen_edge.insert(edge_key(a, b));
    rows.push_back(r);
  }
  return rows;
}

/// The corpus overload only checks that the network was built from it.
inline std::vector<EvolutionRow> yearly_evolution_stats(const Corpus& corpus, const TemporalKcn& kcn) {
  if (!kcn.empty() && (kcn.first_year() != corpus.year_range.first || kcn.last_year() != corpus.year_range.last))
    throw DataError("network year range does not match corpus");
  return yearly_evolution_stats(kcn);
}

inline constexpr std::string_view kEvolutionHeader = "year,v_t,v_n,v_o,e,e_oo_rec,e_oo_new,e_no,e_nn";

inline std::string evolution_csv(const std::vector<EvolutionRow>& rows) {
  std::string out(kEvolutionHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.year) + ',' + std::to_string(r.v_t) + ',' + std::to_string(r.v_n) + ',' +
           std::to_string(r.v_o) + ',' + std::to_string(r.e) + ',' + std::to_string(r.e_oo_recurring) + ',' +
           std::to_string(r.e_oo_new) + ',' + std::to_string(r.e_no) + ',' + std::to_string(r.e_nn) + '\n';
  }
  return out;
}

inline constexpr std::string_view kEdgeListHeader = "year,keyword_a,keyword_b";
inline constexpr std::string_view kNodeListHeader = "year,keyword";

/// Edge list with keyword strings; each pair sorted lexicographically and rows
/// sorted within a year.
inline std::string edge_list_csv(const TemporalKcn& kcn, const Interner& keywords) {
  std::string out(kEdgeListHeader);
  out += '\n';
  for (const auto& s : kcn.snapshots()) {
    std::vector<std::pair<std::string, std::string>> rows;
    for (auto [a, b] : s.edges()) {
      auto na = keywords.name(a), nb = keywords.name(b);
      if (nb < na) std::swap(na, nb);
      rows.emplace_back(std::move(na), std::move(nb));
    }
    std::sort(rows.begin(), rows.end());
    for (const auto& [a, b] : rows) out += std::to_string(s.year()) + ',' + a + ',' + b + '\n';
  }
  return out;
}

inline std::string node_list_csv(const TemporalKcn& kcn, const Interner& keywords) {
  std::string out(kNodeListHeader);
  out += '\n';
  for (const auto& s : kcn.snapshots()) {
    std::vector<std::string> names;
    for (auto k : s.nodes()) names.push_back(keywords.name(k));
    std::sort(names.begin(), names.end());
    for (const auto& n : names) out += std::to_string(s.year()) + ',' + n + '\n';
  }
  return out;
}

/// Rebuilds a network from node and edge lists written by the functions above.
inline TemporalKcn kcn_from_csv(const std::filesystem::path& nodes_csv, const std::filesystem::path& edges_csv,
                                const Interner& keywords, YearRange years, std::string corpus_ref = {}) {
  std::vector<YearlySnapshot> snaps;
  for (int y = years.first; y <= years.last; ++y) snaps.emplace_back(y, keywords.size());
  auto lookup = [&](const std::string& name) {
    auto id = keywords.find(name);
    if (!id) throw DataError("unknown keyword '" + name + "' in network file");
    return *id;
  };
  auto year_of = [&](const std::string& s, const std::string& where) -> YearlySnapshot& {
    auto y = static_cast<int>(io::parse_int(s, where));
    if (!years.contains(y)) throw DataError(where + ": year outside corpus range");
    return snaps[static_cast<std::size_t>(y - years.first)];
  };
  for (const auto& r : io::read_csv(nodes_csv, kNodeListHeader)) year_of(r[0], nodes_csv.string()).add_node(lookup(r[1]));
  for (const auto& r : io::read_csv(edges_csv, kEdgeListHeader))
    year_of(r[0], edges_csv.string()).add_edge(lookup(r[1]), lookup(r[2]));
  for (auto& s : snaps) s.seal();
  return TemporalKcn(std::move(snaps), std::move(corpus_ref));
}

}  // namespace kcnlp
