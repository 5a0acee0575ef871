#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "helpers.hpp"
#include "kcnlp/centrality.hpp"

using namespace kcnlp;

namespace {

// Eq. 1 with plain dense loops over the 0/1 matrix (rows = authors/articles).
RecursiveScores dense_oracle(const std::vector<std::vector<int>>& m, int n_iters) {
  const std::size_t R = m.size(), C = m[0].size();
  std::vector<double> k0(C, 0), a0(R, 0);
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      k0[j] += m[i][j];
      a0[i] += m[i][j];
    }
  std::vector<double> k = k0, a = a0;
  for (int n = 1; n <= n_iters; ++n) {
    std::vector<double> nk(C, 0), na(R, 0);
    for (std::size_t j = 0; j < C; ++j) {
      for (std::size_t i = 0; i < R; ++i) nk[j] += m[i][j] * a[i];
      nk[j] /= k0[j];
    }
    for (std::size_t i = 0; i < R; ++i) {
      for (std::size_t j = 0; j < C; ++j) na[i] += m[i][j] * k[j];
      na[i] /= a0[i];
    }
    k = nk;
    a = na;
  }
  return {k, a};
}

}  // namespace

TEST(Centrality, SparseEqualsDenseOracle) {
  std::mt19937_64 rng(11);
  double worst = 0;
  double elapsed = 0;
  for (int trial = 0; trial < 50; ++trial) {
    auto m = testing_support::random_incidence(rng);
    auto inc = BipartiteIncidence::from_dense(m);
    auto t0 = std::chrono::steady_clock::now();
    auto got = recursive_centrality(inc, 20);
    elapsed += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto want = dense_oracle(m, 20);
    for (std::size_t j = 0; j < want.keyword.size(); ++j) worst = std::max(worst, std::abs(got.keyword[j] - want.keyword[j]));
    for (std::size_t i = 0; i < want.row.size(); ++i) worst = std::max(worst, std::abs(got.row[i] - want.row[i]));
  }
  EXPECT_LT(worst, 1e-9);
  EXPECT_LT(elapsed, 1.0);
}

TEST(Centrality, BaseCaseIsRowAndColumnSums) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = testing_support::random_incidence(rng);
    auto s = recursive_centrality(BipartiteIncidence::from_dense(m), 0);
    for (std::size_t i = 0; i < m.size(); ++i) {
      double rs = 0;
      for (int x : m[i]) rs += x;
      EXPECT_EQ(s.row[i], rs);
    }
    for (std::size_t j = 0; j < m[0].size(); ++j) {
      double cs = 0;
      for (const auto& r : m) cs += r[j];
      EXPECT_EQ(s.keyword[j], cs);
    }
  }
}

TEST(Centrality, SmallHandExample) {
  // rows: a1 = {k0, k1}, a2 = {k1}
  auto inc = BipartiteIncidence::from_dense({{1, 1}, {0, 1}});
  auto s1 = recursive_centrality(inc, 1);
  // psi_k(1) = M^T psi_a(0) / psi_k(0): k0 = 2/1, k1 = (2+1)/2
  EXPECT_DOUBLE_EQ(s1.keyword[0], 2.0);
  EXPECT_DOUBLE_EQ(s1.keyword[1], 1.5);
  // psi_a(1) = M psi_k(0) / psi_a(0): a1 = (1+2)/2, a2 = 2/1
  EXPECT_DOUBLE_EQ(s1.row[0], 1.5);
  EXPECT_DOUBLE_EQ(s1.row[1], 2.0);
}

TEST(Centrality, RejectsBadInput) {
  EXPECT_THROW(BipartiteIncidence::from_dense({{1, 0}, {1, 0}}), DataError);
  EXPECT_THROW(BipartiteIncidence::from_dense({{1, 1}, {1}}), DataError);
  EXPECT_THROW(recursive_centrality(BipartiteIncidence{}, 20), DataError);
  EXPECT_THROW(recursive_centrality(BipartiteIncidence::from_dense({{1}}), -1), UsageError);
}

TEST(Centrality, ConvergenceReportMatchesRecomputation) {
  std::mt19937_64 rng(11);
  auto m = testing_support::random_incidence(rng, 8);
  auto inc = BipartiteIncidence::from_dense(m);
  auto rows = convergence_report(inc, 20);
  ASSERT_EQ(rows.size(), 20u);
  for (const auto& r : rows) {
    auto prev = dense_oracle(m, r.n - 1).keyword, cur = dense_oracle(m, r.n).keyword;
    std::int64_t swaps = 0;
    double change = 0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      change = std::max(change, std::abs(cur[i] - prev[i]));
      for (std::size_t j = i + 1; j < cur.size(); ++j)
        swaps += (prev[i] - prev[j]) * (cur[i] - cur[j]) < 0;
    }
    EXPECT_EQ(r.rank_swaps, swaps) << "n=" << r.n;
    EXPECT_NEAR(r.max_abs_change, change, 1e-9);
  }
}

TEST(ZScore, PopulationStddevAndConstant) {
  auto z = zscore({1, 2, 3, 4});
  const double sd = std::sqrt(1.25);
  EXPECT_DOUBLE_EQ(z[0], -1.5 / sd);
  EXPECT_DOUBLE_EQ(z[3], 1.5 / sd);
  for (double v : zscore({5, 5, 5})) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(zscore({}).empty());
}

TEST(CentralityTable, VariantsOnSynthCorpus) {
  auto c = testing_support::synth_corpus(testing_support::small_synth(7));
  auto kcn = build_temporal_kcn(c);
  const int year = c.year_range.first + 1;
  auto d = centrality_table(kcn, c, year, Variant::D);
  EXPECT_EQ(d.keywords, kcn.at(year).nodes());
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d.raw[i], static_cast<double>(kcn.at(year).degree(d.keywords[i])));
  for (auto v : {Variant::Au, Variant::At}) {
    auto t = centrality_table(kcn, c, year, v);
    EXPECT_EQ(t.keywords, kcn.at(year).nodes());
    auto inc = build_bipartite(c, year, incidence_mode(v));
    EXPECT_EQ(t.raw, recursive_centrality(inc, 20).keyword);
    double mean = 0;
    for (double x : t.zscored) mean += x;
    EXPECT_NEAR(mean / static_cast<double>(t.size()), 0.0, 1e-9);
  }
}

// Author-variant scores of a real snapshot against the dense oracle.
TEST(CentralityTable, AuthorScoresMatchDenseOracle) {
  auto c = testing_support::synth_corpus(testing_support::small_synth(7));
  auto kcn = build_temporal_kcn(c);
  const int year = c.year_range.first + 1;
  auto inc = build_bipartite(c, year, IncidenceMode::KeywordAuthor);
  std::vector<std::vector<int>> m(inc.rows(), std::vector<int>(inc.cols(), 0));
  for (std::size_t i = 0; i < inc.rows(); ++i)
    for (auto j : inc.by_row[i]) m[i][static_cast<std::size_t>(j)] = 1;
  auto want = dense_oracle(m, 20).keyword;
  auto t = centrality_table(kcn, c, year, Variant::Au);
  for (std::size_t j = 0; j < want.size(); ++j) EXPECT_NEAR(t.raw[j], want[j], 1e-9);
}

TEST(CentralityTable, CsvRoundTrip) {
  auto c = testing_support::synth_corpus(testing_support::small_synth(7));
  auto kcn = build_temporal_kcn(c);
  std::vector<CentralityTable> tabs;
  for (auto v : kAllVariants)
    for (auto& s : kcn.snapshots()) tabs.push_back(centrality_table(kcn, c, s.year(), v));
  auto dir = testing_support::scratch_dir("centrality_csv");
  io::write_file(dir / "c.csv", centrality_csv(tabs, c.keyword_index));
  auto back = centrality_from_csv(dir / "c.csv", c.keyword_index, 20);
  EXPECT_EQ(centrality_csv(back, c.keyword_index), centrality_csv(tabs, c.keyword_index));
}

TEST(Variant, Parse) {
  EXPECT_EQ(parse_variant("au"), Variant::Au);
  EXPECT_EQ(parse_variant("d"), Variant::D);
  EXPECT_THROW(parse_variant("x"), UsageError);
}
