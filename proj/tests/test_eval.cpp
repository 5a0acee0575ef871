#include <gtest/gtest.h>

#include <random>

#include "kcnlp/eval.hpp"

using namespace kcnlp;

namespace {

// Mann-Whitney by brute force: every (positive, negative) pair, ties half.
double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] && !y[j]) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return wins / pairs;
}

void random_set(std::mt19937_64& rng, std::vector<double>& s, std::vector<int>& y) {
  const std::size_t n = 2 + rng() % 300;
  std::uniform_real_distribution<double> u(0, 1);
  const bool coarse = rng() % 2 == 0;  // many ties
  s.resize(n);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = u(rng) < 0.3;
    s[i] = coarse ? std::round(u(rng) * 10) / 10 : u(rng) + 0.3 * y[i];
  }
  y[0] = 1;
  y[1] = 0;
}

}  // namespace

TEST(Auc, MatchesPairwiseOracle) {
  std::mt19937_64 rng(5);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s;
    std::vector<int> y;
    random_set(rng, s, y);
    worst = std::max(worst, std::abs(roc_auc(s, y).auc - pairwise_auc(s, y)));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(Auc, EdgeCases) {
  EXPECT_EQ(roc_auc(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}).auc, 1.0);
  EXPECT_EQ(roc_auc(std::vector<double>{0.1, 0.9}, std::vector<int>{1, 0}).auc, 0.0);
  EXPECT_EQ(roc_auc(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}).auc, 0.5);
  EXPECT_THROW(roc_auc(std::vector<double>{0.5, 0.4}, std::vector<int>{1, 1}), DataError);
  EXPECT_THROW(roc_auc(std::vector<double>{0.5}, std::vector<int>{1, 0}), UsageError);
  auto r = roc_auc(std::vector<double>{0.9, 0.8, 0.3}, std::vector<int>{1, 0, 1});
  EXPECT_EQ(r.points.front(), std::make_pair(0.0, 0.0));
  EXPECT_EQ(r.points.back(), std::make_pair(1.0, 1.0));
}

TEST(Accuracy, MajorityClassOnOneToTen) {
  for (std::size_t pos : {1u, 7u, 100u}) {
    std::vector<int> y(pos, 1);
    y.resize(11 * pos, 0);
    std::vector<double> s(y.size(), 0.0);
    EXPECT_EQ(accuracy_at(s, y, 0.5), 10.0 / 11.0);
  }
  EXPECT_EQ(accuracy_at(std::vector<double>{0.5, 0.49}, std::vector<int>{1, 0}, 0.5), 1.0);
}

// Precision/recall at each distinct threshold from a recomputed confusion
// matrix.
TEST(PrCurve, MatchesConfusionOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s;
    std::vector<int> y;
    random_set(rng, s, y);
    auto pts = pr_curve(s, y);
    std::vector<double> thr(s);
    std::sort(thr.begin(), thr.end(), std::greater<>());
    thr.erase(std::unique(thr.begin(), thr.end()), thr.end());
    ASSERT_EQ(pts.size(), thr.size());
    for (std::size_t k = 0; k < thr.size(); ++k) {
      double tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        const bool pred = s[i] >= thr[k];
        tp += pred && y[i];
        fp += pred && !y[i];
        fn += !pred && y[i];
      }
      EXPECT_DOUBLE_EQ(pts[k].first, tp / (tp + fn));
      EXPECT_DOUBLE_EQ(pts[k].second, tp / (tp + fp));
    }
  }
}

TEST(Nrmse, TwoPassOracle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> p(50), a(50);
  for (std::size_t i = 0; i < 50; ++i) {
    a[i] = n(rng);
    p[i] = a[i] + 0.1 * n(rng);
  }
  double ss = 0;
  for (std::size_t i = 0; i < 50; ++i) ss += (p[i] - a[i]) * (p[i] - a[i]);
  const double range = *std::max_element(a.begin(), a.end()) - *std::min_element(a.begin(), a.end());
  EXPECT_NEAR(normalized_rmse(p, a), std::sqrt(ss / 50) / range, 1e-15);
  EXPECT_EQ(normalized_rmse(a, a), 0.0);
  std::vector<double> flat(5, 2.0), off(5, 2.5);
  EXPECT_EQ(normalized_rmse(flat, flat), 0.0);
  EXPECT_THROW(normalized_rmse(off, flat), NumericError);
  EXPECT_THROW(normalized_rmse(std::vector<double>{1}, std::vector<double>{}), UsageError);
}

TEST(Report, TextAndCurves) {
  std::vector<double> s = {0.9, 0.8, 0.2, 0.1};
  std::vector<int> y = {1, 0, 1, 0};
  auto r = evaluate_scores("score_pa", s, y, 0.5);
  EXPECT_EQ(r.auc, 0.75);
  EXPECT_EQ(r.accuracy, 0.5);
  EXPECT_EQ(r.positives, 2u);
  auto text = r.to_text();
  EXPECT_NE(text.find("auc=0.75\n"), std::string::npos);
  EXPECT_EQ(r.roc_csv().substr(0, 8), "fpr,tpr\n");
  EXPECT_EQ(r.pr_csv().substr(0, 17), "recall,precision\n");
}
