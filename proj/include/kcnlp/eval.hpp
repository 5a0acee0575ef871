#pragma once

// Forecast and classification metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kcnlp/error.hpp"
#include "kcnlp/io.hpp"

namespace kcnlp {

/// RMSE divided by the range of `actual`.
inline double normalized_rmse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size() || actual.empty())
    throw UsageError("normalized_rmse needs equal, non-zero lengths");
  double ss = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) ss += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
  const double rmse = std::sqrt(ss / static_cast<double>(actual.size()));
  if (rmse == 0) return 0;
  auto [lo, hi] = std::minmax_element(actual.begin(), actual.end());
  if (*hi == *lo) throw NumericError("normalized RMSE undefined: actual values are constant");
  return rmse / (*hi - *lo);
}

namespace detail {

struct ThresholdGroup {
  double score;
  std::int64_t pos = 0, neg = 0;
};

// Distinct scores in descending order with the class counts at each.
inline std::vector<ThresholdGroup> threshold_groups(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw UsageError("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  std::vector<ThresholdGroup> groups;
  for (auto i : order) {
    if (groups.empty() || groups.back().score != scores[i]) groups.push_back({scores[i]});
    (labels[i] != 0 ? groups.back().pos : groups.back().neg)++;
  }
  return groups;
}

}  // namespace detail

struct RocResult {
  double auc = 0;
  std::vector<std::pair<double, double>> points;  // (fpr, tpr)
};

/// ROC curve from a sweep over distinct score thresholds; the AUC is the
/// trapezoidal area, which equals the Mann-Whitney statistic with half credit
/// for ties. The area is accumulated in integer counts.
inline RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
  auto groups = detail::threshold_groups(scores, labels);
  std::int64_t P = 0, N = 0;
  for (const auto& g : groups) {
    P += g.pos;
    N += g.neg;
  }
  if (P == 0 || N == 0) throw DataError("ROC AUC needs both classes");
  RocResult r;
  r.points.emplace_back(0.0, 0.0);
  std::int64_t tp = 0, fp = 0;
  long double area2 = 0;  // sum of dFP * (tp_prev + tp_cur)
  for (const auto& g : groups) {
    const auto tp_prev = tp;
    tp += g.pos;
    fp += g.neg;
    area2 += static_cast<long double>(g.neg) * static_cast<long double>(tp_prev + tp);
    r.points.emplace_back(static_cast<double>(fp) / static_cast<double>(N), static_cast<double>(tp) / static_cast<double>(P));
  }
  r.auc = static_cast<double>(area2 / (2.0L * static_cast<long double>(P) * static_cast<long double>(N)));
  return r;
}

/// (recall, precision) at every distinct threshold, highest first.
inline std::vector<std::pair<double, double>> pr_curve(std::span<const double> scores, std::span<const int> labels) {
  auto groups = detail::threshold_groups(scores, labels);
  std::int64_t P = 0;
  for (const auto& g : groups) P += g.pos;
  if (P == 0) throw DataError("precision-recall curve needs at least one positive");
  std::vector<std::pair<double, double>> pts;
  std::int64_t tp = 0, fp = 0;
  for (const auto& g : groups) {
    tp += g.pos;
    fp += g.neg;
    pts.emplace_back(static_cast<double>(tp) / static_cast<double>(P), static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  return pts;
}

/// Fraction of instances where (score >= threshold) matches the label.
inline double accuracy_at(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5) {
  if (scores.empty() || scores.size() != labels.size()) throw UsageError("accuracy needs equal, non-zero lengths");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) hit += (scores[i] >= threshold) == (labels[i] != 0);
  return static_cast<double>(hit) / static_cast<double>(scores.size());
}

struct EvalReport {
  std::string feature_set;
  std::map<std::string, double> nrmse;  // per forecast feature
  double accuracy = 0;
  double auc = 0;
  double threshold = 0.5;
  std::size_t instances = 0, positives = 0;
  std::vector<std::pair<double, double>> roc_points;
  std::vector<std::pair<double, double>> pr_points;

  /// Flat `key=value` lines.
  std::string to_text() const {
    std::string out = "feature_set=" + feature_set + "\n";
    out += "instances=" + std::to_string(instances) + "\n";
    out += "positives=" + std::to_string(positives) + "\n";
    out += "threshold=" + io::fmt_real(threshold) + "\n";
    out += "accuracy=" + io::fmt_real(accuracy) + "\n";
    out += "auc=" + io::fmt_real(auc) + "\n";
    for (const auto& [k, v] : nrmse) out += "nrmse." + k + "=" + io::fmt_real(v) + "\n";
    return out;
  }

  std::string roc_csv() const {
    std::string out = "fpr,tpr\n";
    for (auto [x, y] : roc_points) out += io::fmt_real(x) + ',' + io::fmt_real(y) + '\n';
    return out;
  }

  std::string pr_csv() const {
    std::string out = "recall,precision\n";
    for (auto [x, y] : pr_points) out += io::fmt_real(x) + ',' + io::fmt_real(y) + '\n';
    return out;
  }
};

/// Classification part of a report from scores and labels.
inline EvalReport evaluate_scores(std::string feature_set, std::span<const double> scores, std::span<const int> labels,
                                  double threshold = 0.5) {
  EvalReport r;
  r.feature_set = std::move(feature_set);
  r.threshold = threshold;
  r.instances = scores.size();
  r.positives = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; }));
  auto roc = roc_auc(scores, labels);
  r.auc = roc.auc;
  r.roc_points = std::move(roc.points);
  r.pr_points = pr_curve(scores, labels);
  r.accuracy = accuracy_at(scores, labels, threshold);
  return r;
}

}  // namespace kcnlp
