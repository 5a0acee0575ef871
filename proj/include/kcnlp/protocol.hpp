#pragma once

// In-memory link prediction protocol on a sampled instance set: stratified
// holdout split, joint feature forecasters for the test year, and one binary
// classifier per feature set over the forecast-extended series.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "kcnlp/error.hpp"
#include "kcnlp/features.hpp"
#include "kcnlp/neural.hpp"

namespace kcnlp {

/// Per-instance flag: true = held out for evaluation. Each class contributes
/// round(fraction * class size) instances, chosen by a seeded shuffle.
inline std::vector<bool> stratified_holdout(const InstanceSet& set, double fraction, std::uint64_t seed) {
  if (!(fraction > 0 && fraction <= 0.5)) throw UsageError("holdout fraction must lie in (0, 0.5]");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < set.instances.size(); ++i) (set.instances[i].positive ? pos : neg).push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<bool> held(set.instances.size(), false);
  for (auto* cls : {&pos, &neg}) {
    std::shuffle(cls->begin(), cls->end(), rng);
    const auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(cls->size())));
    for (std::size_t i = 0; i < n; ++i) held[(*cls)[i]] = true;
  }
  return held;
}

/// Which pair-vector dimensions each forecaster predicts.
struct ForecastLayout {
  std::vector<std::size_t> numeric;
  std::vector<std::size_t> categorical;  // consecutive 4-wide community blocks
  std::vector<int> blocks;
};

inline ForecastLayout forecast_layout() {
  ForecastLayout l;
  std::vector<bool> is_cat(kPairFeatureDims, false);
  for (int e = 0; e < 2; ++e)
    for (auto v : kAllVariants) {
      const auto off = community_block_offset(e, v);
      for (std::size_t j = 0; j < kCommunities.size(); ++j) {
        is_cat[off + j] = true;
        l.categorical.push_back(off + j);
      }
      l.blocks.push_back(static_cast<int>(kCommunities.size()));
    }
  for (std::size_t d = 0; d < kPairFeatureDims; ++d)
    if (!is_cat[d]) l.numeric.push_back(d);
  return l;
}

namespace detail {

// Steps [first, first + len) of the selected instances, all dimensions.
inline SeqBatch instance_steps(const InstanceSet& set, const std::vector<std::size_t>& rows, std::size_t first,
                               std::size_t len) {
  const auto D = static_cast<Eigen::Index>(set.dims());
  SeqBatch out(len, Eigen::MatrixXd(D, static_cast<Eigen::Index>(rows.size())));
  for (std::size_t n = 0; n < rows.size(); ++n)
    for (std::size_t t = 0; t < len; ++t) {
      const auto& v = set.instances[rows[n]].series[first + t];
      for (Eigen::Index d = 0; d < D; ++d) out[t](d, static_cast<Eigen::Index>(n)) = v[static_cast<std::size_t>(d)];
    }
  return out;
}

inline Eigen::MatrixXd instance_targets(const InstanceSet& set, const std::vector<std::size_t>& rows, std::size_t step,
                                        const std::vector<std::size_t>& dims) {
  Eigen::MatrixXd y(static_cast<Eigen::Index>(dims.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t n = 0; n < rows.size(); ++n)
    for (std::size_t j = 0; j < dims.size(); ++j)
      y(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(n)) = set.instances[rows[n]].series[step][dims[j]];
  return y;
}

inline std::vector<std::size_t> rows_where(const std::vector<bool>& held, bool want) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < held.size(); ++i)
    if (held[i] == want) rows.push_back(i);
  return rows;
}

}  // namespace detail

struct Forecasters {
  LstmParams numeric, categorical;
  std::vector<double> numeric_loss, categorical_loss;  // per epoch
};

/// Trains both forecasters on the training split: inputs are all training
/// years but the last, targets the last training year.
inline Forecasters train_forecasters(const InstanceSet& set, const std::vector<bool>& holdout, const TrainConfig& cfg) {
  const auto T = set.train_steps();
  if (T < 2) throw DataError("forecasting needs at least two training years");
  const auto rows = detail::rows_where(holdout, false);
  if (rows.empty()) throw DataError("no training instances for the forecasters");
  const auto layout = forecast_layout();
  const SeqBatch in = detail::instance_steps(set, rows, 0, T - 1);
  Forecasters f;
  auto num = train_forecaster(in, detail::instance_targets(set, rows, T - 1, layout.numeric), HeadKind::Numeric, cfg);
  f.numeric = std::move(num.params);
  f.numeric_loss = std::move(num.epoch_loss);
  auto cat = train_forecaster(in, detail::instance_targets(set, rows, T - 1, layout.categorical),
                              HeadKind::Categorical, cfg, layout.blocks);
  f.categorical = std::move(cat.params);
  f.categorical_loss = std::move(cat.epoch_loss);
  return f;
}

/// Test-year feature vector forecast for every instance from all training
/// years; community blocks are one-hot by argmax.
inline std::vector<std::vector<double>> forecast_test_year(const InstanceSet& set, const Forecasters& f) {
  std::vector<std::size_t> rows(set.instances.size());
  std::iota(rows.begin(), rows.end(), 0);
  const auto layout = forecast_layout();
  const SeqBatch in = detail::instance_steps(set, rows, 0, set.train_steps());
  const Eigen::MatrixXd num = predict(f.numeric, in);
  const Eigen::MatrixXd cat = predict(f.categorical, in);
  std::vector<std::vector<double>> out(rows.size(), std::vector<double>(set.dims(), 0.0));
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const auto col = static_cast<Eigen::Index>(n);
    for (std::size_t j = 0; j < layout.numeric.size(); ++j)
      out[n][layout.numeric[j]] = num(static_cast<Eigen::Index>(j), col);
    const Eigen::VectorXd hot = one_hot_argmax(cat.col(col), layout.blocks);
    for (std::size_t j = 0; j < layout.categorical.size(); ++j)
      out[n][layout.categorical[j]] = hot(static_cast<Eigen::Index>(j));
  }
  return out;
}

/// The classifier feature sets in report order, plus "joint" (all five).
inline std::vector<std::string> feature_set_names(bool with_joint) {
  std::vector<std::string> names(kPairFeatureNames.begin(), kPairFeatureNames.end());
  if (with_joint) names.emplace_back("joint");
  return names;
}

inline std::vector<std::size_t> feature_set_dims(const std::string& name) {
  if (name == "joint") {
    std::vector<std::size_t> dims;
    for (auto n : kPairFeatureNames) dims.push_back(pair_feature_index(n));
    return dims;
  }
  return {pair_feature_index(name)};
}

/// Training-year values of `dims` followed by the forecast test-year values.
inline SeqBatch extended_series(const InstanceSet& set, const std::vector<std::vector<double>>& forecast,
                                const std::vector<std::size_t>& rows, const std::vector<std::size_t>& dims) {
  const auto T = set.train_steps();
  const auto D = static_cast<Eigen::Index>(dims.size());
  SeqBatch out(T + 1, Eigen::MatrixXd(D, static_cast<Eigen::Index>(rows.size())));
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const auto& inst = set.instances[rows[n]];
    for (std::size_t t = 0; t <= T; ++t) {
      const auto& v = t < T ? inst.series[t] : forecast[rows[n]];
      for (Eigen::Index d = 0; d < D; ++d) out[t](d, static_cast<Eigen::Index>(n)) = v[dims[static_cast<std::size_t>(d)]];
    }
  }
  return out;
}

struct ClassifierRun {
  std::string feature_set;
  LstmParams params;
  std::vector<double> epoch_loss;
  std::vector<double> scores;  // every instance, in set order
};

/// Trains on the training split and scores all instances.
inline ClassifierRun run_classifier(const InstanceSet& set, const std::vector<std::vector<double>>& forecast,
                                    const std::vector<bool>& holdout, const std::string& feature_set,
                                    const TrainConfig& cfg) {
  const auto dims = feature_set_dims(feature_set);
  const auto train_rows = detail::rows_where(holdout, false);
  std::vector<int> labels;
  for (auto r : train_rows) labels.push_back(set.instances[r].positive ? 1 : 0);
  auto res = train_classifier(extended_series(set, forecast, train_rows, dims), labels, cfg);
  std::vector<std::size_t> all(set.instances.size());
  std::iota(all.begin(), all.end(), 0);
  const Eigen::MatrixXd p = predict(res.params, extended_series(set, forecast, all, dims));
  ClassifierRun run;
  run.feature_set = feature_set;
  run.params = std::move(res.params);
  run.epoch_loss = std::move(res.epoch_loss);
  run.scores.assign(p.data(), p.data() + p.size());
  return run;
}

}  // namespace kcnlp
