#pragma once

// Per-keyword yearly features, aggregated pair features and the labeled
// instance set for supervised link prediction.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kcnlp/centrality.hpp"
#include "kcnlp/corpus.hpp"
#include "kcnlp/error.hpp"
#include "kcnlp/genealogy.hpp"
#include "kcnlp/io.hpp"
#include "kcnlp/kcn.hpp"

namespace kcnlp {

/// Sum of citation counts over the year's articles containing each keyword;
/// indexed by keyword id.
inline std::vector<double> citation_raw(const Corpus& corpus, int year) {
  std::vector<double> h(corpus.keyword_count(), 0.0);
  for (const auto& a : corpus.records)
    if (a.year == year)
      for (auto k : a.keywords) h[static_cast<std::size_t>(k)] += static_cast<double>(a.citations);
  return h;
}

/// citation_raw divided by the year's maximum (all zeros when the maximum is 0).
inline std::vector<double> citation_relative(const Corpus& corpus, int year) {
  auto h = citation_raw(corpus, year);
  double mx = h.empty() ? 0.0 : *std::max_element(h.begin(), h.end());
  for (auto& v : h) v = mx > 0 ? v / mx : 0.0;
  return h;
}

/// Temporal community importance of a pair: g_a * v_a + g_b * v_b.
inline double community_importance(double g_a, double v_a, double g_b, double v_b) { return g_a * v_a + g_b * v_b; }

/// Citation-weighted recency: (h_a + h_b) * gamma * t_index, where gamma counts
/// how many of the two keywords appear that year.
inline double citation_weighted_recency(double h_a, double h_b, bool appears_a, bool appears_b, int t_index) {
  const int gamma = static_cast<int>(appears_a) + static_cast<int>(appears_b);
  return (h_a + h_b) * gamma * t_index;
}

inline std::int64_t preferential_attachment(const YearlySnapshot& snapshot, KeywordId a, KeywordId b) {
  return snapshot.degree(a) * snapshot.degree(b);
}

struct KeywordYearFeatures {
  bool present = false;
  std::array<double, 3> centrality{};              // z-scores, indexed by Variant
  std::array<double, 3> community_score{};         // g, indexed by Variant; 0 when absent
  std::array<std::array<double, 4>, 3> community{};  // one-hot per variant
  double citation_rel = 0;
  double citation_raw = 0;
};

/// Names of the aggregated pair features; each one is a classification
/// feature set of its own.
inline constexpr std::array<std::string_view, 5> kPairFeatureNames = {"score_h_au", "score_h_at", "score_h_d", "score_w",
                                                                      "score_pa"};

/// Column layout of one pair/year feature vector: 16 keyword features for
/// each endpoint followed by the 5 pair features.
inline std::vector<std::string> pair_feature_names() {
  std::vector<std::string> names;
  for (std::string_view side : {"a", "b"}) {
    std::string s(side);
    for (auto v : kAllVariants) names.push_back(s + "_v_" + std::string(to_string(v)));
    names.push_back(s + "_citation");
    for (auto v : kAllVariants)
      for (auto c : kCommunities) names.push_back(s + "_comm_" + std::string(to_string(v)) + "_" + std::string(to_string(c)));
  }
  for (auto n : kPairFeatureNames) names.emplace_back(n);
  return names;
}

inline constexpr std::size_t kKeywordFeatureDims = 16;
inline constexpr std::size_t kPairFeatureDims = 2 * kKeywordFeatureDims + kPairFeatureNames.size();

/// Index of the one-hot block for (endpoint, variant) in the pair layout.
inline std::size_t community_block_offset(int endpoint, Variant v) {
  return static_cast<std::size_t>(endpoint) * kKeywordFeatureDims + 4 + 4 * static_cast<std::size_t>(v);
}

inline std::size_t pair_feature_index(std::string_view name) {
  auto names = pair_feature_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw UsageError("unknown feature '" + std::string(name) + "'");
}

/// Precomputed per-year keyword features over the whole network.
class FeatureContext {
 public:
  FeatureContext(const TemporalKcn& kcn, const Corpus& corpus, const std::vector<CentralityTable>& tables,
                 const std::vector<CommunityAssignment>& assignments)
      : kcn_(&kcn) {
    const auto universe = corpus.keyword_count();
    for (const auto& snap : kcn.snapshots()) {
      auto& year = per_year_[snap.year()];
      year.assign(universe, {});
      auto rel = citation_relative(corpus, snap.year());
      auto raw = citation_raw(corpus, snap.year());
      for (auto k : snap.nodes()) {
        auto& f = year[static_cast<std::size_t>(k)];
        f.present = true;
        f.citation_rel = rel[static_cast<std::size_t>(k)];
        f.citation_raw = raw[static_cast<std::size_t>(k)];
      }
    }
    for (const auto& t : tables) {
      auto it = per_year_.find(t.year);
      if (it == per_year_.end()) continue;
      for (std::size_t i = 0; i < t.size(); ++i)
        it->second[static_cast<std::size_t>(t.keywords[i])].centrality[static_cast<std::size_t>(t.variant)] = t.zscored[i];
    }
    for (const auto& a : assignments) {
      auto it = per_year_.find(a.year);
      if (it == per_year_.end()) continue;
      const auto v = static_cast<std::size_t>(a.variant);
      for (std::size_t i = 0; i < a.keywords.size(); ++i) {
        auto& f = it->second[static_cast<std::size_t>(a.keywords[i])];
        f.community_score[v] = a.scores[i];
        f.community[v][static_cast<std::size_t>(a.labels[i])] = 1.0;
      }
    }
  }

  const KeywordYearFeatures& keyword(int year, KeywordId k) const {
    return per_year_.at(year).at(static_cast<std::size_t>(k));
  }

  /// Feature vector of pair (a, b) in `year`; `t_index` feeds the recency term.
  std::vector<double> pair_vector(int year, int t_index, KeywordId a, KeywordId b) const {
    std::vector<double> out;
    out.reserve(kPairFeatureDims);
    const auto& fa = keyword(year, a);
    const auto& fb = keyword(year, b);
    for (const auto* f : {&fa, &fb}) {
      for (double c : f->centrality) out.push_back(c);
      out.push_back(f->citation_rel);
      for (const auto& block : f->community)
        for (double bit : block) out.push_back(bit);
    }
    for (std::size_t v = 0; v < 3; ++v)
      out.push_back(community_importance(fa.community_score[v], fa.centrality[v], fb.community_score[v], fb.centrality[v]));
    out.push_back(citation_weighted_recency(fa.citation_raw, fb.citation_raw, fa.present, fb.present, t_index));
    out.push_back(static_cast<double>(preferential_attachment(kcn_->at(year), a, b)));
    return out;
  }

 private:
  const TemporalKcn* kcn_;
  std::map<int, std::vector<KeywordYearFeatures>> per_year_;
};

struct LabeledInstance {
  KeywordId a = 0, b = 0;  // a < b
  bool positive = false;
  // One row per year: training years in order, then the test year. `raw`
  // holds the feature values, `series` the min-max normalized ones.
  std::vector<std::vector<double>> raw;
  std::vector<std::vector<double>> series;
};

struct InstanceSet {
  std::vector<std::string> feature_names;
  std::vector<int> years;  // training years then the test year
  int test_year = 0;
  std::vector<double> min, max;  // per dimension, training years only
  std::vector<LabeledInstance> instances;
  std::size_t positives = 0, negatives = 0;

  std::size_t train_steps() const { return years.size() - 1; }
  std::size_t dims() const { return feature_names.size(); }
};

struct InstanceOptions {
  int train_first = 0;  // first training year; 0 = first network year
  int ratio_neg_per_pos = 10;
  std::uint64_t rng_seed = 7;
};

/// Keywords present in at least one training year and in the test year.
inline std::vector<KeywordId> keywords_in_both_phases(const TemporalKcn& kcn, int train_first, int test_year) {
  const auto& test = kcn.at(test_year);
  std::vector<bool> seen(test.universe(), false);
  for (int y = train_first; y < test_year; ++y)
    for (auto k : kcn.at(y).nodes()) seen[static_cast<std::size_t>(k)] = true;
  std::vector<KeywordId> out;
  for (auto k : test.nodes())
    if (seen[static_cast<std::size_t>(k)]) out.push_back(k);
  return out;
}

/// Positives are training-disconnected pairs of V_T that connect in the test
/// year; negatives are a seeded uniform sample (without replacement) of the
/// pairs disconnected in both phases, `ratio` per positive.
inline InstanceSet build_instances(const TemporalKcn& kcn, const FeatureContext& ctx, int test_year,
                                   const InstanceOptions& opt = {}) {
  if (opt.ratio_neg_per_pos < 1) throw UsageError("negative ratio must be >= 1");
  if (test_year != kcn.last_year()) throw UsageError("test year must be the last network year");
  const int train_first = opt.train_first == 0 ? kcn.first_year() : opt.train_first;
  if (train_first >= test_year || !kcn.has_year(train_first)) throw UsageError("no training years before the test year");

  std::unordered_set<std::uint64_t> trained;
  for (int y = train_first; y < test_year; ++y)
    for (auto [a, b] : kcn.at(y).edges()) trained.insert(edge_key(a, b));
  const auto& test = kcn.at(test_year);
  const auto vt = keywords_in_both_phases(kcn, train_first, test_year);

  std::vector<Edge> positives, eligible;
  for (std::size_t i = 0; i < vt.size(); ++i)
    for (std::size_t j = i + 1; j < vt.size(); ++j) {
      if (trained.count(edge_key(vt[i], vt[j]))) continue;
      (test.has_edge(vt[i], vt[j]) ? positives : eligible).push_back(make_edge(vt[i], vt[j]));
    }
  const std::size_t want = positives.size() * static_cast<std::size_t>(opt.ratio_neg_per_pos);
  if (eligible.size() < want)
    throw DataError("negative sampling: need " + std::to_string(want) + " pairs but only " +
                    std::to_string(eligible.size()) + " are eligible (shortfall " +
                    std::to_string(want - eligible.size()) + ")");
  std::vector<Edge> negatives;
  negatives.reserve(want);
  std::mt19937_64 rng(opt.rng_seed);
  std::sample(eligible.begin(), eligible.end(), std::back_inserter(negatives), want, rng);

  InstanceSet set;
  set.feature_names = pair_feature_names();
  for (int y = train_first; y <= test_year; ++y) set.years.push_back(y);
  set.test_year = test_year;
  set.positives = positives.size();
  set.negatives = negatives.size();

  auto add = [&](const Edge& e, bool pos) {
    LabeledInstance inst;
    inst.a = e.first;
    inst.b = e.second;
    inst.positive = pos;
    for (std::size_t t = 0; t < set.years.size(); ++t)
      inst.raw.push_back(ctx.pair_vector(set.years[t], static_cast<int>(t) + 1, e.first, e.second));
    set.instances.push_back(std::move(inst));
  };
  for (const auto& e : positives) add(e, true);
  for (const auto& e : negatives) add(e, false);
  std::sort(set.instances.begin(), set.instances.end(),
            [](const auto& x, const auto& y) { return std::pair(x.a, x.b) < std::pair(y.a, y.b); });

  const auto dims = set.dims(), steps = set.train_steps();
  set.min.assign(dims, std::numeric_limits<double>::infinity());
  set.max.assign(dims, -std::numeric_limits<double>::infinity());
  for (const auto& inst : set.instances)
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t d = 0; d < dims; ++d) {
        set.min[d] = std::min(set.min[d], inst.raw[t][d]);
        set.max[d] = std::max(set.max[d], inst.raw[t][d]);
      }
  for (auto& inst : set.instances) {
    inst.series = inst.raw;
    for (auto& row : inst.series)
      for (std::size_t d = 0; d < dims; ++d) {
        const double span = set.max[d] - set.min[d];
        row[d] = span > 0 ? (row[d] - set.min[d]) / span : 0.0;
      }
  }
  return set;
}

inline constexpr std::string_view kInstanceHeader = "pair_a,pair_b,label,year,feature_name,value";

/// Keyword strings of an instance, lexicographically ordered.
inline std::pair<std::string, std::string> pair_names(const LabeledInstance& inst, const Interner& keywords) {
  auto x = keywords.name(inst.a), y = keywords.name(inst.b);
  if (y < x) std::swap(x, y);
  return {x, y};
}

/// Long-format dump of the normalized series (training years and test year).
inline std::string instances_csv(const InstanceSet& set, const Interner& keywords) {
  std::string out(kInstanceHeader);
  out += '\n';
  for (const auto& inst : set.instances) {
    auto [x, y] = pair_names(inst, keywords);
    const std::string prefix = x + ',' + y + ',' + (inst.positive ? "1" : "0") + ',';
    for (std::size_t t = 0; t < set.years.size(); ++t) {
      const std::string yp = prefix + std::to_string(set.years[t]) + ',';
      for (std::size_t d = 0; d < set.dims(); ++d) out += yp + set.feature_names[d] + ',' + io::fmt_real(inst.series[t][d]) + '\n';
    }
  }
  return out;
}

inline constexpr std::string_view kDensityHeader = "feature,label,bin_left,bin_right,density";

/// Class-conditional histogram densities of the normalized training-period
/// values, `bins` equal bins over [0, 1]; each (feature, label) integrates to 1.
inline std::string density_csv(const InstanceSet& set, int bins = 20) {
  std::string out(kDensityHeader);
  out += '\n';
  const double w = 1.0 / bins;
  for (std::size_t d = 0; d < set.dims(); ++d) {
    for (int label : {1, 0}) {
      std::vector<double> count(static_cast<std::size_t>(bins), 0.0);
      double n = 0;
      for (const auto& inst : set.instances) {
        if (inst.positive != (label == 1)) continue;
        for (std::size_t t = 0; t < set.train_steps(); ++t) {
          double v = std::clamp(inst.series[t][d], 0.0, 1.0);
          auto b = std::min(static_cast<std::size_t>(v * bins), static_cast<std::size_t>(bins - 1));
          count[b] += 1;
          n += 1;
        }
      }
      for (int b = 0; b < bins; ++b) {
        double density = n > 0 ? count[static_cast<std::size_t>(b)] / (n * w) : 0.0;
        out += set.feature_names[d] + ',' + std::to_string(label) + ',' + io::fmt_real(b * w) + ',' +
               io::fmt_real((b + 1) * w) + ',' + io::fmt_real(density) + '\n';
      }
    }
  }
  return out;
}

/// Reads an instance dump back. Only normalized values are persisted, so the
/// returned instances carry `series` with `raw` left empty.
inline InstanceSet instances_from_csv(const std::filesystem::path& p, const Interner& keywords) {
  InstanceSet set;
  set.feature_names = pair_feature_names();
  std::map<std::string, std::size_t> dim_of;
  for (std::size_t d = 0; d < set.feature_names.size(); ++d) dim_of[set.feature_names[d]] = d;
  std::map<std::pair<KeywordId, KeywordId>, LabeledInstance> by_pair;
  std::map<int, std::size_t> year_pos;
  auto rows = io::read_csv(p, kInstanceHeader);
  for (const auto& r : rows) year_pos[static_cast<int>(io::parse_int(r[3], p.string()))] = 0;
  for (auto& [y, pos] : year_pos) {
    pos = set.years.size();
    set.years.push_back(y);
  }
  if (set.years.size() < 2) throw DataError(p.string() + ": need at least one training year and a test year");
  set.test_year = set.years.back();
  for (const auto& r : rows) {
    auto ia = keywords.find(r[0]), ib = keywords.find(r[1]);
    if (!ia || !ib) throw DataError(p.string() + ": unknown keyword in pair " + r[0] + "," + r[1]);
    auto e = make_edge(*ia, *ib);
    auto& inst = by_pair[e];
    if (inst.series.empty()) {
      inst.a = e.first;
      inst.b = e.second;
      inst.positive = r[2] == "1";
      inst.series.assign(set.years.size(), std::vector<double>(set.dims(), 0.0));
    }
    auto d = dim_of.find(r[4]);
    if (d == dim_of.end()) throw DataError(p.string() + ": unknown feature '" + r[4] + "'");
    inst.series[year_pos[static_cast<int>(io::parse_int(r[3], p.string()))]][d->second] =
        io::parse_real(r[5], p.string());
  }
  for (auto& [k, inst] : by_pair) {
    (inst.positive ? set.positives : set.negatives)++;
    set.instances.push_back(std::move(inst));
  }
  return set;
}

}  // namespace kcnlp
