#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "kcnlp/centrality.hpp"
#include "kcnlp/corpus.hpp"
#include "kcnlp/genealogy.hpp"
#include "kcnlp/kcn.hpp"
#include "kcnlp/synth.hpp"

namespace testing_support {

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("kcnlp_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline kcnlp::SynthConfig small_synth(std::uint64_t seed = 7) {
  kcnlp::SynthConfig c;
  c.rng_seed = seed;
  c.years = 5;
  c.articles_per_year = 60;
  c.keyword_pool = 150;
  c.authors = 50;
  return c;
}

inline kcnlp::Corpus synth_corpus(const kcnlp::SynthConfig& c) {
  return kcnlp::build_corpus(kcnlp::generate(c).records, kcnlp::NormalizationRules::english_plurals());
}

// Random dense 0/1 matrix with every row and column non-empty.
inline std::vector<std::vector<int>> random_incidence(std::mt19937_64& rng, int max_dim = 50) {
  std::uniform_int_distribution<int> dim(1, max_dim);
  const int rows = dim(rng), cols = dim(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double density = 0.05 + 0.4 * u(rng);
  std::vector<std::vector<int>> m(static_cast<std::size_t>(rows), std::vector<int>(static_cast<std::size_t>(cols), 0));
  for (auto& r : m)
    for (auto& x : r) x = u(rng) < density;
  std::uniform_int_distribution<int> pr(0, rows - 1), pc(0, cols - 1);
  for (int i = 0; i < rows; ++i) {
    auto& r = m[static_cast<std::size_t>(i)];
    if (std::find(r.begin(), r.end(), 1) == r.end()) r[static_cast<std::size_t>(pc(rng))] = 1;
  }
  for (int j = 0; j < cols; ++j) {
    bool any = false;
    for (int i = 0; i < rows; ++i) any |= m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0;
    if (!any) m[static_cast<std::size_t>(pr(rng))][static_cast<std::size_t>(j)] = 1;
  }
  return m;
}

}  // namespace testing_support

#include <memory>

#include "kcnlp/features.hpp"

namespace testing_support {

// Everything up to the feature context for one corpus. Not movable: the
// context points into `kcn`.
struct Built {
  kcnlp::Corpus corpus;
  kcnlp::TemporalKcn kcn;
  std::vector<kcnlp::CentralityTable> tables;
  std::vector<kcnlp::CommunityAssignment> assignments;
  std::unique_ptr<kcnlp::FeatureContext> ctx;

  explicit Built(kcnlp::Corpus c) : corpus(std::move(c)), kcn(kcnlp::build_temporal_kcn(corpus)) {
    for (auto v : kcnlp::kAllVariants)
      for (auto& s : kcn.snapshots()) tables.push_back(kcnlp::centrality_table(kcn, corpus, s.year(), v));
    for (auto v : kcnlp::kAllVariants) {
      auto a = kcnlp::assign_all_years(kcn, tables, v);
      assignments.insert(assignments.end(), a.begin(), a.end());
    }
    ctx = std::make_unique<kcnlp::FeatureContext>(kcn, corpus, tables, assignments);
  }
  Built(const Built&) = delete;
  Built& operator=(const Built&) = delete;
};

}  // namespace testing_support
