#pragma once

// Shared fixtures and independent oracles for the test binaries and the
// acceptance runner. Oracles here deliberately avoid the library code they
// check: Shapley values by subset enumeration, power by simulation.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mhxai/data.hpp"
#include "mhxai/ensemble.hpp"
#include "mhxai/fuzzy.hpp"
#include "mhxai/pipeline.hpp"
#include "mhxai/synthetic.hpp"

#ifndef MHXAI_SOURCE_DIR
#define MHXAI_SOURCE_DIR "."
#endif

namespace mhxai::fixture {

inline std::filesystem::path source_path(const std::string& rel) {
  return std::filesystem::path(MHXAI_SOURCE_DIR) / rel;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Golden text files under tests/golden/; MHXAI_UPDATE_GOLDEN=1 rewrites them.
/// Returns the stored text (or `text` itself when updating).
inline std::string golden(const std::string& name, const std::string& text) {
  const auto path = source_path("tests/golden/" + name);
  if (std::getenv("MHXAI_UPDATE_GOLDEN")) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << text;
    return text;
  }
  return read_file(path);
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("mhxai_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

inline data::PatientRecord patient(int age, double sbp, double dbp, double bs, double temp,
                                   double hr, std::string division = "Dhaka") {
  data::PatientRecord r;
  r.age = age;
  r.systolic_bp = sbp;
  r.diastolic_bp = dbp;
  r.blood_sugar = bs;
  r.body_temp = temp;
  r.heart_rate = hr;
  r.division = std::move(division);
  return r;
}

/// Surrogate pipeline with defaults, computed once per process.
inline const pipeline::PipelineResult& surrogate_pipeline() {
  static const pipeline::PipelineResult result = [] {
    return pipeline::run(synthetic::generate_surrogate(), fuzzy::RuleBase::defaults(),
                         data::AccessTable::defaults());
  }();
  return result;
}

/// Small, fast model for explainer and service tests.
inline const pipeline::PipelineResult& small_pipeline() {
  static const pipeline::PipelineResult result = [] {
    pipeline::PipelineOptions opt;
    opt.train.rounds = 40;
    opt.train.max_depth = 3;
    opt.train.learning_rate = 0.2;
    return pipeline::run(synthetic::generate_surrogate(), fuzzy::RuleBase::defaults(),
                         data::AccessTable::defaults(), opt);
  }();
  return result;
}

// Path-dependent conditional expectation of one tree given the features in
// `known`: known features follow x, unknown ones average children by cover.
inline double conditional_expectation(const ensemble::Tree& t, const data::FeatureVector& x,
                                      unsigned known, int node = 0) {
  const auto& n = t.nodes[static_cast<std::size_t>(node)];
  if (n.is_leaf()) return n.value;
  if (known & (1u << n.feature)) {
    return conditional_expectation(t, x, known, x[n.feature] < n.threshold ? n.left : n.right);
  }
  const auto& l = t.nodes[static_cast<std::size_t>(n.left)];
  const auto& r = t.nodes[static_cast<std::size_t>(n.right)];
  return (l.cover * conditional_expectation(t, x, known, n.left) +
          r.cover * conditional_expectation(t, x, known, n.right)) /
         (l.cover + r.cover);
}

/// Shapley values by enumerating all 2^8 coalitions.
inline data::FeatureVector brute_force_shapley(const ensemble::Tree& t,
                                               const data::FeatureVector& x) {
  constexpr int m = data::kNumFeatures;
  std::vector<double> value(1u << m);
  for (unsigned s = 0; s < value.size(); ++s) value[s] = conditional_expectation(t, x, s);
  std::vector<double> fact(m + 1, 1.0);
  for (int i = 1; i <= m; ++i) fact[i] = fact[i - 1] * i;
  data::FeatureVector phi = data::FeatureVector::Zero();
  for (int i = 0; i < m; ++i) {
    for (unsigned s = 0; s < value.size(); ++s) {
      if (s & (1u << i)) continue;
      const int k = __builtin_popcount(s);
      const double w = fact[k] * fact[m - k - 1] / fact[m];
      phi[i] += w * (value[s | (1u << i)] - value[s]);
    }
  }
  return phi;
}

/// Random tree over features [0, n_features) with depth <= max_depth and
/// random positive covers consistent with their children.
inline ensemble::Tree random_tree(std::mt19937_64& rng, int n_features, int max_depth) {
  ensemble::Tree t;
  std::uniform_int_distribution<int> feat(0, n_features - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Build preorder; returns the node index and its cover.
  auto build = [&](auto&& self, int depth) -> std::pair<int, double> {
    const int idx = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    if (depth == max_depth || (depth > 0 && u(rng) < 0.3)) {
      t.nodes[idx].value = u(rng) * 4 - 2;
      t.nodes[idx].cover = 1 + std::floor(u(rng) * 20);
      return {idx, t.nodes[idx].cover};
    }
    const int f = feat(rng);
    const double thr = std::round(u(rng) * 10) / 2;  // coarse so ties with x occur
    auto [l, lc] = self(self, depth + 1);
    auto [r, rc] = self(self, depth + 1);
    auto& n = t.nodes[idx];
    n.feature = f;
    n.threshold = thr;
    n.left = l;
    n.right = r;
    n.cover = lc + rc;
    return {idx, n.cover};
  };
  build(build, 0);
  return t;
}

/// Power of the level-alpha chi-square test by simulation: the statistic is
/// a sum of df squared normals with the whole noncentrality on the first.
inline double monte_carlo_power(double w, long n, int df, double critical, long draws,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const double shift = std::sqrt(static_cast<double>(n) * w * w);
  long hits = 0;
  for (long i = 0; i < draws; ++i) {
    double first = z(rng) + shift;
    double s = first * first;
    for (int k = 1; k < df; ++k) {
      const double v = z(rng);
      s += v * v;
    }
    if (s > critical) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(draws);
}

}  // namespace mhxai::fixture
