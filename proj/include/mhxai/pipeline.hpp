#pragma once

#include <cstdint>
#include <vector>

#include "mhxai/data.hpp"
#include "mhxai/ensemble.hpp"
#include "mhxai/fuzzy.hpp"
#include "mhxai/stats.hpp"

namespace mhxai::pipeline {

struct PipelineOptions {
  std::uint64_t division_seed = 42;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 42;
  bool stratified = true;
  ensemble::TrainConfig train;
  bool compute_importance = true;  // stores mean |SHAP| in the model
};

/// Fuzzy scores and feature rows for every record (records must carry a division).
struct FeatureTable {
  data::FeatureMatrix x;
  std::vector<int> y;  // empty when any record is unlabeled
  std::vector<double> fuzzy_scores;
};

FeatureTable build_features(const data::Dataset& ds, const fuzzy::RuleBase& rules,
                            const data::AccessTable& access);

/// Class indices; throws kInvalidArgument if a record has no label.
std::vector<int> labels(const data::Dataset& ds);

struct PipelineResult {
  data::Dataset augmented;
  data::Dataset train;
  data::Dataset test;
  FeatureTable train_features;
  FeatureTable test_features;
  ensemble::TreeEnsemble model;
  ensemble::TrainingReport report;
  ensemble::Metrics metrics;
};

/// augment -> split -> fuzzy scores -> features -> train -> evaluate.
PipelineResult run(const data::Dataset& ds, const fuzzy::RuleBase& rules,
                   const data::AccessTable& access, const PipelineOptions& options = {});

/// Spearman correlation between the fuzzy score and the ordinal risk label
/// over every labelled record.
stats::TestResult fuzzy_validity(const data::Dataset& ds, const fuzzy::RuleBase& rules);

}  // namespace mhxai::pipeline
