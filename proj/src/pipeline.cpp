#include "mhxai/pipeline.hpp"

#include "mhxai/error.hpp"
#include "mhxai/shap.hpp"

namespace mhxai::pipeline {

std::vector<int> labels(const data::Dataset& ds) {
  std::vector<int> y;
  y.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& r = ds.records[i];
    if (!r.risk) {
      throw Error(ErrorCode::kInvalidArgument, "record " + std::to_string(i + 1) + " has no label");
    }
    y.push_back(static_cast<int>(*r.risk));
  }
  return y;
}

FeatureTable build_features(const data::Dataset& ds, const fuzzy::RuleBase& rules,
                            const data::AccessTable& access) {
  FeatureTable t;
  t.x.resize(static_cast<Eigen::Index>(ds.size()), data::kNumFeatures);
  t.fuzzy_scores.reserve(ds.size());
  bool labelled = true;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& r = ds.records[i];
    const double score = fuzzy::infer(rules, r).score;
    t.fuzzy_scores.push_back(score);
    t.x.row(static_cast<Eigen::Index>(i)) = data::to_features(r, score, access).transpose();
    labelled = labelled && r.risk.has_value();
  }
  if (labelled) t.y = labels(ds);
  return t;
}

PipelineResult run(const data::Dataset& ds, const fuzzy::RuleBase& rules,
                   const data::AccessTable& access, const PipelineOptions& options) {
  PipelineResult out;
  out.augmented = data::augment_access(ds, access, options.division_seed);
  std::tie(out.train, out.test) =
      data::split(out.augmented, options.test_fraction, options.split_seed, options.stratified);
  out.train_features = build_features(out.train, rules, access);
  out.test_features = build_features(out.test, rules, access);
  if (out.train_features.y.empty() || out.test_features.y.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "training data must be fully labelled");
  }
  out.model = ensemble::train(out.train_features.x, out.train_features.y, options.train,
                              &out.report);
  if (options.compute_importance) {
    out.model.global_importance = shap::global_importance(out.model, out.train_features.x).mean_abs;
  }
  out.metrics = ensemble::evaluate(out.model, out.test_features.x, out.test_features.y);
  return out;
}

stats::TestResult fuzzy_validity(const data::Dataset& ds, const fuzzy::RuleBase& rules) {
  std::vector<double> scores, ordinal;
  for (const auto& r : ds.records) {
    if (!r.risk) continue;
    scores.push_back(fuzzy::infer(rules, r).score);
    ordinal.push_back(static_cast<double>(*r.risk));
  }
  return stats::spearman(scores, ordinal);
}

}  // namespace mhxai::pipeline
