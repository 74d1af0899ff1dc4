#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>

#include "mhxai/ensemble.hpp"

namespace mhxai::shap {

using ensemble::ClassVector;
using ensemble::FeatureMatrix;
using ensemble::FeatureVector;
using ensemble::kNumClasses;
using ensemble::kNumFeatures;

/// phi(f, c) is the attribution of feature f to the margin of class c.
using Attribution = Eigen::Matrix<double, kNumFeatures, kNumClasses>;

struct ShapValues {
  FeatureVector instance = FeatureVector::Zero();
  ClassVector base_value = ClassVector::Zero();  // cover-weighted expected margin
  Attribution phi = Attribution::Zero();

  /// base_value + column sums of phi; equals predict_margin() up to rounding.
  ClassVector reconstructed_margin() const { return base_value + phi.colwise().sum().transpose(); }
};

/// Exact path-dependent Shapley values of one tree's raw output (no learning-rate scaling).
FeatureVector tree_shap(const ensemble::Tree& tree, const FeatureVector& x);

/// Cover-weighted expected margin per class.
ClassVector base_value(const ensemble::TreeEnsemble& m);

ShapValues explain_instance(const ensemble::TreeEnsemble& m, const FeatureVector& x);
/// Throws kBadVectorLength unless x.size() == 8.
ShapValues explain_instance(const ensemble::TreeEnsemble& m, const Eigen::VectorXd& x);

struct GlobalImportance {
  FeatureVector mean_abs = FeatureVector::Zero();
  /// Feature indices, most important first; ties broken by lower index.
  std::array<int, kNumFeatures> rank{};
};

/// Mean |phi| over the rows of x, each row attributed on its predicted class.
/// Throws kEmptyDataset for zero rows.
GlobalImportance global_importance(const ensemble::TreeEnsemble& m, const FeatureMatrix& x);

/// Ranks arbitrary non-negative importances (descending, ties by index).
std::array<int, kNumFeatures> rank_features(const FeatureVector& importance);

/// Two-column tab-separated table "feature<TAB>mean_abs_shap" in rank order.
std::string to_tsv(const GlobalImportance& g,
                   const std::array<std::string, kNumFeatures>& names = data::feature_names());

}  // namespace mhxai::shap
