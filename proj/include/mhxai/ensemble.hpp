#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mhxai/data.hpp"

namespace mhxai::ensemble {

using data::FeatureMatrix;
using data::FeatureVector;
using data::kNumClasses;
using data::kNumFeatures;

using ClassVector = Eigen::Matrix<double, kNumClasses, 1>;
using ConfusionMatrix = Eigen::Matrix<long, kNumClasses, kNumClasses>;

/// Internal when feature >= 0 (route left iff x[feature] < threshold),
/// leaf otherwise. `cover` is the class-weighted training weight reaching the node.
struct TreeNode {
  int feature = -1;
  double threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0;  // leaf output before learning-rate scaling
  double cover = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Flat node array, root at index 0.
struct Tree {
  std::vector<TreeNode> nodes;

  /// Index of the leaf x is routed to.
  int leaf_index(const FeatureVector& x) const;
  double predict(const FeatureVector& x) const { return nodes[leaf_index(x)].value; }
  /// Longest root-to-leaf path, counted in splits.
  int depth() const;
  /// Cover-weighted mean leaf value.
  double expected_value() const;

  static Tree leaf(double value, double cover = 1.0);
  bool operator==(const Tree&) const = default;
};

struct TrainConfig {
  int rounds = 400;
  int max_depth = 5;
  double learning_rate = 0.05;
  double l1_penalty = 0.1;
  double l2_penalty = 1.0;
  double min_child_weight = 1.0;
  /// nullopt: inverse class frequency normalised so the mean sample weight is 1.
  std::optional<std::array<double, kNumClasses>> class_weights;
  std::uint64_t seed = 42;

  void validate() const;
  /// Canonical one-line rendering; part of the model file and its digest.
  std::string describe() const;
};

struct FeatureStats {
  FeatureVector mean = FeatureVector::Zero();
  FeatureVector stddev = FeatureVector::Ones();

  static FeatureStats of(const FeatureMatrix& x);
  bool operator==(const FeatureStats&) const = default;
};

struct TreeEnsemble {
  std::array<std::string, kNumClasses> class_names{"Low", "Mid", "High"};
  std::array<std::string, kNumFeatures> feature_names = data::feature_names();
  ClassVector base_score = ClassVector::Zero();
  double learning_rate = 1.0;
  /// rounds[r][c] is the tree of round r for class c.
  std::vector<std::array<Tree, kNumClasses>> rounds;
  FeatureStats feature_stats;
  std::string config;
  /// Mean |SHAP| per feature over the training set, when computed.
  std::optional<FeatureVector> global_importance;

  void validate() const;
  bool operator==(const TreeEnsemble&) const = default;
};

struct TrainingReport {
  /// Class-weighted mean log-loss; entry 0 is before the first round.
  std::vector<double> loss;
  std::array<double, kNumClasses> class_weights{};
};

TreeEnsemble train(const FeatureMatrix& x, std::span<const int> labels, const TrainConfig& cfg,
                   TrainingReport* report = nullptr);

ClassVector predict_margin(const TreeEnsemble& m, const FeatureVector& x);
/// Dynamic-length entry point; throws kBadVectorLength unless x.size() == 8.
ClassVector predict_margin(const TreeEnsemble& m, const Eigen::VectorXd& x);

ClassVector softmax(const ClassVector& margins);
ClassVector predict_proba(const TreeEnsemble& m, const FeatureVector& x);
/// Argmax; ties go to the higher-risk class.
int argmax_high(const ClassVector& v);
data::RiskLevel predict(const TreeEnsemble& m, const FeatureVector& x);

struct Metrics {
  double accuracy = 0;
  double roc_auc = 0;  // macro mean over classes with both positives and negatives
  std::array<std::optional<double>, kNumClasses> class_auc;
  std::array<double, kNumClasses> precision{};
  std::array<double, kNumClasses> recall{};
  ConfusionMatrix confusion = ConfusionMatrix::Zero();  // rows: true class
  std::size_t n = 0;
};

/// One-vs-rest AUC of `scores` for the positive set, ties counted as 1/2.
std::optional<double> auc(std::span<const double> scores, std::span<const bool> positive);

Metrics evaluate(const TreeEnsemble& m, const FeatureMatrix& x, std::span<const int> labels);
/// Same metrics from a precomputed n x 3 probability table.
Metrics evaluate_probabilities(const Eigen::MatrixXd& proba, std::span<const int> labels);

inline constexpr int kModelFormatVersion = 1;

std::string to_text(const TreeEnsemble& m);
TreeEnsemble from_text(std::string_view text);
void save(const TreeEnsemble& m, const std::filesystem::path& path);
TreeEnsemble load(const std::filesystem::path& path);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string digest(std::string_view bytes);
/// "mhxai-<format version>-<digest of the serialized model>".
std::string model_version(const TreeEnsemble& m);

}  // namespace mhxai::ensemble
