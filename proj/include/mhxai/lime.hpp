#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mhxai/ensemble.hpp"

namespace mhxai::lime {

using ensemble::FeatureStats;
using ensemble::FeatureVector;
using ensemble::kNumFeatures;

struct LimeConfig {
  int n_samples = 5000;
  double kernel_width = 0.75 * 2.8284271247461903;  // 0.75 * sqrt(8)
  double ridge_penalty = 1.0;
  int top_k = 4;
  std::uint64_t seed = 42;

  void validate() const;
};

struct LimeExplanation {
  double intercept = 0;
  /// Coefficients on standardized features (x - mean) / std.
  FeatureVector weights = FeatureVector::Zero();
  /// Feature indices with the largest |weight|, descending; ties by index.
  std::vector<int> top;
  double local_fidelity = 0;  // weighted R^2 clamped to [0,1]
  int explained_class = -1;   // -1 when the predictor is not tied to a class
  double predicted_value = 0; // predictor at the instance itself
};

using Predictor = std::function<double(const FeatureVector&)>;

/// Gaussian perturbations around x with the training std per feature
/// (constant features perturbed with std 1 and excluded from the fit), kernel
/// exp(-d^2 / width^2) with d measured in standardized units, weighted ridge
/// with an unpenalized intercept. Sample 0 is x itself.
LimeExplanation explain_instance(const Predictor& predictor, const FeatureVector& x,
                                 const FeatureStats& stats, const LimeConfig& cfg = {});

/// Explains the probability of the model's predicted class for x, using the
/// model's stored training statistics.
LimeExplanation explain_prediction(const ensemble::TreeEnsemble& m, const FeatureVector& x,
                                   const LimeConfig& cfg = {});

struct RidgeFit {
  double intercept = 0;
  Eigen::VectorXd coef;
  double r_squared = 0;  // weighted, clamped to [0,1]
};

/// Minimizes sum w_i (y_i - b - z_i.beta)^2 + lambda |beta|^2 over the columns
/// flagged in `active`; inactive columns get coefficient 0.
RidgeFit weighted_ridge(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& w, double lambda, const std::vector<bool>& active);

}  // namespace mhxai::lime
