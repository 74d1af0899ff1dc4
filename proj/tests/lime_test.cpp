#include <gtest/gtest.h>

#include <cmath>

#include "mhxai/error.hpp"
#include "mhxai/lime.hpp"
#include "support.hpp"

using namespace mhxai;
using namespace mhxai::lime;

namespace {

FeatureStats unit_stats() {
  FeatureStats s;
  s.mean << 30, 120, 80, 7, 98, 75, 0.6, 50;
  s.stddev << 12, 18, 13, 3, 1.4, 8, 0.18, 20;
  return s;
}

data::FeatureVector instance() {
  data::FeatureVector x;
  x << 35, 140, 90, 9, 98.6, 80, 0.65, 70;
  return x;
}

}  // namespace

TEST(Lime, ConstantPredictor) {
  const auto e = explain_instance([](const FeatureVector&) { return 0.7; }, instance(), unit_stats());
  EXPECT_LT(e.weights.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(e.intercept, 0.7, 1e-9);
  EXPECT_DOUBLE_EQ(e.predicted_value, 0.7);
  EXPECT_EQ(e.explained_class, -1);
}

TEST(Lime, RecoversLinearPredictor) {
  const auto s = unit_stats();
  // 2 * z1 with z the standardized coordinate of systolic pressure.
  auto f = [&](const FeatureVector& x) { return 2 * (x[1] - s.mean[1]) / s.stddev[1]; };
  const auto e = explain_instance(f, instance(), s);
  EXPECT_NEAR(e.weights[1], 2.0, 0.1);
  for (int k = 0; k < kNumFeatures; ++k) {
    if (k != 1) EXPECT_LT(std::abs(e.weights[k]), 0.05) << k;
  }
  EXPECT_EQ(e.top.front(), 1);
  EXPECT_GT(e.local_fidelity, 0.99);
}

TEST(Lime, SeedDeterminism) {
  const auto& m = fixture::small_pipeline().model;
  const FeatureVector x = fixture::small_pipeline().test_features.x.row(3).transpose();
  const auto a = explain_prediction(m, x);
  const auto b = explain_prediction(m, x);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.intercept, b.intercept);
  EXPECT_EQ(a.top, b.top);
  LimeConfig other;
  other.seed = 7;
  EXPECT_NE(explain_prediction(m, x, other).weights, a.weights);
  EXPECT_EQ(a.explained_class, static_cast<int>(ensemble::predict(m, x)));
  EXPECT_DOUBLE_EQ(a.predicted_value, ensemble::predict_proba(m, x)[a.explained_class]);
  EXPECT_EQ(static_cast<int>(a.top.size()), LimeConfig{}.top_k);
}

TEST(Lime, ConstantTrainingFeatureExcluded) {
  auto s = unit_stats();
  s.stddev[6] = 0;
  auto f = [](const FeatureVector& x) { return 0.01 * x[6] + 0.001 * x[0]; };
  const auto e = explain_instance(f, instance(), s);
  EXPECT_EQ(e.weights[6], 0.0);
}

TEST(Lime, ConfigValidationAndDegenerateKernel) {
  LimeConfig cfg;
  cfg.n_samples = 1;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.kernel_width = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.kernel_width = 1e-3;  // every perturbed sample gets zero weight
  try {
    explain_instance([](const FeatureVector& x) { return x[0]; }, instance(), unit_stats(), cfg);
    FAIL() << "expected DegenerateKernel";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateKernel);
  }
}

TEST(WeightedRidge, MatchesClosedFormNormalEquations) {
  // Oracle: solve the augmented normal equations directly with a QR solver.
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  const int n = 60, p = 3;
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n), w(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = z(rng);
    y[i] = 1.5 - x(i, 0) + 0.5 * x(i, 2) + 0.1 * z(rng);
    w[i] = std::exp(-0.5 * x.row(i).squaredNorm());
  }
  const double lambda = 0.7;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p + 1, p + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p + 1);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd row(p + 1);
    row << 1, x.row(i).transpose();
    a += w[i] * row * row.transpose();
    b += w[i] * y[i] * row;
  }
  for (int j = 1; j <= p; ++j) a(j, j) += lambda;
  const Eigen::VectorXd want = a.colPivHouseholderQr().solve(b);
  const auto fit = weighted_ridge(x, y, w, lambda, std::vector<bool>(p, true));
  EXPECT_NEAR(fit.intercept, want[0], 1e-10);
  for (int j = 0; j < p; ++j) EXPECT_NEAR(fit.coef[j], want[j + 1], 1e-10);
  EXPECT_GT(fit.r_squared, 0.9);
  EXPECT_LE(fit.r_squared, 1.0);

  const auto partial = weighted_ridge(x, y, w, lambda, {true, false, true});
  EXPECT_EQ(partial.coef[1], 0.0);
}
