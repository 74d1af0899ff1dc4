#include "mhxai/lime.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mhxai/error.hpp"

namespace mhxai::lime {

namespace {

constexpr double kDegenerateWeight = 1e-12;

}  // namespace

void LimeConfig::validate() const {
  if (n_samples < 100) throw Error(ErrorCode::kInvalidArgument, "n_samples must be >= 100");
  if (!(kernel_width > 0)) throw Error(ErrorCode::kInvalidArgument, "kernel_width must be > 0");
  if (!(ridge_penalty >= 0)) throw Error(ErrorCode::kInvalidArgument, "ridge_penalty must be >= 0");
  if (top_k < 0 || top_k > kNumFeatures) {
    throw Error(ErrorCode::kInvalidArgument, "top_k must be in [0, 8]");
  }
}

RidgeFit weighted_ridge(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& w, double lambda, const std::vector<bool>& active) {
  const Eigen::Index n = z.rows();
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    if (active[static_cast<std::size_t>(j)]) cols.push_back(j);
  }
  const auto p = static_cast<Eigen::Index>(cols.size());

  // Design [1 | active columns]; the intercept column is not penalized.
  Eigen::MatrixXd a(n, p + 1);
  a.col(0).setOnes();
  for (Eigen::Index k = 0; k < p; ++k) a.col(k + 1) = z.col(cols[static_cast<std::size_t>(k)]);

  Eigen::MatrixXd gram = a.transpose() * w.asDiagonal() * a;
  gram.diagonal().tail(p).array() += lambda;
  const Eigen::VectorXd rhs = a.transpose() * w.cwiseProduct(y);
  const Eigen::VectorXd beta = gram.ldlt().solve(rhs);

  RidgeFit fit;
  fit.intercept = beta[0];
  fit.coef = Eigen::VectorXd::Zero(z.cols());
  for (Eigen::Index k = 0; k < p; ++k) fit.coef[cols[static_cast<std::size_t>(k)]] = beta[k + 1];

  const double total = w.sum();
  const double mean = w.dot(y) / total;
  const Eigen::VectorXd resid = y - a * beta;
  const double ss_res = w.dot(resid.cwiseAbs2());
  const double ss_tot = w.dot((y.array() - mean).square().matrix());
  fit.r_squared = ss_tot > 0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return fit;
}

LimeExplanation explain_instance(const Predictor& predictor, const FeatureVector& x,
                                 const FeatureStats& stats, const LimeConfig& cfg) {
  cfg.validate();
  if (!x.allFinite()) throw Error(ErrorCode::kNonFiniteFeature, "non-finite feature value");

  std::vector<bool> active(kNumFeatures);
  FeatureVector scale;
  for (int j = 0; j < kNumFeatures; ++j) {
    active[static_cast<std::size_t>(j)] = stats.stddev[j] > 0;
    scale[j] = stats.stddev[j] > 0 ? stats.stddev[j] : 1.0;
  }

  const auto n = static_cast<Eigen::Index>(cfg.n_samples);
  Eigen::MatrixXd z(n, kNumFeatures);
  Eigen::VectorXd y(n), w(n);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise;
  const double width2 = cfg.kernel_width * cfg.kernel_width;
  for (Eigen::Index i = 0; i < n; ++i) {
    FeatureVector e = FeatureVector::Zero();
    if (i > 0) {
      for (int j = 0; j < kNumFeatures; ++j) e[j] = noise(rng);
    }
    const FeatureVector sample = x + e.cwiseProduct(scale);
    z.row(i) = ((sample - stats.mean).cwiseQuotient(scale)).transpose();
    y[i] = predictor(sample);
    w[i] = std::exp(-e.squaredNorm() / width2);
  }
  if (w.tail(n - 1).sum() < kDegenerateWeight) {
    throw Error(ErrorCode::kDegenerateKernel,
                "all perturbation weights vanish; increase kernel_width");
  }

  const RidgeFit fit = weighted_ridge(z, y, w, cfg.ridge_penalty, active);
  LimeExplanation out;
  out.intercept = fit.intercept;
  out.weights = fit.coef;
  out.local_fidelity = fit.r_squared;
  out.predicted_value = y[0];

  std::vector<int> order(kNumFeatures);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(out.weights[a]) > std::abs(out.weights[b]);
  });
  out.top.assign(order.begin(), order.begin() + cfg.top_k);
  return out;
}

LimeExplanation explain_prediction(const ensemble::TreeEnsemble& m, const FeatureVector& x,
                                   const LimeConfig& cfg) {
  const int cls = ensemble::argmax_high(ensemble::predict_margin(m, x));
  auto out = explain_instance(
      [&](const FeatureVector& v) { return ensemble::predict_proba(m, v)[cls]; }, x,
      m.feature_stats, cfg);
  out.explained_class = cls;
  return out;
}

}  // namespace mhxai::lime
