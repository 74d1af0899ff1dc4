#include <gtest/gtest.h>

#include <chrono>
#include <cstring>

#include "mhxai/ensemble.hpp"
#include "mhxai/error.hpp"
#include "mhxai/pipeline.hpp"
#include "mhxai/synthetic.hpp"
#include "support.hpp"

using namespace mhxai;

TEST(Pipeline, FeatureRowsAreFieldByFieldAssembly) {
  const auto& p = fixture::small_pipeline();
  const auto rules = fuzzy::RuleBase::defaults();
  const auto access = data::AccessTable::defaults();
  for (std::size_t i = 0; i < p.test.size(); i += 17) {
    const auto& r = p.test.records[i];
    const auto row = p.test_features.x.row(static_cast<Eigen::Index>(i));
    EXPECT_EQ(row[0], r.age);
    EXPECT_EQ(row[1], r.systolic_bp);
    EXPECT_EQ(row[2], r.diastolic_bp);
    EXPECT_EQ(row[3], r.blood_sugar);
    EXPECT_EQ(row[4], r.body_temp);
    EXPECT_EQ(row[5], r.heart_rate);
    EXPECT_EQ(row[6], access.score(r.division));
    EXPECT_EQ(row[7], fuzzy::infer(rules, r).score);
    EXPECT_EQ(p.test_features.y[i], static_cast<int>(*r.risk));
  }
}

TEST(Pipeline, SameSeedsGiveIdenticalModelsAndPredictions) {
  pipeline::PipelineOptions opt;
  opt.train.rounds = 60;
  const auto ds = synthetic::generate_surrogate();
  const auto rules = fuzzy::RuleBase::defaults();
  const auto access = data::AccessTable::defaults();
  const auto a = pipeline::run(ds, rules, access, opt);
  const auto b = pipeline::run(ds, rules, access, opt);
  EXPECT_EQ(ensemble::to_text(a.model), ensemble::to_text(b.model));
  for (Eigen::Index i = 0; i < a.test_features.x.rows(); ++i) {
    const data::FeatureVector x = a.test_features.x.row(i).transpose();
    const auto pa = ensemble::predict_proba(a.model, x);
    const auto pb = ensemble::predict_proba(b.model, x);
    EXPECT_EQ(std::memcmp(pa.data(), pb.data(), sizeof(double) * 3), 0);
  }
  EXPECT_EQ(a.metrics.accuracy, b.metrics.accuracy);

  opt.split_seed = 7;
  const auto c = pipeline::run(ds, rules, access, opt);
  EXPECT_NE(c.test, a.test);
}

TEST(Pipeline, DefaultConfigOnSurrogateIsFastAndAccurate) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& p = fixture::surrogate_pipeline();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 120.0);
  EXPECT_EQ(p.model.rounds.size(), 400u);
  EXPECT_EQ(p.train.size() + p.test.size(), 1014u);
  // Regression guard on synthetic data only.
  EXPECT_GE(p.metrics.accuracy, 0.80);
  EXPECT_GE(p.metrics.roc_auc, 0.90);
  ASSERT_FALSE(p.report.loss.empty());
  EXPECT_LT(p.report.loss.back(), p.report.loss.front());
}

TEST(Pipeline, FuzzyValidityIsSpearmanOverLabelledRecords) {
  const auto ds = synthetic::generate_surrogate();
  const auto rules = fuzzy::RuleBase::defaults();
  std::vector<double> s, y;
  for (const auto& r : ds.records) {
    s.push_back(fuzzy::infer(rules, r).score);
    y.push_back(static_cast<double>(*r.risk));
  }
  const auto want = stats::spearman(s, y);
  const auto got = pipeline::fuzzy_validity(ds, rules);
  EXPECT_EQ(got.statistic, want.statistic);
  EXPECT_EQ(got.p_value, want.p_value);
  EXPECT_GT(got.statistic, 0.0);
}

TEST(Pipeline, UnlabelledRecordsRejected) {
  auto ds = synthetic::generate_surrogate();
  for (auto& r : ds.records) r.risk.reset();
  EXPECT_THROW(pipeline::run(ds, fuzzy::RuleBase::defaults(), data::AccessTable::defaults()),
               Error);
}
