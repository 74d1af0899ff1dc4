#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mhxai/error.hpp"
#include "mhxai/stats.hpp"
#include "support.hpp"

using namespace mhxai;
using namespace mhxai::stats;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

ContingencyTable table(std::initializer_list<std::initializer_list<long>> rows) {
  ContingencyTable t;
  const auto r = static_cast<int>(rows.size());
  const auto c = static_cast<int>(rows.begin()->size());
  t.counts.resize(r, c);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (long v : row) t.counts(i, j++) = v;
    t.row_labels.push_back("r" + std::to_string(i++));
  }
  for (int j = 0; j < c; ++j) t.col_labels.push_back("c" + std::to_string(j));
  return t;
}

// Pearson correlation of average ranks, straight from the definition.
double rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        less += w < v[i];
        equal += w == v[i];
      }
      r[i] = less + (equal + 1) / 2;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(Spearman, PerfectMonotonePairs) {
  const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7};
  const std::vector<double> up = {2, 4, 8, 16, 32, 64, 128};
  const std::vector<double> down(up.rbegin(), up.rend());
  EXPECT_DOUBLE_EQ(spearman(x, up).statistic, 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, down).statistic, -1.0);
  // Exact two-sided permutation p: 2 of 7! orderings are as extreme.
  EXPECT_NEAR(spearman(x, up).p_value, 2.0 / 5040, 1e-15);
}

TEST(Spearman, TiesAndLargeSampleAgainstDefinition) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> d(0, 5);
  std::vector<double> a(300), b(300);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = d(rng);
    b[i] = a[i] + d(rng);
  }
  const auto r = spearman(a, b);
  EXPECT_NEAR(r.statistic, rank_correlation(a, b), 1e-12);
  EXPECT_EQ(r.df, 298);
  const double t = r.statistic * std::sqrt(298 / (1 - r.statistic * r.statistic));
  EXPECT_NEAR(r.p_value, student_t_two_sided(t, 298), 1e-15);
  EXPECT_LT(r.p_value, 1e-10);
}

TEST(Spearman, Errors) {
  const std::vector<double> a = {1, 2, 3}, b = {1, 2}, flat = {4, 4, 4};
  EXPECT_EQ(code_of([&] { spearman(a, b); }), ErrorCode::kLengthMismatch);
  EXPECT_EQ(code_of([&] { spearman(a, flat); }), ErrorCode::kConstantInput);
  EXPECT_EQ(code_of([&] { spearman(b, b); }), ErrorCode::kInvalidArgument);
}

TEST(AverageRanks, Ties) {
  const std::vector<double> v = {10, 20, 10, 30, 20};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{1.5, 3.5, 1.5, 5, 3.5}));
}

TEST(ChiSquare, IdenticalRowsAreIndependent) {
  const auto r = chi_square_independence(table({{3, 5, 2}, {3, 5, 2}}));
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.df, 2);
}

TEST(ChiSquare, PreferenceTableByHand) {
  // Row sums 14; column sums 30, 10, 2 -> expected 10, 10/3, 2/3 per row.
  const double e[3] = {10, 10.0 / 3, 2.0 / 3};
  const long obs[3][3] = {{11, 1, 2}, {11, 3, 0}, {8, 6, 0}};
  double want = 0;
  for (const auto& row : obs) {
    for (int j = 0; j < 3; ++j) want += (row[j] - e[j]) * (row[j] - e[j]) / e[j];
  }
  const auto r = chi_square_independence(table({{11, 1, 2}, {11, 3, 0}, {8, 6, 0}}));
  EXPECT_NEAR(r.statistic, want, 1e-12);
  EXPECT_NEAR(r.statistic, 8.40, 0.005);
  EXPECT_EQ(r.df, 4);
  EXPECT_NEAR(r.p_value, chi_square_sf(want, 4), 1e-15);
}

TEST(ChiSquare, TwoByTwo) {
  const auto r = chi_square_independence(table({{10, 0}, {0, 10}}));
  EXPECT_DOUBLE_EQ(r.statistic, 20.0);
  EXPECT_EQ(r.df, 1);
}

TEST(ChiSquare, Errors) {
  EXPECT_EQ(code_of([] { chi_square_independence(table({{0, 0}, {1, 2}})); }),
            ErrorCode::kZeroExpectedCount);
  EXPECT_THROW(chi_square_independence(table({{1, 2}})), Error);
  const std::vector<double> o = {10, 20}, e = {15, 15, 0};
  EXPECT_EQ(code_of([&] { chi_square_gof(o, e); }), ErrorCode::kLengthMismatch);
}

TEST(ChiSquare, GoodnessOfFit) {
  const std::vector<double> o = {30, 10, 2}, e = {14, 14, 14};
  const auto r = chi_square_gof(o, e);
  EXPECT_NEAR(r.statistic, (16.0 * 16 + 16 + 144) / 14, 1e-12);
  EXPECT_EQ(r.df, 2);
}

TEST(CohensW, Values) {
  EXPECT_EQ(cohens_w(0, 42), 0.0);
  EXPECT_NEAR(cohens_w(15.43, 42), 0.606, 0.0005);
  EXPECT_DOUBLE_EQ(cohens_w(42, 42), 1.0);
  EXPECT_THROW(cohens_w(1, 0), Error);
}

TEST(Anova, IdenticalGroups) {
  const std::vector<GroupSummary> g = {{3, 1, 10}, {3, 1, 10}, {3, 1, 10}};
  const auto r = anova_from_summary(g);
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(Anova, ClarityRatings) {
  const std::vector<GroupSummary> g = {{3.14, 1.61, 14}, {3.14, 1.46, 14}, {2.86, 1.10, 14}};
  const auto r = anova_from_summary(g);
  // Between: 14 * sum (m - 3.0467)^2 / 2; within: 13 * sum sd^2 / 39.
  const double grand = (3.14 + 3.14 + 2.86) / 3;
  const double between =
      14 * (2 * (3.14 - grand) * (3.14 - grand) + (2.86 - grand) * (2.86 - grand)) / 2;
  const double within = 13 * (1.61 * 1.61 + 1.46 * 1.46 + 1.10 * 1.10) / 39;
  EXPECT_NEAR(r.statistic, between / within, 1e-12);
  EXPECT_NEAR(r.statistic, 0.18, 0.01);
  EXPECT_NEAR(r.p_value, 0.84, 0.01);
  EXPECT_EQ(r.df, 2);
  EXPECT_EQ(*r.df2, 39);
}

TEST(Anova, TwoGroupsEqualsSquaredPooledT) {
  const GroupSummary a{5.2, 1.3, 12}, b{4.1, 1.9, 9};
  const std::vector<GroupSummary> g = {a, b};
  const double sp2 = ((a.n - 1) * a.sd * a.sd + (b.n - 1) * b.sd * b.sd) / (a.n + b.n - 2);
  const double t = (a.mean - b.mean) / std::sqrt(sp2 * (1.0 / a.n + 1.0 / b.n));
  const auto r = anova_from_summary(g);
  EXPECT_NEAR(r.statistic, t * t, 1e-12);
  EXPECT_NEAR(r.p_value, student_t_two_sided(t, a.n + b.n - 2), 1e-12);
  EXPECT_EQ(code_of([&] { anova_from_summary(std::span(g).first(1)); }),
            ErrorCode::kTooFewGroups);
}

TEST(Power, LimitsAndMonteCarlo) {
  EXPECT_NEAR(chi_square_power(0, 100, 3, 0.05), 0.05, 1e-12);
  EXPECT_NEAR(chi_square_power(0.1, 1000000, 2, 0.05), 1.0, 1e-12);
  struct Case {
    double w;
    long n;
    int df;
  };
  const Case grid[] = {{0.62, 14, 2}, {0.3, 50, 1}, {0.45, 42, 4}, {0.2, 120, 3}, {0.1, 30, 2}};
  std::uint64_t seed = 100;
  for (const auto& c : grid) {
    const double crit = chi_square_quantile(0.95, c.df);
    const double mc = fixture::monte_carlo_power(c.w, c.n, c.df, crit, 1000000, ++seed);
    EXPECT_NEAR(chi_square_power(c.w, c.n, c.df, 0.05), mc, 0.01)
        << "w=" << c.w << " n=" << c.n << " df=" << c.df;
  }
  EXPECT_THROW(chi_square_power(0.3, 10, 0, 0.05), Error);
  EXPECT_THROW(chi_square_power(0.3, 10, 2, 1.5), Error);
}
