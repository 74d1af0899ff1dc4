#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mhxai/special_functions.hpp"

namespace mhxai::stats {

struct TestResult {
  double statistic = 0;
  double df = 0;
  std::optional<double> df2;  // second degrees of freedom (F tests)
  double p_value = 1;
};

using CountMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;

struct ContingencyTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  CountMatrix counts;

  /// At least 2x2, labels matching the shape, all counts >= 0.
  void validate() const;
};

struct GroupSummary {
  double mean = 0;
  double sd = 0;  // sample standard deviation (n - 1 denominator)
  long n = 0;
};

/// Rank correlation with average ranks for ties. p is two-sided: exact over
/// all permutations for n <= 10, t approximation with n - 2 df above that.
/// Throws kLengthMismatch, kConstantInput, or kInvalidArgument for n < 3.
TestResult spearman(std::span<const double> xs, std::span<const double> ys);

/// 1-based average ranks.
std::vector<double> average_ranks(std::span<const double> v);

/// Pearson statistic with df = (r-1)(c-1). Throws kZeroExpectedCount when a
/// row or column total is zero.
TestResult chi_square_independence(const ContingencyTable& t);
/// df = k - 1. Throws kLengthMismatch, kZeroExpectedCount.
TestResult chi_square_gof(std::span<const double> observed, std::span<const double> expected);

/// sqrt(chi2 / n).
double cohens_w(double chi2, long n);

/// One-way ANOVA from group summaries only; df = (k - 1, N - k).
/// Throws kTooFewGroups for fewer than two groups.
TestResult anova_from_summary(std::span<const GroupSummary> groups);

/// Power of the chi-square test at level alpha against noncentrality n * w^2.
double chi_square_power(double w, long n, int df, double alpha);

}  // namespace mhxai::stats
