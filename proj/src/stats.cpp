#include "mhxai/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mhxai/error.hpp"

namespace mhxai::stats {

namespace {

constexpr int kExactSpearmanMax = 10;

double pearson(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

bool constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

// Two-sided exact p: share of all n! pairings whose |r| reaches the observed one.
double exact_spearman_p(const std::vector<double>& rx, std::vector<double> ry, double r) {
  std::vector<std::size_t> perm(ry.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> shuffled(ry.size());
  long hits = 0, total = 0;
  const double threshold = std::abs(r) - 1e-12;
  do {
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = ry[perm[i]];
    if (std::abs(pearson(rx, shuffled)) >= threshold) ++hits;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

void ContingencyTable::validate() const {
  if (counts.rows() < 2 || counts.cols() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "contingency table needs at least 2x2 cells");
  }
  if ((!row_labels.empty() && static_cast<Eigen::Index>(row_labels.size()) != counts.rows()) ||
      (!col_labels.empty() && static_cast<Eigen::Index>(col_labels.size()) != counts.cols())) {
    throw Error(ErrorCode::kInvalidArgument, "contingency labels do not match the table shape");
  }
  if ((counts.array() < 0).any()) {
    throw Error(ErrorCode::kInvalidArgument, "contingency counts must be non-negative");
  }
}

std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
    i = j + 1;
  }
  return rank;
}

TestResult spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::kLengthMismatch, "spearman inputs differ in length (" +
                                                std::to_string(xs.size()) + " vs " +
                                                std::to_string(ys.size()) + ")");
  }
  if (xs.size() < 3) throw Error(ErrorCode::kInvalidArgument, "spearman needs at least 3 pairs");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw Error(ErrorCode::kInvalidArgument, "spearman inputs must be finite");
    }
  }
  if (constant(xs) || constant(ys)) {
    throw Error(ErrorCode::kConstantInput, "rank correlation is undefined for a constant input");
  }
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double r = std::clamp(pearson(rx, ry), -1.0, 1.0);
  const auto n = static_cast<double>(xs.size());

  TestResult out;
  out.statistic = r;
  out.df = n - 2;
  if (xs.size() <= kExactSpearmanMax) {
    out.p_value = exact_spearman_p(rx, ry, r);
  } else if (std::abs(r) >= 1.0) {
    out.p_value = 0.0;
  } else {
    const double t = r * std::sqrt((n - 2) / (1 - r * r));
    out.p_value = student_t_two_sided(t, n - 2);
  }
  return out;
}

TestResult chi_square_independence(const ContingencyTable& t) {
  t.validate();
  const Eigen::ArrayXXd c = t.counts.cast<double>().array();
  const Eigen::ArrayXd rows = c.rowwise().sum();
  const Eigen::ArrayXd cols = c.colwise().sum().transpose();
  const double total = c.sum();
  if ((rows == 0).any() || (cols == 0).any()) {
    throw Error(ErrorCode::kZeroExpectedCount,
                "a row or column total is zero, so some expected counts are zero");
  }
  double stat = 0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      const double e = rows[i] * cols[j] / total;
      stat += (c(i, j) - e) * (c(i, j) - e) / e;
    }
  }
  TestResult out;
  out.statistic = stat;
  out.df = static_cast<double>((c.rows() - 1) * (c.cols() - 1));
  out.p_value = chi_square_sf(stat, out.df);
  return out;
}

TestResult chi_square_gof(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size()) {
    throw Error(ErrorCode::kLengthMismatch, "observed and expected differ in length");
  }
  if (observed.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 categories");
  double stat = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0)) {
      throw Error(ErrorCode::kZeroExpectedCount,
                  "expected count in category " + std::to_string(i) + " is not positive");
    }
    if (!(observed[i] >= 0)) throw Error(ErrorCode::kInvalidArgument, "observed counts must be >= 0");
    stat += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
  }
  TestResult out;
  out.statistic = stat;
  out.df = static_cast<double>(observed.size() - 1);
  out.p_value = chi_square_sf(stat, out.df);
  return out;
}

double cohens_w(double chi2, long n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "cohens_w needs n >= 1");
  if (!(chi2 >= 0)) throw Error(ErrorCode::kInvalidArgument, "cohens_w needs chi2 >= 0");
  return std::sqrt(chi2 / static_cast<double>(n));
}

TestResult anova_from_summary(std::span<const GroupSummary> groups) {
  if (groups.size() < 2) throw Error(ErrorCode::kTooFewGroups, "ANOVA needs at least 2 groups");
  double total_n = 0, weighted_sum = 0;
  for (const auto& g : groups) {
    if (g.n < 2) throw Error(ErrorCode::kInvalidArgument, "each group needs n >= 2");
    if (!(g.sd >= 0)) throw Error(ErrorCode::kInvalidArgument, "group sd must be >= 0");
    total_n += static_cast<double>(g.n);
    weighted_sum += static_cast<double>(g.n) * g.mean;
  }
  const double grand = weighted_sum / total_n;
  double between = 0, within = 0;
  for (const auto& g : groups) {
    between += static_cast<double>(g.n) * (g.mean - grand) * (g.mean - grand);
    within += static_cast<double>(g.n - 1) * g.sd * g.sd;
  }
  const double k = static_cast<double>(groups.size());
  TestResult out;
  out.df = k - 1;
  out.df2 = total_n - k;
  if (within == 0) {
    out.statistic = between == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    out.p_value = between == 0 ? 1.0 : 0.0;
    return out;
  }
  out.statistic = (between / out.df) / (within / *out.df2);
  out.p_value = f_sf(out.statistic, out.df, *out.df2);
  return out;
}

double chi_square_power(double w, long n, int df, double alpha) {
  if (!(alpha > 0 && alpha < 1)) throw Error(ErrorCode::kInvalidArgument, "alpha must be in (0,1)");
  if (!(w >= 0) || n < 1 || df < 1) {
    throw Error(ErrorCode::kInvalidArgument, "power needs w >= 0, n >= 1, df >= 1");
  }
  const double critical = chi_square_quantile(1.0 - alpha, df);
  const double lambda = static_cast<double>(n) * w * w;
  return std::clamp(1.0 - noncentral_chi_square_cdf(critical, df, lambda), 0.0, 1.0);
}

}  // namespace mhxai::stats
