#include "mhxai/special_functions.hpp"

#include <cmath>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mhxai/error.hpp"

namespace mhxai::stats {

namespace {

[[noreturn]] void domain(const std::string& what) { throw Error(ErrorCode::kDomainError, what); }

void check_df(double df) {
  if (!(df > 0) || !std::isfinite(df)) domain("chi-square needs df > 0");
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0) || !std::isfinite(a)) domain("incomplete gamma needs a > 0");
  if (!(x >= 0) || std::isnan(x)) domain("incomplete gamma needs x >= 0");
  return std::isinf(x) ? 1.0 : boost::math::gamma_p(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0) || !std::isfinite(a)) domain("incomplete gamma needs a > 0");
  if (!(x >= 0) || std::isnan(x)) domain("incomplete gamma needs x >= 0");
  return std::isinf(x) ? 0.0 : boost::math::gamma_q(a, x);
}

double beta_i(double x, double a, double b) {
  if (!(a > 0) || !(b > 0) || !std::isfinite(a) || !std::isfinite(b)) {
    domain("incomplete beta needs a, b > 0");
  }
  if (!(x >= 0 && x <= 1)) domain("incomplete beta needs 0 <= x <= 1");
  return boost::math::ibeta(a, b, x);
}

double chi_square_cdf(double x, double df) {
  check_df(df);
  if (std::isnan(x)) domain("chi-square statistic is NaN");
  return x <= 0 ? 0.0 : gamma_p(df / 2.0, x / 2.0);
}

double chi_square_sf(double x, double df) {
  check_df(df);
  if (std::isnan(x)) domain("chi-square statistic is NaN");
  return x <= 0 ? 1.0 : gamma_q(df / 2.0, x / 2.0);
}

double chi_square_quantile(double p, double df) {
  if (!(p > 0 && p < 1)) domain("quantile needs 0 < p < 1");
  check_df(df);
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(df), p);
}

double f_sf(double f, double d1, double d2) {
  if (!(d1 > 0) || !(d2 > 0)) domain("F distribution needs positive degrees of freedom");
  if (std::isnan(f)) domain("F statistic is NaN");
  if (f <= 0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return beta_i(d2 / (d2 + d1 * f), d2 / 2.0, d1 / 2.0);
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0)) domain("t distribution needs df > 0");
  if (std::isnan(t)) domain("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  return beta_i(df / (df + t * t), df / 2.0, 0.5);
}

double noncentral_chi_square_cdf(double x, double df, double lambda) {
  check_df(df);
  if (!(lambda >= 0) || !std::isfinite(lambda)) domain("noncentrality must be >= 0");
  if (std::isnan(x)) domain("chi-square statistic is NaN");
  if (x <= 0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (lambda == 0) return chi_square_cdf(x, df);
  return boost::math::cdf(boost::math::non_central_chi_squared_distribution<double>(df, lambda), x);
}

}  // namespace mhxai::stats
