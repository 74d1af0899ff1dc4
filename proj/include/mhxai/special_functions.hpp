#pragma once

// p-value engines over Boost.Math. All functions throw kDomainError outside
// their domain instead of Boost's exceptions.

namespace mhxai::stats {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);
/// Upper complement Q(a, x) = 1 - P(a, x), computed without cancellation.
double gamma_q(double a, double x);

/// Regularized incomplete beta I_x(a, b), a, b > 0, 0 <= x <= 1.
double beta_i(double x, double a, double b);

double chi_square_cdf(double x, double df);
double chi_square_sf(double x, double df);
/// Inverse of chi_square_cdf for 0 < p < 1.
double chi_square_quantile(double p, double df);

/// Upper tail of F(d1, d2).
double f_sf(double f, double d1, double d2);
/// Two-sided tail P(|T| >= |t|) of Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);

/// Noncentral chi-square CDF with noncentrality lambda >= 0.
double noncentral_chi_square_cdf(double x, double df, double lambda);

}  // namespace mhxai::stats
