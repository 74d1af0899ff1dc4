#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "mhxai/error.hpp"
#include "mhxai/special_functions.hpp"
#include "support.hpp"

using namespace mhxai::stats;

TEST(SpecialFunctions, MatchArbitraryPrecisionReferenceTable) {
  std::ifstream in(mhxai::fixture::source_path("tests/reference/special_functions.tsv"));
  ASSERT_TRUE(in) << "reference table missing";
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string name;
    row >> name;
    std::vector<double> v;
    for (double d; row >> d;) v.push_back(d);
    const double want = v.back();
    double got = 0;
    if (name == "gamma_p") got = gamma_p(v[0], v[1]);
    else if (name == "gamma_q") got = gamma_q(v[0], v[1]);
    else if (name == "beta_i") got = beta_i(v[0], v[1], v[2]);
    else if (name == "chi_square_sf") got = chi_square_sf(v[0], v[1]);
    else if (name == "f_sf") got = f_sf(v[0], v[1], v[2]);
    else if (name == "student_t_two_sided") got = student_t_two_sided(v[0], v[1]);
    else if (name == "noncentral_chi_square_cdf") got = noncentral_chi_square_cdf(v[0], v[1], v[2]);
    else FAIL() << "unknown function " << name;
    EXPECT_LE(std::abs(got - want), 1e-11 * std::abs(want) + 1e-300) << line << " got " << got;
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

TEST(SpecialFunctions, ClosedForms) {
  for (double x : {0.0, 0.1, 1.0, 3.7, 20.0}) {
    EXPECT_NEAR(chi_square_cdf(x, 2), 1 - std::exp(-x / 2), 1e-15) << x;
  }
  for (double a : {0.3, 1.0, 4.0, 25.0}) EXPECT_NEAR(beta_i(0.5, a, a), 0.5, 1e-14) << a;
  EXPECT_NEAR(gamma_p(1, 2) + gamma_q(1, 2), 1.0, 1e-15);
  EXPECT_EQ(beta_i(0, 2, 3), 0.0);
  EXPECT_EQ(beta_i(1, 2, 3), 1.0);
  EXPECT_EQ(noncentral_chi_square_cdf(4, 3, 0), chi_square_cdf(4, 3));
}

TEST(SpecialFunctions, QuantileInvertsCdf) {
  EXPECT_NEAR(chi_square_quantile(0.95, 1), 3.841458820694124, 1e-10);
  EXPECT_NEAR(chi_square_quantile(0.95, 2), 5.991464547107979, 1e-10);
  EXPECT_NEAR(chi_square_quantile(0.95, 4), 9.487729036781154, 1e-10);
  for (double p : {0.01, 0.5, 0.99}) {
    for (double df : {1.0, 3.0, 10.0}) {
      EXPECT_NEAR(chi_square_cdf(chi_square_quantile(p, df), df), p, 1e-12);
    }
  }
}

TEST(SpecialFunctions, DomainErrors) {
  EXPECT_THROW(gamma_p(0, 1), mhxai::Error);
  EXPECT_THROW(gamma_p(1, -1), mhxai::Error);
  EXPECT_THROW(beta_i(1.5, 1, 1), mhxai::Error);
  EXPECT_THROW(chi_square_quantile(1.0, 2), mhxai::Error);
  EXPECT_THROW(f_sf(1, 0, 3), mhxai::Error);
  EXPECT_THROW(noncentral_chi_square_cdf(1, 2, -1), mhxai::Error);
}
