#pragma once

#include <vector>

namespace plaus {

// Standard normal distribution function.
double norm_cdf(double x);

// Standard normal quantile; p in (0,1).
double norm_quantile(double p);

// log of the binomial coefficient C(n, k) for real-valued arguments.
double log_choose(double n, double k);

// Regularized incomplete beta function I_x(a, b).
double reg_inc_beta(double a, double b, double x);

// Student-t distribution function and quantile with df degrees of freedom.
double t_cdf(double t, double df);
double t_quantile(double p, double df);

// Chi-square quantiles for the two small cases needed here.
double chi2_quantile_df1(double p);
double chi2_quantile_df2(double p);

// Complementary CDF of the Kolmogorov distribution, Q(x) = P(K > x).
double kolmogorov_Q(double x);

// One-sample Kolmogorov-Smirnov p-value against a fixed continuous CDF,
// with the small-sample scaling (sqrt(n) + 0.12 + 0.11/sqrt(n)) * D.
double ks_uniform_pvalue(double d, long n);

// Sup distance between two empirical CDFs (inputs must be sorted).
double ks_two_sample_sorted(const std::vector<double>& a, const std::vector<double>& b);

// One-sample KS statistic of a sample against Uniform(0,1).
double ks_uniform_statistic(std::vector<double> sample);

}  // namespace plaus
