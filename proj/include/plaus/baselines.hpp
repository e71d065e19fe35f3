#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plaus/model.hpp"
#include "plaus/rng.hpp"

namespace plaus {

struct IntervalEstimate {
  std::string method;
  double lo = 0.0;
  double hi = 0.0;
  double alpha = 0.0;
};

// MLE +- z * se with the observed information differenced on the
// unconstrained scale and mapped back through the bound transform.
IntervalEstimate wald_interval(const ModelSpec& model, const Dataset& y, double alpha);
// Same construction on the profile log-likelihood of the interest parameter.
IntervalEstimate wald_interval(const MarginalModelSpec& model, const Dataset& y,
                               double alpha);

// Exact binomial interval by inverting the tail equations.
IntervalEstimate clopper_pearson(long n, long y, double alpha);

// Percentile interval of the plug-in estimator over B simulated datasets.
// The estimator is the scalar MLE (full models) or the interest MLE
// (marginal models; the sample correlation for the correlation model).
IntervalEstimate bootstrap_percentile(const ModelSpec& model, const Dataset& y,
                                      double alpha, int B, std::uint64_t seed,
                                      int workers = 0);
IntervalEstimate bootstrap_percentile(const MarginalModelSpec& model, const Dataset& y,
                                      double alpha, int B, std::uint64_t seed,
                                      int workers = 0);

// Correlation intervals on transformed scales.
IntervalEstimate fisher_z_interval(double psi_hat, long n, double alpha);
IntervalEstimate hotelling_z4_interval(double psi_hat, long n, double alpha);

// The z4 point transform (exposed for tests).
double hotelling_z4(double psi, long n);

// Type-7 quantile of a sample (interpolated order statistic).
double quantile_type7(std::vector<double> sorted_or_not, double q);

}  // namespace plaus
