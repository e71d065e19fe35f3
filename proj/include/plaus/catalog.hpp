#pragma once

#include <string>
#include <variant>
#include <vector>

#include "plaus/model.hpp"

namespace plaus {

using AnyModel = std::variant<ModelSpec, MarginalModelSpec>;

// Built-in models.  Full models:
ModelSpec binomial_model();
ModelSpec poisson_model();
ModelSpec lindley_model();
ModelSpec gamma2_model();                      // (shape, scale)
ModelSpec probit_model(int covariates = 1);    // theta = (intercept, slopes...)
ModelSpec norm_mean_model(double sigma = 1.0); // known-variance Gaussian mean
ModelSpec norm2_model();                       // (mean, variance)

// Interest/nuisance models (interest component first):
MarginalModelSpec t_mean_model();              // Gaussian mean, variance unknown
MarginalModelSpec np_quantile_model(double p = 0.5);
MarginalModelSpec corr_model();                // bivariate normal correlation
MarginalModelSpec gamma_mean_model();          // gamma (mean, shape), lambda0 = 1
MarginalModelSpec ranef_model();               // N(lambda, sigma_i^2 + psi^2)

// Every entry, keyed by the identifiers accepted on the command line.
std::vector<AnyModel> builtin_catalog();
AnyModel find_model(const std::string& id);
std::vector<std::string> catalog_ids();

const std::string& model_name(const AnyModel& m);
bool is_marginal(const AnyModel& m);

}  // namespace plaus
