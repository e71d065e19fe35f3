#pragma once

#include <Eigen/Dense>
#include <optional>

#include "plaus/errors.hpp"
#include "plaus/model.hpp"

namespace plaus {

struct FitResult {
  Eigen::VectorXd argmax;
  double logmax = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;  // simplex spread or bracket width at stop
};

// Raised when the maximizer fails after its restart budget; carries the
// best point seen so callers can decide whether it is usable.
class FitError : public NumericError {
 public:
  FitError(const std::string& msg, FitResult best)
      : NumericError(msg), best_so_far(std::move(best)) {}
  FitResult best_so_far;
};

// Maximum likelihood fit.  Uses the catalog closed form when available,
// otherwise derivative-free search from init (or the model's init guess).
FitResult mle(const ModelSpec& model, const Dataset& y,
              const std::optional<Eigen::VectorXd>& init = std::nullopt);

// Relative likelihood L(theta)/L(theta_hat), clamped to [0,1]; zero outside
// the parameter space.  `fit` must be the MLE result for (model, y).
double relative_likelihood(const ModelSpec& model, const Dataset& y,
                           const Eigen::VectorXd& theta, const FitResult& fit);

// Conditional fit of the nuisance with the interest value held fixed;
// argmax is lambda_hat_psi and logmax the profile log-likelihood at psi.
FitResult profile_fit(const MarginalModelSpec& model, const Dataset& y, double psi);

// Global fit over (psi, lambda); argmax is the joined full vector.
FitResult marginal_mle(const MarginalModelSpec& model, const Dataset& y);

// Relative profile likelihood in [0,1]; equals 1 at psi = psi_hat.
double relative_profile_likelihood(const MarginalModelSpec& model, const Dataset& y,
                                   double psi);
// Variant reusing a precomputed global profile maximum (hot loops).
double relative_profile_likelihood(const MarginalModelSpec& model, const Dataset& y,
                                   double psi, double global_logmax);

}  // namespace plaus
