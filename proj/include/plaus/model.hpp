#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "plaus/dataset.hpp"
#include "plaus/rng.hpp"

namespace plaus {

// Parameter space: box bounds (entries may be +-infinity) plus an optional
// extra constraint predicate.
struct ParamSpace {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::function<bool(const Eigen::VectorXd&)> constraint;  // may be empty

  int dims() const { return static_cast<int>(lower.size()); }
  bool contains(const Eigen::VectorXd& theta) const;
};

ParamSpace make_space(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);
ParamSpace make_space_1d(double lower, double upper);

// One support point of a discrete statistic: its value and probability mass.
struct DiscretePoint {
  double t;
  double pmf;
};

// Optional per-model shortcuts.  Anything left empty falls back to the
// generic numeric route.
struct ClosedForms {
  // Exact maximizer of the log-likelihood.
  std::function<Eigen::VectorXd(const Dataset&)> mle;
  // Closed-form F_theta evaluated at the observed statistic.
  std::function<double(const Dataset&, const Eigen::VectorXd&)> exact_plaus;
  // Full support of the statistic's sampling distribution at theta, for
  // exact enumeration (finite or truncated-to-negligible-mass support).
  std::function<std::vector<DiscretePoint>(const Dataset&, const Eigen::VectorXd&)>
      discrete_support;
  // Direct draw of the statistic under theta for one replicate of size n;
  // faster than simulating whole datasets when a sufficient statistic exists.
  std::function<double(const Eigen::VectorXd& theta, Eigen::Index n, RngStream&)>
      statistic_sampler;
};

// A parametric model: parameter space, log-likelihood and sampler.
// Instances are immutable after construction; all state flows through
// arguments, so they are safe to share across threads.
struct ModelSpec {
  std::string name;
  ParamSpace space;
  // Extended-real log-likelihood: -inf outside the space or off the support.
  std::function<double(const Dataset&, const Eigen::VectorXd&)> loglik;
  // Draws n fresh units from P_theta.  `proto` supplies the fixed parts
  // (design matrix, known constants, trial counts) that resampling keeps.
  std::function<Dataset(const Eigen::VectorXd& theta, Eigen::Index n,
                        const Dataset& proto, RngStream&)>
      sampler;
  // Starting point for the numeric maximizer.
  std::function<Eigen::VectorXd(const Dataset&)> init_guess;
  ClosedForms closed;
  // Jitter scale for optimizer restarts (unconstrained coordinates).
  double restart_scale = 1.0;
};

// Validated entry points (dimension checks, then dispatch).
double loglik(const ModelSpec& model, const Dataset& y, const Eigen::VectorXd& theta);
Dataset simulate(const ModelSpec& model, const Eigen::VectorXd& theta, Eigen::Index n,
                 const Dataset& proto, RngStream& stream);

// How the nuisance value used in the simulation step is chosen.
enum class Lambda0Policy {
  kGlobalMle,  // plug in the nuisance component of the global MLE
  kFixed,      // use a fixed, model-supplied value
};

// Marginal (interest/nuisance) problem.  Convention: the full parameter
// vector of `base` is [psi; lambda] with the scalar interest first, so the
// split and its inverse are plain concatenation.
struct MarginalModelSpec {
  ModelSpec base;
  double psi_lower;
  double psi_upper;
  Lambda0Policy lambda0_policy = Lambda0Policy::kGlobalMle;
  Eigen::VectorXd lambda0_fixed;  // used when policy == kFixed

  struct Closed {
    std::function<double(const Dataset&)> psi_mle;
    std::function<Eigen::VectorXd(const Dataset&, double)> profile_lambda;
    // Relative profile likelihood evaluated directly.
    std::function<double(const Dataset&, double)> statistic;
    // Closed-form marginal plausibility at psi.
    std::function<double(const Dataset&, double)> exact_plaus;
  } closed;

  const std::string& name() const { return base.name; }
  int lambda_dims() const { return base.space.dims() - 1; }
  Eigen::VectorXd join(double psi, const Eigen::VectorXd& lambda) const;
};

}  // namespace plaus
