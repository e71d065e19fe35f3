#include "plaus/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plaus/optimize.hpp"

namespace plaus {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

FitResult closed_fit(const ModelSpec& model, const Dataset& y) {
  FitResult fit;
  fit.argmax = model.closed.mle(y);
  fit.logmax = loglik(model, y, fit.argmax);
  fit.converged = true;
  return fit;
}

}  // namespace

FitResult mle(const ModelSpec& model, const Dataset& y,
              const std::optional<Eigen::VectorXd>& init) {
  if (y.n() == 0) throw ArgumentError(model.name + ": empty dataset");
  if (model.closed.mle && !init) return closed_fit(model, y);

  Eigen::VectorXd start;
  if (init) {
    start = *init;
    if (start.size() != model.space.dims())
      throw ArgumentError(model.name + ": init dimension mismatch");
  } else if (model.init_guess) {
    start = model.init_guess(y);
  } else {
    throw ArgumentError(model.name + ": no closed form and no starting point");
  }

  auto obj = [&](const Eigen::VectorXd& th) { return model.loglik(y, th); };
  OptimOptions opts;
  opts.restart_scale = model.restart_scale;
  OptimResult opt = maximize(obj, model.space, start, opts);
  FitResult fit;
  fit.argmax = opt.x;
  fit.logmax = opt.fval;
  fit.iterations = opt.iterations;
  fit.converged = opt.converged;
  fit.residual = opt.residual;
  if (!opt.converged && !std::isfinite(opt.fval))
    throw FitError(model.name + ": maximizer failed to converge", fit);
  return fit;
}

double relative_likelihood(const ModelSpec& model, const Dataset& y,
                           const Eigen::VectorXd& theta, const FitResult& fit) {
  if (theta.size() != model.space.dims())
    throw ArgumentError(model.name + ": parameter dimension mismatch");
  if (!model.space.contains(theta)) return 0.0;
  const double ll = model.loglik(y, theta);
  if (ll == -kInf) return 0.0;
  const double t = std::exp(ll - fit.logmax);
  return std::min(std::max(t, 0.0), 1.0);
}

FitResult profile_fit(const MarginalModelSpec& model, const Dataset& y, double psi) {
  if (!(psi >= model.psi_lower && psi <= model.psi_upper))
    throw DomainError(model.name() + ": interest value outside its range");

  if (model.closed.profile_lambda) {
    FitResult fit;
    fit.argmax = model.closed.profile_lambda(y, psi);
    fit.logmax = loglik(model.base, y, model.join(psi, fit.argmax));
    fit.converged = true;
    return fit;
  }

  const int dl = model.lambda_dims();
  if (dl == 0) {
    // no explicit nuisance; the profile is the likelihood itself
    FitResult fit;
    fit.argmax = Eigen::VectorXd(0);
    Eigen::VectorXd th(1);
    th[0] = psi;
    fit.logmax = loglik(model.base, y, th);
    fit.converged = true;
    return fit;
  }

  ParamSpace lam_space;
  lam_space.lower = model.base.space.lower.tail(dl);
  lam_space.upper = model.base.space.upper.tail(dl);
  auto obj = [&](const Eigen::VectorXd& lam) {
    return loglik(model.base, y, model.join(psi, lam));
  };
  Eigen::VectorXd start;
  if (model.base.init_guess) {
    start = model.base.init_guess(y).tail(dl);
  } else {
    start = Eigen::VectorXd::Zero(dl);
  }
  OptimResult opt = maximize(obj, lam_space, start);
  FitResult fit;
  fit.argmax = opt.x;
  fit.logmax = opt.fval;
  fit.iterations = opt.iterations;
  fit.converged = opt.converged;
  fit.residual = opt.residual;
  if (!std::isfinite(opt.fval))
    throw FitError(model.name() + ": nuisance fit failed at fixed interest", fit);
  return fit;
}

FitResult marginal_mle(const MarginalModelSpec& model, const Dataset& y) {
  if (y.n() == 0) throw ArgumentError(model.name() + ": empty dataset");
  if (model.closed.psi_mle) {
    const double psi_hat = model.closed.psi_mle(y);
    FitResult prof = profile_fit(model, y, psi_hat);
    FitResult fit;
    fit.argmax = model.join(psi_hat, prof.argmax);
    fit.logmax = prof.logmax;
    fit.iterations = prof.iterations;
    fit.converged = prof.converged;
    fit.residual = prof.residual;
    return fit;
  }
  return mle(model.base, y);
}

double relative_profile_likelihood(const MarginalModelSpec& model, const Dataset& y,
                                   double psi) {
  return relative_profile_likelihood(model, y, psi, marginal_mle(model, y).logmax);
}

double relative_profile_likelihood(const MarginalModelSpec& model, const Dataset& y,
                                   double psi, double global_logmax) {
  if (model.closed.statistic) {
    const double t = model.closed.statistic(y, psi);
    return std::min(std::max(t, 0.0), 1.0);
  }
  if (!(psi >= model.psi_lower && psi <= model.psi_upper)) return 0.0;
  const FitResult prof = profile_fit(model, y, psi);
  const double t = std::exp(prof.logmax - global_logmax);
  return std::min(std::max(t, 0.0), 1.0);
}

}  // namespace plaus
