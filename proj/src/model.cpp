#include "plaus/model.hpp"

#include <limits>

#include "plaus/errors.hpp"

namespace plaus {

bool ParamSpace::contains(const Eigen::VectorXd& theta) const {
  if (theta.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!(theta[i] >= lower[i] && theta[i] <= upper[i])) return false;
  }
  return !constraint || constraint(theta);
}

ParamSpace make_space(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (lower.size() != upper.size())
    throw ArgumentError("make_space: bound vectors differ in length");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i]))
      throw ArgumentError("make_space: need lower < upper in every dimension");
  }
  return ParamSpace{lower, upper, nullptr};
}

ParamSpace make_space_1d(double lower, double upper) {
  Eigen::VectorXd lo(1), hi(1);
  lo[0] = lower;
  hi[0] = upper;
  return make_space(lo, hi);
}

Dataset make_dataset(const Eigen::VectorXd& y) {
  Dataset d;
  d.obs = y;
  return d;
}

Dataset make_dataset(std::initializer_list<double> y) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
  Eigen::Index i = 0;
  for (double x : y) v[i++] = x;
  return make_dataset(v);
}

double loglik(const ModelSpec& model, const Dataset& y, const Eigen::VectorXd& theta) {
  if (theta.size() != model.space.dims())
    throw ArgumentError(model.name + ": parameter has dimension " +
                        std::to_string(theta.size()) + ", expected " +
                        std::to_string(model.space.dims()));
  if (!model.space.contains(theta)) return -std::numeric_limits<double>::infinity();
  return model.loglik(y, theta);
}

Dataset simulate(const ModelSpec& model, const Eigen::VectorXd& theta, Eigen::Index n,
                 const Dataset& proto, RngStream& stream) {
  if (theta.size() != model.space.dims())
    throw ArgumentError(model.name + ": parameter dimension mismatch in simulate");
  if (!model.space.contains(theta))
    throw DomainError(model.name + ": cannot simulate outside the parameter space");
  if (n <= 0) throw ArgumentError("simulate: sample size must be positive");
  return model.sampler(theta, n, proto, stream);
}

Eigen::VectorXd MarginalModelSpec::join(double psi, const Eigen::VectorXd& lambda) const {
  Eigen::VectorXd theta(lambda.size() + 1);
  theta[0] = psi;
  theta.tail(lambda.size()) = lambda;
  return theta;
}

}  // namespace plaus
