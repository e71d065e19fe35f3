#pragma once

#include <Eigen/Dense>
#include <functional>

#include "plaus/model.hpp"

namespace plaus {

struct OptimOptions {
  double rel_ftol = 1e-9;
  int max_iter = 2000;
  int restarts = 3;            // random restarts after the first run
  double restart_scale = 1.0;  // stddev of the jitter in transformed coords
};

struct OptimResult {
  Eigen::VectorXd x;
  double fval = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;  // simplex spread or bracket width at stop
};

// Maximizes fn over the box/constraint space.  Works in unconstrained
// coordinates via log/logit maps of the box bounds; the constraint predicate
// (if any) is enforced by rejection.  1-D problems use Brent's
// golden-section-with-parabolic-steps; higher dimensions use Nelder-Mead
// with deterministic random restarts.
OptimResult maximize(const std::function<double(const Eigen::VectorXd&)>& fn,
                     const ParamSpace& space, const Eigen::VectorXd& init,
                     const OptimOptions& opts = {});

// Brent minimizer on [lo, hi]; returns argmin.
double brent_min(const std::function<double(double)>& fn, double lo, double hi,
                 double xtol, int max_iter, int* iters_out = nullptr);

// Bisection root of fn on [lo, hi]; requires a sign change.
double bisect_root(const std::function<double(double)>& fn, double lo, double hi,
                   double xtol, int max_iter);

// Coordinate maps between a (possibly half-open) box dimension and R, the
// same log/logit maps the optimizer uses internally.
double to_unconstrained_coord(double x, double lo, double hi);
double to_box_coord(double u, double lo, double hi);

}  // namespace plaus
