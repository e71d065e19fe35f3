#pragma once

#include <Eigen/Dense>

namespace plaus {

// Observed data for one inference problem.  Rows are independent units.
// `design` carries fixed covariates (held constant when resampling) and
// `constants` carries per-unit known quantities: trial counts for count
// models, known standard deviations for the random-effects model.
struct Dataset {
  Eigen::MatrixXd obs;        // n x d observation matrix
  Eigen::MatrixXd design;     // n x p fixed design, or 0 x 0
  Eigen::VectorXd constants;  // length n, or empty

  Eigen::Index n() const { return obs.rows(); }
  Eigen::Index dim() const { return obs.cols(); }
  bool has_design() const { return design.size() > 0; }
  bool has_constants() const { return constants.size() > 0; }
};

// Convenience constructor for a univariate sample.
Dataset make_dataset(const Eigen::VectorXd& y);
Dataset make_dataset(std::initializer_list<double> y);

}  // namespace plaus
