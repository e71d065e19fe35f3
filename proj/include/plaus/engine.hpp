#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "plaus/likelihood.hpp"
#include "plaus/model.hpp"

namespace plaus {

struct McConfig {
  int M = 50000;
  std::uint64_t base_seed = 20260809;
  int workers = 0;  // 0 = all hardware threads
  bool common_random_numbers = true;
};

enum class EvalMethod { kAuto, kMonteCarlo, kExactEnumeration, kClosedForm };

const char* method_name(EvalMethod m);

struct PlausResult {
  double estimate = 0.0;
  double mc_stderr = 0.0;  // 0 for exact / closed-form evaluation
  EvalMethod method = EvalMethod::kMonteCarlo;
  int M_used = 0;
  int fallbacks = 0;  // replicates that took the conservative T = 1 path
};

struct RegionResult {
  double alpha = 0.0;
  std::vector<std::pair<double, double>> intervals;
  double endpoint_tol = 0.0;
  int grid_points = 0;
  bool contains_mle = false;
  bool whole_space = false;
  EvalMethod method = EvalMethod::kMonteCarlo;
};

struct RegionOptions {
  int grid_points = 512;
  double span_mult = 1.5;  // multiplier on the Wald-type half width
  EvalMethod method = EvalMethod::kAuto;
};

// Assertion sets for tests and set-plausibility: a box, a finite set of
// points, or a predicate restricted to a box.
struct SetDescriptor {
  enum class Kind { kBox, kFiniteSet, kPredicateBox };
  Kind kind = Kind::kBox;
  Eigen::VectorXd lo, hi;
  std::vector<Eigen::VectorXd> points;
  std::function<bool(const Eigen::VectorXd&)> predicate;

  static SetDescriptor box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
  static SetDescriptor box1d(double lo, double hi);
  static SetDescriptor finite(std::vector<Eigen::VectorXd> pts);
  static SetDescriptor finite1d(const std::vector<double>& pts);
  static SetDescriptor predicate_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                     std::function<bool(const Eigen::VectorXd&)> pred);
};

struct TestDecision {
  bool reject = false;
  double alpha = 0.0;
  PlausResult plausibility;
};

struct PivotPair {
  int i = 0, j = 0;
  double ks = 0.0;
  std::vector<double> quantile_gaps;
};

struct PivotalityReport {
  double max_discrepancy = 0.0;
  std::vector<PivotPair> pairs;
  EvalMethod method = EvalMethod::kMonteCarlo;
  double mc_bound = 0.0;  // 3 * 1.36 / sqrt(M)
  std::vector<double> q_grid;
};

// --- point plausibility ----------------------------------------------------

// Monte Carlo estimate of F_theta at the observed statistic.
PlausResult plaus_mc(const ModelSpec& model, const Dataset& y,
                     const Eigen::VectorXd& theta, const McConfig& cfg);
PlausResult plaus_mc(const MarginalModelSpec& model, const Dataset& y, double psi,
                     const McConfig& cfg);
// Marginal variant simulating at (psi, lambda0); identical to the overload.
PlausResult marginal_plaus_mc(const MarginalModelSpec& model, const Dataset& y,
                              double psi, const McConfig& cfg);

// Exact enumeration over a finite (or tail-truncated) statistic support.
PlausResult plaus_exact_discrete(const ModelSpec& model, const Dataset& y,
                                 const Eigen::VectorXd& theta);
PlausResult plaus_exact_discrete(const MarginalModelSpec& model, const Dataset& y,
                                 double psi);

// Dispatcher: closed form, then exact enumeration, then Monte Carlo.
PlausResult plaus_point(const ModelSpec& model, const Dataset& y,
                        const Eigen::VectorXd& theta, const McConfig& cfg,
                        EvalMethod method = EvalMethod::kAuto);
PlausResult plaus_point(const MarginalModelSpec& model, const Dataset& y, double psi,
                        const McConfig& cfg, EvalMethod method = EvalMethod::kAuto);

// --- curves, sets, tests, regions -------------------------------------------

// Plausibility on a grid of scalar targets; replicate streams are shared
// across the grid when cfg.common_random_numbers is set.  Grid points outside
// the parameter space get plausibility zero.
std::vector<PlausResult> plaus_curve(const ModelSpec& model, const Dataset& y,
                                     const std::vector<double>& grid,
                                     const McConfig& cfg,
                                     EvalMethod method = EvalMethod::kAuto);
std::vector<PlausResult> plaus_curve(const MarginalModelSpec& model, const Dataset& y,
                                     const std::vector<double>& grid,
                                     const McConfig& cfg,
                                     EvalMethod method = EvalMethod::kAuto);

// sup over the set of the pointwise plausibility.
PlausResult plaus_set(const ModelSpec& model, const Dataset& y, const SetDescriptor& A,
                      const McConfig& cfg);
TestDecision plaus_test(const ModelSpec& model, const Dataset& y, const SetDescriptor& A,
                        double alpha, const McConfig& cfg);

RegionResult plaus_region(const ModelSpec& model, const Dataset& y, double alpha,
                          const McConfig& cfg, const RegionOptions& opts = {});
RegionResult plaus_region(const MarginalModelSpec& model, const Dataset& y, double alpha,
                          const McConfig& cfg, const RegionOptions& opts = {});

// --- pivotality diagnostic ---------------------------------------------------

// Compares the statistic's sampling distribution across parameter points.
// `proto` supplies sample size and fixed structure.  Monte Carlo sampling uses
// independent streams per grid point so the two-sample KS bound applies.
PivotalityReport pivotality_check(const ModelSpec& model, const Dataset& proto,
                                  const std::vector<Eigen::VectorXd>& theta_grid,
                                  const McConfig& cfg,
                                  const std::vector<double>& q_grid);
PivotalityReport pivotality_check(const MarginalModelSpec& model, const Dataset& proto,
                                  const std::vector<Eigen::VectorXd>& theta_grid,
                                  const McConfig& cfg,
                                  const std::vector<double>& q_grid);

}  // namespace plaus
