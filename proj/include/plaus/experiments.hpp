#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "plaus/catalog.hpp"
#include "plaus/engine.hpp"

namespace plaus {

struct StudySpec {
  std::string study_id;
  std::string model_id;
  std::vector<Eigen::VectorXd> truths;  // full parameter vectors
  std::string psi_rule;                 // "" or "inv-sqrt-n"
  std::vector<int> sample_sizes;
  int replicates = 1000;
  double alpha = 0.05;
  std::vector<std::string> methods;
  McConfig mc;
  int bootstrap_B = 5000;
  bool lengths = true;
  int length_M = 0;  // 0: use mc.M for region solving too
  int region_grid_points = 17;
  double region_span = 4.0;
  std::string output;  // CSV path; empty = no file
};

StudySpec load_study_spec(const std::string& json_path);
StudySpec parse_study_spec(const std::string& json_text);

struct CoverageRow {
  std::string method;
  double truth = 0.0;  // target (interest) component of the truth
  int n = 0;
  double coverage = 0.0;
  double mean_length = 0.0;
  double mc_stderr = 0.0;  // sqrt(cov*(1-cov)/replicates)
  int replicates = 0;
};

// Simulates R datasets per (method, truth, n) cell, records hit/length.
// Methods run on identical datasets; rows come back sorted by
// (method, truth, n).  Writes spec.output incrementally when set.
std::vector<CoverageRow> run_coverage(const StudySpec& spec);

void write_coverage_csv(const std::string& path, const StudySpec& spec,
                        const std::vector<CoverageRow>& rows, int precision = 6);

// Exact binomial results on a theta grid: coverage and expected length of the
// plausibility and Clopper-Pearson intervals, by pmf summation (no Monte Carlo).
struct BinomialSweepRow {
  double theta = 0.0;
  double coverage_pl = 0.0;
  double coverage_cp = 0.0;
  double exp_length_pl = 0.0;
  double exp_length_cp = 0.0;
};

std::vector<BinomialSweepRow> coverage_sweep_binomial(int n, double alpha,
                                                      const std::vector<double>& theta_grid);

// Plausibility curve table for CSV export.
struct CurveTable {
  std::vector<double> theta;
  std::vector<double> pl;
  std::vector<double> stderr_;
  EvalMethod method = EvalMethod::kAuto;
};

CurveTable export_curve(const AnyModel& model, const Dataset& y,
                        const std::vector<double>& grid, const McConfig& cfg,
                        EvalMethod method = EvalMethod::kAuto);

void write_curve_csv(const std::string& path, const CurveTable& table,
                     const McConfig& cfg, int precision = 6);

// 2-D plausibility surface with the alpha level set and a Wald ellipse.
struct ContourResult {
  std::vector<double> grid1, grid2;
  Eigen::MatrixXd pl;  // grid1.size() x grid2.size()
  std::vector<std::vector<std::pair<double, double>>> level_set;  // polylines
  std::vector<std::pair<double, double>> wald_ellipse;
  Eigen::VectorXd mle_point;
  double alpha = 0.0;
};

ContourResult export_contour(const ModelSpec& model, const Dataset& y, double alpha,
                             const std::vector<double>& grid1,
                             const std::vector<double>& grid2, const McConfig& cfg);

void write_contour_csv(const std::string& path, const ContourResult& result,
                       const McConfig& cfg, int precision = 6);

// Sampling distribution of the profile statistic across nuisance values at a
// fixed interest value: per-lambda sorted samples plus the largest pairwise
// Kolmogorov distance.
struct SensitivityResult {
  double psi = 0.0;
  std::vector<double> lambdas;
  std::vector<std::vector<double>> sorted_T;  // one sorted sample per lambda
  double max_pairwise_ks = 0.0;
};

SensitivityResult lambda0_sensitivity(const MarginalModelSpec& model, double psi,
                                      const std::vector<double>& lambda_grid, int n,
                                      const McConfig& cfg);

void write_sensitivity_csv(const std::string& path, const SensitivityResult& result,
                           const McConfig& cfg, int quantile_points = 512,
                           int precision = 6);

}  // namespace plaus
