#include "plaus/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "plaus/baselines.hpp"
#include "plaus/special.hpp"
#include "plaus/util.hpp"

namespace plaus {

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, x);
  return buf;
}

void write_meta(std::ofstream& out, const McConfig& cfg) {
  out << "# plaus " << kVersion << "\n";
  out << "# seed=" << cfg.base_seed << " M=" << cfg.M << " workers=" << cfg.workers
      << " crn=" << (cfg.common_random_numbers ? 1 : 0) << "\n";
}

std::uint64_t cell_seed(std::uint64_t base, std::uint64_t cell, std::uint64_t r) {
  return mix64(mix64(base + 0x9E3779B97F4A7C15ULL * (cell + 1)) ^
               (0xBF58476D1CE4E5B9ULL * (r + 1)));
}

double region_total_length(const RegionResult& reg) {
  double total = 0.0;
  for (const auto& iv : reg.intervals) total += iv.second - iv.first;
  return total;
}

struct RepOutcome {
  signed char hit = -1;  // -1: failed
  double length = kNaN;
};

// One method applied to one replicate dataset.
RepOutcome apply_method(const std::string& method, const AnyModel& model,
                        const Dataset& y, const Eigen::VectorXd& truth,
                        const StudySpec& spec, std::uint64_t rep_seed) {
  RepOutcome out;
  const double target = truth[0];
  McConfig cfg = spec.mc;
  cfg.workers = 1;
  cfg.base_seed = rep_seed;

  RegionOptions ropts;
  ropts.grid_points = spec.region_grid_points;
  ropts.span_mult = spec.region_span;

  if (method == "pl" || method == "mpl") {
    McConfig cfg_len = cfg;
    if (spec.length_M > 0) cfg_len.M = spec.length_M;
    if (const auto* full = std::get_if<ModelSpec>(&model)) {
      const PlausResult pr = plaus_point(*full, y, truth, cfg);
      out.hit = pr.estimate > spec.alpha ? 1 : 0;
      if (spec.lengths)
        out.length = region_total_length(plaus_region(*full, y, spec.alpha, cfg_len, ropts));
    } else {
      const auto& marg = std::get<MarginalModelSpec>(model);
      const PlausResult pr = plaus_point(marg, y, target, cfg);
      out.hit = pr.estimate > spec.alpha ? 1 : 0;
      if (spec.lengths)
        out.length = region_total_length(plaus_region(marg, y, spec.alpha, cfg_len, ropts));
    }
    return out;
  }

  IntervalEstimate iv;
  if (method == "wald") {
    if (const auto* full = std::get_if<ModelSpec>(&model)) {
      iv = wald_interval(*full, y, spec.alpha);
    } else {
      iv = wald_interval(std::get<MarginalModelSpec>(model), y, spec.alpha);
    }
  } else if (method == "pboot") {
    const std::uint64_t bseed = mix64(rep_seed ^ 0xB007B007B007ULL);
    if (const auto* full = std::get_if<ModelSpec>(&model)) {
      iv = bootstrap_percentile(*full, y, spec.alpha, spec.bootstrap_B, bseed, 1);
    } else {
      iv = bootstrap_percentile(std::get<MarginalModelSpec>(model), y, spec.alpha,
                                spec.bootstrap_B, bseed, 1);
    }
  } else if (method == "fisher-z" || method == "z4") {
    const auto* marg = std::get_if<MarginalModelSpec>(&model);
    if (!marg || !marg->closed.psi_mle)
      throw ArgumentError("method " + method + " needs an interest-estimate model");
    const double psi_hat = marg->closed.psi_mle(y);
    iv = method == "fisher-z"
             ? fisher_z_interval(psi_hat, static_cast<long>(y.n()), spec.alpha)
             : hotelling_z4_interval(psi_hat, static_cast<long>(y.n()), spec.alpha);
  } else {
    throw ArgumentError("unknown coverage method id: " + method);
  }
  out.hit = (iv.lo <= target && target <= iv.hi) ? 1 : 0;
  out.length = iv.hi - iv.lo;
  return out;
}

Dataset generate_data(const AnyModel& model, const Eigen::VectorXd& truth, int n,
                      const StudySpec& spec, std::uint64_t cell, std::uint64_t r) {
  Dataset proto;
  if (model_name(model) == "ranef") {
    // known sigmas redrawn per replicate, on a stream separate from the data
    RngStream gs(spec.mc.base_seed, stream_tag::study_sigma, cell, r);
    proto.constants.resize(n);
    for (int i = 0; i < n; ++i) proto.constants[i] = 2.0 * draw_exponential(gs);
  }
  RngStream gd(spec.mc.base_seed, stream_tag::study_data, cell, r);
  if (const auto* full = std::get_if<ModelSpec>(&model))
    return simulate(*full, truth, n, proto, gd);
  const auto& marg = std::get<MarginalModelSpec>(model);
  return simulate(marg.base, truth, n, proto, gd);
}

}  // namespace

StudySpec parse_study_spec(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("study spec: invalid JSON: ") + e.what());
  }
  StudySpec s;
  try {
    s.study_id = j.value("study", "study");
    s.model_id = j.at("model").get<std::string>();
    for (const auto& t : j.at("truths")) {
      Eigen::VectorXd v(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) v[i] = t[i].get<double>();
      s.truths.push_back(v);
    }
    s.psi_rule = j.value("psi_rule", "");
    for (const auto& n : j.at("sample_sizes")) s.sample_sizes.push_back(n.get<int>());
    s.replicates = j.value("replicates", 1000);
    s.alpha = j.value("alpha", 0.05);
    for (const auto& m : j.at("methods")) s.methods.push_back(m.get<std::string>());
    if (j.contains("mc")) {
      const auto& mc = j["mc"];
      s.mc.M = mc.value("M", s.mc.M);
      s.mc.base_seed = mc.value("seed", s.mc.base_seed);
      s.mc.workers = mc.value("workers", 0);
      s.mc.common_random_numbers = mc.value("common_random_numbers", true);
    }
    s.bootstrap_B = j.value("bootstrap_B", 5000);
    s.lengths = j.value("lengths", true);
    s.length_M = j.value("length_M", 0);
    s.region_grid_points = j.value("region_grid_points", 17);
    s.region_span = j.value("region_span", 4.0);
    s.output = j.value("output", "");
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("study spec: ") + e.what());
  }
  if (s.replicates < 100) throw ArgumentError("study spec: need replicates >= 100");
  if (s.truths.empty() || s.sample_sizes.empty() || s.methods.empty())
    throw ArgumentError("study spec: truths, sample_sizes and methods are required");
  return s;
}

StudySpec load_study_spec(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw ArgumentError("cannot open study spec: " + json_path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_study_spec(text);
}

std::vector<CoverageRow> run_coverage(const StudySpec& spec) {
  const AnyModel model = find_model(spec.model_id);
  std::vector<CoverageRow> rows;

  std::uint64_t cell = 0;
  for (std::size_t ti = 0; ti < spec.truths.size(); ++ti) {
    for (int n : spec.sample_sizes) {
      ++cell;
      Eigen::VectorXd truth = spec.truths[ti];
      if (spec.psi_rule == "inv-sqrt-n")
        truth[0] = 1.0 / std::sqrt(static_cast<double>(n));
      else if (!spec.psi_rule.empty())
        throw ArgumentError("study spec: unknown psi_rule " + spec.psi_rule);

      const int R = spec.replicates;
      const int K = static_cast<int>(spec.methods.size());
      std::vector<RepOutcome> outcomes(static_cast<std::size_t>(R) * K);

      parallel_for(R, spec.mc.workers, [&](std::int64_t r) {
        Dataset y;
        bool data_ok = true;
        try {
          y = generate_data(model, truth, n, spec, cell, static_cast<std::uint64_t>(r));
        } catch (const std::exception&) {
          data_ok = false;
        }
        const std::uint64_t rep_seed =
            cell_seed(spec.mc.base_seed, cell, static_cast<std::uint64_t>(r));
        for (int k = 0; k < K; ++k) {
          RepOutcome& slot = outcomes[static_cast<std::size_t>(r) * K + k];
          if (!data_ok) continue;
          try {
            slot = apply_method(spec.methods[k], model, y, truth, spec, rep_seed);
          } catch (const ArgumentError&) {
            throw;  // misconfiguration: fail the study immediately
          } catch (const std::exception&) {
            slot.hit = -1;
          }
        }
      });

      for (int k = 0; k < K; ++k) {
        long ok = 0, hits = 0, failures = 0;
        double len_sum = 0.0;
        long len_count = 0;
        for (int r = 0; r < R; ++r) {
          const RepOutcome& o = outcomes[static_cast<std::size_t>(r) * K + k];
          if (o.hit < 0) {
            ++failures;
            continue;
          }
          ++ok;
          hits += o.hit;
          if (spec.lengths && std::isfinite(o.length)) {
            len_sum += o.length;
            ++len_count;
          }
        }
        if (failures > std::max(1, R / 100))
          throw NumericError("study " + spec.study_id + ": method " + spec.methods[k] +
                             " failed on >1% of replicates");
        CoverageRow row;
        row.method = spec.methods[k];
        row.truth = truth[0];
        row.n = n;
        row.replicates = static_cast<int>(ok);
        row.coverage = ok > 0 ? static_cast<double>(hits) / static_cast<double>(ok) : kNaN;
        row.mean_length = len_count > 0 ? len_sum / static_cast<double>(len_count) : kNaN;
        row.mc_stderr = ok > 0 ? std::sqrt(row.coverage * (1.0 - row.coverage) /
                                           static_cast<double>(ok))
                               : kNaN;
        rows.push_back(std::move(row));
      }

      if (!spec.output.empty()) {
        // canonical order, partial file after every completed cell
        std::vector<CoverageRow> sorted_rows = rows;
        std::sort(sorted_rows.begin(), sorted_rows.end(),
                  [](const CoverageRow& a, const CoverageRow& b) {
                    if (a.method != b.method) return a.method < b.method;
                    if (a.truth != b.truth) return a.truth < b.truth;
                    return a.n < b.n;
                  });
        write_coverage_csv(spec.output, spec, sorted_rows);
      }
    }
  }

  std::sort(rows.begin(), rows.end(), [](const CoverageRow& a, const CoverageRow& b) {
    if (a.method != b.method) return a.method < b.method;
    if (a.truth != b.truth) return a.truth < b.truth;
    return a.n < b.n;
  });
  if (!spec.output.empty()) write_coverage_csv(spec.output, spec, rows);
  return rows;
}

void write_coverage_csv(const std::string& path, const StudySpec& spec,
                        const std::vector<CoverageRow>& rows, int precision) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ArgumentError("cannot write: " + path);
  write_meta(out, spec.mc);
  out << "# study=" << spec.study_id << " model=" << spec.model_id
      << " alpha=" << fmt(spec.alpha, precision) << " B=" << spec.bootstrap_B << "\n";
  out << "method,truth,n,coverage,mean_length,stderr,replicates\n";
  for (const auto& r : rows) {
    out << r.method << ',' << fmt(r.truth, precision) << ',' << r.n << ','
        << fmt(r.coverage, precision) << ',' << fmt(r.mean_length, precision) << ','
        << fmt(r.mc_stderr, precision) << ',' << r.replicates << "\n";
  }
}

std::vector<BinomialSweepRow> coverage_sweep_binomial(
    int n, double alpha, const std::vector<double>& theta_grid) {
  if (n < 1 || n > 500) throw ArgumentError("coverage_sweep_binomial: need 1 <= n <= 500");
  const ModelSpec model = binomial_model();
  McConfig cfg;  // enumeration only; Monte Carlo settings are irrelevant
  RegionOptions ropts;
  ropts.method = EvalMethod::kExactEnumeration;
  ropts.grid_points = 512;

  std::vector<Dataset> data(n + 1);
  std::vector<RegionResult> pl_regions(n + 1);
  std::vector<IntervalEstimate> cp(n + 1);
  for (int y = 0; y <= n; ++y) {
    Dataset d;
    d.obs.resize(1, 1);
    d.obs(0, 0) = y;
    d.constants.resize(1);
    d.constants[0] = n;
    data[y] = d;
    pl_regions[y] = plaus_region(model, d, alpha, cfg, ropts);
    cp[y] = clopper_pearson(n, y, alpha);
  }

  std::vector<BinomialSweepRow> rows;
  rows.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    BinomialSweepRow row;
    row.theta = theta;
    Eigen::VectorXd th(1);
    th[0] = theta;
    for (int y = 0; y <= n; ++y) {
      double lpmf = log_choose(n, y);
      if (y > 0) lpmf += theta == 0.0 ? -std::numeric_limits<double>::infinity()
                                      : y * std::log(theta);
      if (n - y > 0) lpmf += theta == 1.0 ? -std::numeric_limits<double>::infinity()
                                          : (n - y) * std::log1p(-theta);
      const double pmf = std::exp(lpmf);
      if (pmf == 0.0) continue;
      const double pl = plaus_exact_discrete(model, data[y], th).estimate;
      if (pl > alpha) row.coverage_pl += pmf;
      if (cp[y].lo <= theta && theta <= cp[y].hi) row.coverage_cp += pmf;
      row.exp_length_pl += pmf * region_total_length(pl_regions[y]);
      row.exp_length_cp += pmf * (cp[y].hi - cp[y].lo);
    }
    rows.push_back(row);
  }
  return rows;
}

CurveTable export_curve(const AnyModel& model, const Dataset& y,
                        const std::vector<double>& grid, const McConfig& cfg,
                        EvalMethod method) {
  std::vector<PlausResult> res;
  if (const auto* full = std::get_if<ModelSpec>(&model)) {
    res = plaus_curve(*full, y, grid, cfg, method);
  } else {
    res = plaus_curve(std::get<MarginalModelSpec>(model), y, grid, cfg, method);
  }
  CurveTable t;
  t.theta = grid;
  t.method = res.empty() ? method : res.front().method;
  for (const auto& r : res) {
    t.pl.push_back(r.estimate);
    t.stderr_.push_back(r.mc_stderr);
  }
  return t;
}

void write_curve_csv(const std::string& path, const CurveTable& table,
                     const McConfig& cfg, int precision) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ArgumentError("cannot write: " + path);
  write_meta(out, cfg);
  out << "# method=" << method_name(table.method) << "\n";
  out << "theta,pl,stderr\n";
  for (std::size_t i = 0; i < table.theta.size(); ++i) {
    out << fmt(table.theta[i], precision) << ',' << fmt(table.pl[i], precision) << ','
        << fmt(table.stderr_[i], precision) << "\n";
  }
}

namespace {

// Chains marching-squares segments into polylines.  Shared cell edges produce
// bitwise-identical interpolation points, so exact keys match up.
std::vector<std::vector<std::pair<double, double>>> chain_segments(
    const std::vector<std::array<double, 4>>& segments) {
  using Point = std::pair<double, double>;
  std::map<Point, std::vector<std::size_t>> at;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    at[{segments[s][0], segments[s][1]}].push_back(s);
    at[{segments[s][2], segments[s][3]}].push_back(s);
  }
  std::vector<bool> used(segments.size(), false);
  std::vector<std::vector<Point>> lines;

  auto walk = [&](std::size_t start, Point from) {
    std::vector<Point> line{from};
    std::size_t s = start;
    Point cur = from;
    for (;;) {
      used[s] = true;
      const Point a{segments[s][0], segments[s][1]};
      const Point b{segments[s][2], segments[s][3]};
      const Point next = (cur == a) ? b : a;
      line.push_back(next);
      cur = next;
      bool found = false;
      for (std::size_t t : at[cur]) {
        if (!used[t]) {
          s = t;
          found = true;
          break;
        }
      }
      if (!found) break;
    }
    return line;
  };

  // open chains first (endpoints of degree one), then closed loops
  for (const auto& [pt, segs] : at) {
    if (segs.size() == 1 && !used[segs[0]]) lines.push_back(walk(segs[0], pt));
  }
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (!used[s]) lines.push_back(walk(s, {segments[s][0], segments[s][1]}));
  }
  return lines;
}

}  // namespace

ContourResult export_contour(const ModelSpec& model, const Dataset& y, double alpha,
                             const std::vector<double>& grid1,
                             const std::vector<double>& grid2, const McConfig& cfg) {
  if (model.space.dims() != 2)
    throw ArgumentError("export_contour: two-parameter models only");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must be in (0,1)");
  const std::size_t n1 = grid1.size(), n2 = grid2.size();
  if (n1 < 2 || n2 < 2) throw ArgumentError("export_contour: grid too small");

  ContourResult res;
  res.grid1 = grid1;
  res.grid2 = grid2;
  res.alpha = alpha;
  res.pl.resize(n1, n2);

  const FitResult fit = mle(model, y);
  res.mle_point = fit.argmax;

  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      Eigen::VectorXd th(2);
      th << grid1[i], grid2[j];
      double v = 0.0;
      if (model.space.contains(th)) {
        v = plaus_point(model, y, th, cfg).estimate;
      }
      res.pl(i, j) = v;
    }
  }

  // marching squares at level alpha
  std::vector<std::array<double, 4>> segments;
  auto interp = [&](double a, double va, double b, double vb) {
    return a + (alpha - va) / (vb - va) * (b - a);
  };
  for (std::size_t i = 0; i + 1 < n1; ++i) {
    for (std::size_t j = 0; j + 1 < n2; ++j) {
      const double v00 = res.pl(i, j), v10 = res.pl(i + 1, j);
      const double v01 = res.pl(i, j + 1), v11 = res.pl(i + 1, j + 1);
      int mask = 0;
      if (v00 > alpha) mask |= 1;
      if (v10 > alpha) mask |= 2;
      if (v11 > alpha) mask |= 4;
      if (v01 > alpha) mask |= 8;
      if (mask == 0 || mask == 15) continue;
      const double x0 = grid1[i], x1 = grid1[i + 1];
      const double y0 = grid2[j], y1 = grid2[j + 1];
      // edge crossing points (bottom, right, top, left)
      double ex[4] = {0, 0, 0, 0}, ey[4] = {0, 0, 0, 0};
      bool has[4] = {false, false, false, false};
      if ((v00 > alpha) != (v10 > alpha)) {
        ex[0] = interp(x0, v00, x1, v10);
        ey[0] = y0;
        has[0] = true;
      }
      if ((v10 > alpha) != (v11 > alpha)) {
        ex[1] = x1;
        ey[1] = interp(y0, v10, y1, v11);
        has[1] = true;
      }
      if ((v01 > alpha) != (v11 > alpha)) {
        ex[2] = interp(x0, v01, x1, v11);
        ey[2] = y1;
        has[2] = true;
      }
      if ((v00 > alpha) != (v01 > alpha)) {
        ex[3] = x0;
        ey[3] = interp(y0, v00, y1, v01);
        has[3] = true;
      }
      std::vector<int> crossed;
      for (int e = 0; e < 4; ++e)
        if (has[e]) crossed.push_back(e);
      if (crossed.size() == 2) {
        segments.push_back({ex[crossed[0]], ey[crossed[0]], ex[crossed[1]], ey[crossed[1]]});
      } else if (crossed.size() == 4) {
        // saddle: split by the cell-center value
        const double center = 0.25 * (v00 + v10 + v01 + v11);
        if ((center > alpha) == (v00 > alpha)) {
          segments.push_back({ex[0], ey[0], ex[1], ey[1]});
          segments.push_back({ex[2], ey[2], ex[3], ey[3]});
        } else {
          segments.push_back({ex[0], ey[0], ex[3], ey[3]});
          segments.push_back({ex[1], ey[1], ex[2], ey[2]});
        }
      }
    }
  }
  res.level_set = chain_segments(segments);

  // Wald ellipse from the observed information at the MLE
  const Eigen::VectorXd th_hat = fit.argmax;
  Eigen::MatrixXd H(2, 2);
  const double h0 = 1e-4 * (1.0 + std::fabs(th_hat[0]));
  const double h1 = 1e-4 * (1.0 + std::fabs(th_hat[1]));
  auto ll = [&](double a, double b) {
    Eigen::VectorXd th(2);
    th << a, b;
    return model.space.contains(th) ? model.loglik(y, th)
                                    : -std::numeric_limits<double>::infinity();
  };
  const double f0 = ll(th_hat[0], th_hat[1]);
  H(0, 0) = (ll(th_hat[0] + h0, th_hat[1]) - 2 * f0 + ll(th_hat[0] - h0, th_hat[1])) /
            (h0 * h0);
  H(1, 1) = (ll(th_hat[0], th_hat[1] + h1) - 2 * f0 + ll(th_hat[0], th_hat[1] - h1)) /
            (h1 * h1);
  const double hxy = (ll(th_hat[0] + h0, th_hat[1] + h1) -
                      ll(th_hat[0] + h0, th_hat[1] - h1) -
                      ll(th_hat[0] - h0, th_hat[1] + h1) +
                      ll(th_hat[0] - h0, th_hat[1] - h1)) /
                     (4.0 * h0 * h1);
  H(0, 1) = H(1, 0) = hxy;
  const Eigen::MatrixXd info = -H;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
  if (es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0) {
    const double c = chi2_quantile_df2(1.0 - alpha);
    const Eigen::MatrixXd half_axes =
        es.eigenvectors() *
        (c / es.eigenvalues().array()).sqrt().matrix().asDiagonal();
    const int K = 128;
    for (int k = 0; k <= K; ++k) {
      const double phi = 2.0 * 3.141592653589793238462643383280 * k / K;
      Eigen::Vector2d u(std::cos(phi), std::sin(phi));
      const Eigen::Vector2d p = th_hat.head<2>() + half_axes * u;
      res.wald_ellipse.emplace_back(p[0], p[1]);
    }
  }
  return res;
}

void write_contour_csv(const std::string& path, const ContourResult& result,
                       const McConfig& cfg, int precision) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ArgumentError("cannot write: " + path);
  write_meta(out, cfg);
  out << "# alpha=" << fmt(result.alpha, precision) << " mle="
      << fmt(result.mle_point[0], precision) << ';'
      << fmt(result.mle_point[1], precision) << "\n";
  out << "theta1,theta2,pl\n";
  for (std::size_t i = 0; i < result.grid1.size(); ++i)
    for (std::size_t j = 0; j < result.grid2.size(); ++j)
      out << fmt(result.grid1[i], precision) << ',' << fmt(result.grid2[j], precision)
          << ',' << fmt(result.pl(i, j), precision) << "\n";
  out << "levelset\n";
  out << "theta1,theta2\n";
  for (const auto& line : result.level_set) {
    for (const auto& [a, b] : line)
      out << fmt(a, precision) << ',' << fmt(b, precision) << "\n";
    out << "\n";  // blank line separates polylines
  }
  out << "wald_ellipse\n";
  out << "theta1,theta2\n";
  for (const auto& [a, b] : result.wald_ellipse)
    out << fmt(a, precision) << ',' << fmt(b, precision) << "\n";
}

SensitivityResult lambda0_sensitivity(const MarginalModelSpec& model, double psi,
                                      const std::vector<double>& lambda_grid, int n,
                                      const McConfig& cfg) {
  if (lambda_grid.empty()) throw ArgumentError("lambda0_sensitivity: empty grid");
  if (model.lambda_dims() != 1)
    throw ArgumentError("lambda0_sensitivity: scalar-nuisance models only");
  SensitivityResult res;
  res.psi = psi;
  res.lambdas = lambda_grid;
  res.sorted_T.resize(lambda_grid.size());

  const Dataset empty_proto;
  for (std::size_t li = 0; li < lambda_grid.size(); ++li) {
    Eigen::VectorXd lam(1);
    lam[0] = lambda_grid[li];
    const Eigen::VectorXd theta = model.join(psi, lam);
    if (!model.base.space.contains(theta))
      throw DomainError("lambda0_sensitivity: grid point outside the space");
    std::vector<double>& ts = res.sorted_T[li];
    ts.resize(cfg.M);
    const std::uint64_t gi = cfg.common_random_numbers ? 0 : li;
    const int W = resolve_workers(cfg.workers);
    parallel_for(W, W, [&](std::int64_t w) {
      const int lo = static_cast<int>(static_cast<std::int64_t>(cfg.M) * w / W);
      const int hi = static_cast<int>(static_cast<std::int64_t>(cfg.M) * (w + 1) / W);
      for (int m = lo; m < hi; ++m) {
        RngStream g(cfg.base_seed, stream_tag::sensitivity, gi,
                    static_cast<std::uint64_t>(m));
        const Dataset ym = simulate(model.base, theta, n, empty_proto, g);
        ts[m] = model.closed.statistic
                    ? relative_profile_likelihood(model, ym, psi, 0.0)
                    : relative_profile_likelihood(model, ym, psi);
      }
    });
    std::sort(ts.begin(), ts.end());
  }

  for (std::size_t i = 0; i < lambda_grid.size(); ++i)
    for (std::size_t j = i + 1; j < lambda_grid.size(); ++j)
      res.max_pairwise_ks = std::max(
          res.max_pairwise_ks, ks_two_sample_sorted(res.sorted_T[i], res.sorted_T[j]));
  return res;
}

void write_sensitivity_csv(const std::string& path, const SensitivityResult& result,
                           const McConfig& cfg, int quantile_points, int precision) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ArgumentError("cannot write: " + path);
  write_meta(out, cfg);
  out << "# psi=" << fmt(result.psi, precision)
      << " max_pairwise_ks=" << fmt(result.max_pairwise_ks, precision) << "\n";
  out << "lambda,quantile,t\n";
  for (std::size_t li = 0; li < result.lambdas.size(); ++li) {
    const auto& ts = result.sorted_T[li];
    for (int k = 0; k < quantile_points; ++k) {
      const double q = (k + 0.5) / quantile_points;
      const std::size_t idx = std::min(
          ts.size() - 1, static_cast<std::size_t>(q * static_cast<double>(ts.size())));
      out << fmt(result.lambdas[li], precision) << ',' << fmt(q, precision) << ','
          << fmt(ts[idx], precision) << "\n";
    }
  }
}

}  // namespace plaus
