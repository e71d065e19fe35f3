#include "plaus/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "plaus/baselines.hpp"
#include "plaus/catalog.hpp"
#include "plaus/engine.hpp"
#include "plaus/errors.hpp"
#include "plaus/experiments.hpp"
#include "plaus/io.hpp"
#include "plaus/util.hpp"

namespace plaus {

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;

struct GlobalOpts {
  int M = 50000;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  bool no_crn = false;
  std::string format = "json";
  std::string out;
  bool full = false;
};

std::uint64_t resolve_seed(const GlobalOpts& g) {
  if (g.seed_set) return g.seed;
  if (const char* env = std::getenv("PLAUS_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ArgumentError("PLAUS_SEED is not a valid integer");
    }
  }
  return 20260809ULL;
}

McConfig make_config(const GlobalOpts& g) {
  McConfig cfg;
  cfg.M = g.M;
  cfg.base_seed = resolve_seed(g);
  cfg.workers = g.workers;
  cfg.common_random_numbers = !g.no_crn;
  return cfg;
}

json config_json(const McConfig& cfg) {
  return json{{"M", cfg.M},
              {"seed", cfg.base_seed},
              {"workers", cfg.workers},
              {"common_random_numbers", cfg.common_random_numbers},
              {"version", kVersion}};
}

Dataset resolve_data(const std::string& data_arg) {
  if (data_arg.empty()) throw ArgumentError("--data is required");
  if (data_arg.find('=') != std::string::npos) return parse_inline_data(data_arg);
  return read_dataset_csv(data_arg);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split(s, ';'))
    if (!tok.empty()) out.push_back(std::stod(tok));
  if (out.empty()) throw ArgumentError("empty numeric list");
  return out;
}

Eigen::VectorXd parse_vector(const std::string& s) {
  const std::vector<double> v = parse_list(s);
  Eigen::VectorXd x(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) x[i] = v[i];
  return x;
}

EvalMethod parse_method(const std::string& s, bool exact_flag) {
  if (exact_flag) return EvalMethod::kExactEnumeration;
  if (s == "auto") return EvalMethod::kAuto;
  if (s == "mc") return EvalMethod::kMonteCarlo;
  if (s == "exact") return EvalMethod::kExactEnumeration;
  if (s == "closed") return EvalMethod::kClosedForm;
  throw ArgumentError("unknown method: " + s + " (auto|mc|exact|closed)");
}

void emit(const GlobalOpts& g, const json& j) {
  std::string text;
  if (g.format == "csv") {
    for (auto it = j.begin(); it != j.end(); ++it) {
      text += it.key();
      text += ',';
      text += it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
      text += '\n';
    }
  } else {
    text = j.dump(2);
    text += '\n';
  }
  if (!g.out.empty()) {
    std::ofstream f(g.out, std::ios::trunc);
    if (!f) throw ArgumentError("cannot write: " + g.out);
    f << text;
  } else {
    std::cout << text;
  }
}

json plaus_result_json(const PlausResult& r) {
  return json{{"plausibility", r.estimate},
              {"stderr", r.mc_stderr},
              {"method", method_name(r.method)},
              {"M_used", r.M_used},
              {"fallbacks", r.fallbacks}};
}

json region_json(const RegionResult& r) {
  json intervals = json::array();
  for (const auto& iv : r.intervals) intervals.push_back({iv.first, iv.second});
  return json{{"alpha", r.alpha},
              {"intervals", intervals},
              {"endpoint_tol", r.endpoint_tol},
              {"grid_points", r.grid_points},
              {"contains_mle", r.contains_mle},
              {"whole_space", r.whole_space},
              {"method", method_name(r.method)}};
}

PlausResult eval_any(const AnyModel& model, const Dataset& y, const Eigen::VectorXd& th,
                     const McConfig& cfg, EvalMethod method) {
  if (const auto* full = std::get_if<ModelSpec>(&model))
    return plaus_point(*full, y, th, cfg, method);
  if (th.size() != 1) throw ArgumentError("interest parameter must be scalar");
  return plaus_point(std::get<MarginalModelSpec>(model), y, th[0], cfg, method);
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"plausibility-function inference"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GlobalOpts g;
  app.add_option("--M", g.M, "Monte Carlo replications")->capture_default_str();
  app.add_option("--seed", g.seed, "base seed (env PLAUS_SEED as fallback)")
      ->each([&g](const std::string&) { g.seed_set = true; });
  app.add_option("--workers", g.workers, "worker threads (0 = all cores)");
  app.add_flag("--no-crn", g.no_crn, "disable common random numbers");
  app.add_option("--format", g.format, "json|csv")->capture_default_str();
  app.add_option("--out", g.out, "output path (default: stdout)");
  app.add_flag("--full", g.full, "full floating-point precision in CSV output");
  app.fallthrough();

  std::string model_id, data_arg, theta_arg, method_arg = "auto";
  std::string box_arg, points_arg, grid_arg, grid1_arg, grid2_arg;
  std::string study_arg, thetas_arg, q_arg = "0.01;0.05;0.1;0.25;0.5", lambdas_arg;
  double alpha = 0.05, psi = 1.0, psi_hat = 0.0;
  long cp_n = 0, cp_y = 0, nobs = 0;
  int B = 5000, sens_n = 10;
  bool exact_flag = false;
  std::string baseline_method;
  RegionOptions ropts;

  auto add_model_data = [&](CLI::App* cmd, bool need_data = true) {
    cmd->add_option("--model", model_id, "catalog model id")->required();
    auto* d = cmd->add_option("--data", data_arg, "inline key=value data or CSV path");
    if (need_data) d->required();
  };

  CLI::App* eval = app.add_subcommand("eval", "plausibility of a parameter point");
  add_model_data(eval);
  eval->add_option("--theta,--psi", theta_arg, "target parameter (';'-separated)")
      ->required();
  eval->add_option("--method", method_arg, "auto|mc|exact|closed");
  eval->add_flag("--exact", exact_flag, "force exact enumeration");

  CLI::App* region = app.add_subcommand("region", "plausibility region for a scalar target");
  add_model_data(region);
  region->add_option("--alpha", alpha, "level")->capture_default_str();
  region->add_option("--method", method_arg, "auto|mc|exact|closed");
  region->add_option("--grid-points", ropts.grid_points, "curve grid size")
      ->capture_default_str();
  region->add_option("--span", ropts.span_mult, "bracket span multiplier")
      ->capture_default_str();

  CLI::App* test = app.add_subcommand("test", "plausibility test of an assertion set");
  add_model_data(test);
  test->add_option("--alpha", alpha, "level")->capture_default_str();
  test->add_option("--box", box_arg, "box 'lo:hi' (multi-dim: 'lo1:hi1|lo2:hi2')");
  test->add_option("--points", points_arg, "finite set 'a;b;c' (multi-dim: 'a1,a2;b1,b2')");

  CLI::App* curve = app.add_subcommand("curve", "plausibility curve on a grid");
  add_model_data(curve);
  curve->add_option("--grid", grid_arg, "lo:hi:count")->required();
  curve->add_option("--method", method_arg, "auto|mc|exact|closed");
  curve->add_flag("--exact", exact_flag, "force exact enumeration");

  CLI::App* contour = app.add_subcommand("contour", "2-D plausibility surface + level set");
  add_model_data(contour);
  contour->add_option("--alpha", alpha, "level")->capture_default_str();
  contour->add_option("--grid1", grid1_arg, "lo:hi:count for theta1")->required();
  contour->add_option("--grid2", grid2_arg, "lo:hi:count for theta2")->required();

  CLI::App* coverage = app.add_subcommand("coverage", "run a coverage study");
  coverage->add_option("--study", study_arg, "study spec JSON path")->required();

  CLI::App* baseline = app.add_subcommand("baseline", "comparison interval methods");
  baseline->add_option("--method", baseline_method, "wald|cp|pboot|fisher-z|z4")
      ->required();
  baseline->add_option("--model", model_id, "catalog model id");
  baseline->add_option("--data", data_arg, "inline key=value data or CSV path");
  baseline->add_option("--alpha", alpha, "level")->capture_default_str();
  baseline->add_option("--n", cp_n, "trials (clopper-pearson)");
  baseline->add_option("--y", cp_y, "successes (clopper-pearson)");
  baseline->add_option("--B", B, "bootstrap resamples")->capture_default_str();
  baseline->add_option("--psi-hat", psi_hat, "estimate (fisher-z / z4)");
  baseline->add_option("--nobs", nobs, "sample size (fisher-z / z4)");

  CLI::App* pivot = app.add_subcommand("pivotcheck", "statistic-distribution comparison");
  add_model_data(pivot);
  pivot->add_option("--thetas", thetas_arg,
                    "parameter points 'a|b|c', components ';'-separated")
      ->required();
  pivot->add_option("--q", q_arg, "quantile levels, ';'-separated");

  CLI::App* sens = app.add_subcommand("sensitivity", "nuisance-value sensitivity of the statistic");
  sens->add_option("--model", model_id, "catalog model id")->required();
  sens->add_option("--psi", psi, "interest value")->required();
  sens->add_option("--lambdas", lambdas_arg, "nuisance grid ';'-separated")->required();
  sens->add_option("--n", sens_n, "sample size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const McConfig cfg = make_config(g);
  const int precision = g.full ? 17 : 6;

  if (eval->parsed()) {
    const AnyModel model = find_model(model_id);
    const Dataset y = resolve_data(data_arg);
    const Eigen::VectorXd th = parse_vector(theta_arg);
    const PlausResult r = eval_any(model, y, th, cfg, parse_method(method_arg, exact_flag));
    json j = plaus_result_json(r);
    j["config"] = config_json(cfg);
    j["config"]["model"] = model_id;
    j["config"]["theta"] = std::vector<double>(th.data(), th.data() + th.size());
    emit(g, j);
    return 0;
  }

  if (region->parsed()) {
    ropts.method = parse_method(method_arg, exact_flag);
    const AnyModel model = find_model(model_id);
    const Dataset y = resolve_data(data_arg);
    RegionResult r;
    if (const auto* full = std::get_if<ModelSpec>(&model)) {
      r = plaus_region(*full, y, alpha, cfg, ropts);
    } else {
      r = plaus_region(std::get<MarginalModelSpec>(model), y, alpha, cfg, ropts);
    }
    json j = region_json(r);
    j["config"] = config_json(cfg);
    j["config"]["model"] = model_id;
    j["config"]["alpha"] = alpha;
    emit(g, j);
    return 0;
  }

  if (test->parsed()) {
    const AnyModel model = find_model(model_id);
    const auto* full = std::get_if<ModelSpec>(&model);
    if (!full) throw ArgumentError("test: full-parameter models only");
    const Dataset y = resolve_data(data_arg);
    SetDescriptor A;
    if (!box_arg.empty()) {
      const auto dims = split(box_arg, '|');
      Eigen::VectorXd lo(dims.size()), hi(dims.size());
      for (std::size_t i = 0; i < dims.size(); ++i) {
        const auto parts = split(dims[i], ':');
        if (parts.size() != 2) throw ArgumentError("--box: expected lo:hi");
        lo[i] = std::stod(parts[0]);
        hi[i] = std::stod(parts[1]);
      }
      A = SetDescriptor::box(lo, hi);
    } else if (!points_arg.empty()) {
      std::vector<Eigen::VectorXd> pts;
      for (const auto& p : split(points_arg, ';')) {
        if (p.empty()) continue;
        const auto comps = split(p, ',');
        Eigen::VectorXd v(comps.size());
        for (std::size_t i = 0; i < comps.size(); ++i) v[i] = std::stod(comps[i]);
        pts.push_back(v);
      }
      A = SetDescriptor::finite(std::move(pts));
    } else {
      throw ArgumentError("test: provide --box or --points");
    }
    const TestDecision d = plaus_test(*full, y, A, alpha, cfg);
    json j{{"reject", d.reject},
           {"alpha", d.alpha},
           {"plausibility", plaus_result_json(d.plausibility)}};
    j["config"] = config_json(cfg);
    j["config"]["model"] = model_id;
    emit(g, j);
    return 0;
  }

  if (curve->parsed()) {
    const AnyModel model = find_model(model_id);
    const Dataset y = resolve_data(data_arg);
    const CurveTable t = export_curve(model, y, parse_grid(grid_arg), cfg,
                                      parse_method(method_arg, exact_flag));
    if (g.out.empty()) throw ArgumentError("curve: --out is required (CSV output)");
    write_curve_csv(g.out, t, cfg, precision);
    return 0;
  }

  if (contour->parsed()) {
    const AnyModel model = find_model(model_id);
    const auto* full = std::get_if<ModelSpec>(&model);
    if (!full) throw ArgumentError("contour: full-parameter models only");
    const Dataset y = resolve_data(data_arg);
    const ContourResult r =
        export_contour(*full, y, alpha, parse_grid(grid1_arg), parse_grid(grid2_arg), cfg);
    if (g.out.empty()) throw ArgumentError("contour: --out is required (CSV output)");
    write_contour_csv(g.out, r, cfg, precision);
    return 0;
  }

  if (coverage->parsed()) {
    StudySpec spec = load_study_spec(study_arg);
    if (!g.out.empty()) spec.output = g.out;
    if (g.seed_set) spec.mc.base_seed = resolve_seed(g);
    if (g.workers > 0) spec.mc.workers = g.workers;
    const std::vector<CoverageRow> rows = run_coverage(spec);
    if (spec.output.empty()) {
      json arr = json::array();
      for (const auto& r : rows) {
        arr.push_back({{"method", r.method},
                       {"truth", r.truth},
                       {"n", r.n},
                       {"coverage", r.coverage},
                       {"mean_length", r.mean_length},
                       {"stderr", r.mc_stderr},
                       {"replicates", r.replicates}});
      }
      json j{{"study", spec.study_id}, {"rows", arr}, {"config", config_json(spec.mc)}};
      emit(g, j);
    } else {
      std::cout << "wrote " << spec.output << " (" << rows.size() << " rows)\n";
    }
    return 0;
  }

  if (baseline->parsed()) {
    IntervalEstimate iv;
    if (baseline_method == "cp") {
      if (cp_n <= 0) throw ArgumentError("baseline cp: --n and --y are required");
      iv = clopper_pearson(cp_n, cp_y, alpha);
    } else if (baseline_method == "fisher-z" || baseline_method == "z4") {
      double ph = psi_hat;
      long nn = nobs;
      if (!data_arg.empty()) {
        const AnyModel model = find_model(model_id.empty() ? "corr" : model_id);
        const auto& marg = std::get<MarginalModelSpec>(model);
        const Dataset y = resolve_data(data_arg);
        ph = marg.closed.psi_mle(y);
        nn = static_cast<long>(y.n());
      }
      if (nn < 4) throw ArgumentError("baseline: need --nobs >= 4 (or --data)");
      iv = baseline_method == "fisher-z" ? fisher_z_interval(ph, nn, alpha)
                                         : hotelling_z4_interval(ph, nn, alpha);
    } else if (baseline_method == "wald" || baseline_method == "pboot") {
      if (model_id.empty() || data_arg.empty())
        throw ArgumentError("baseline " + baseline_method + ": --model and --data required");
      const AnyModel model = find_model(model_id);
      const Dataset y = resolve_data(data_arg);
      if (const auto* full = std::get_if<ModelSpec>(&model)) {
        iv = baseline_method == "wald"
                 ? wald_interval(*full, y, alpha)
                 : bootstrap_percentile(*full, y, alpha, B, cfg.base_seed, cfg.workers);
      } else {
        const auto& marg = std::get<MarginalModelSpec>(model);
        iv = baseline_method == "wald"
                 ? wald_interval(marg, y, alpha)
                 : bootstrap_percentile(marg, y, alpha, B, cfg.base_seed, cfg.workers);
      }
    } else {
      throw ArgumentError("unknown baseline method: " + baseline_method);
    }
    json j{{"method", iv.method}, {"lo", iv.lo}, {"hi", iv.hi}, {"alpha", iv.alpha}};
    j["config"] = config_json(cfg);
    emit(g, j);
    return 0;
  }

  if (pivot->parsed()) {
    const AnyModel model = find_model(model_id);
    const Dataset proto = resolve_data(data_arg);
    std::vector<Eigen::VectorXd> grid;
    for (const auto& p : split(thetas_arg, '|'))
      if (!p.empty()) grid.push_back(parse_vector(p));
    const std::vector<double> q = parse_list(q_arg);
    PivotalityReport rep;
    if (const auto* full = std::get_if<ModelSpec>(&model)) {
      rep = pivotality_check(*full, proto, grid, cfg, q);
    } else {
      rep = pivotality_check(std::get<MarginalModelSpec>(model), proto, grid, cfg, q);
    }
    json pairs = json::array();
    for (const auto& pr : rep.pairs)
      pairs.push_back({{"i", pr.i}, {"j", pr.j}, {"ks", pr.ks},
                       {"quantile_gaps", pr.quantile_gaps}});
    json j{{"max_discrepancy", rep.max_discrepancy},
           {"mc_bound", rep.mc_bound},
           {"method", method_name(rep.method)},
           {"q_grid", rep.q_grid},
           {"pairs", pairs}};
    j["config"] = config_json(cfg);
    emit(g, j);
    return 0;
  }

  if (sens->parsed()) {
    const AnyModel model = find_model(model_id);
    const auto* marg = std::get_if<MarginalModelSpec>(&model);
    if (!marg) throw ArgumentError("sensitivity: interest/nuisance models only");
    const SensitivityResult r =
        lambda0_sensitivity(*marg, psi, parse_list(lambdas_arg), sens_n, cfg);
    if (!g.out.empty()) write_sensitivity_csv(g.out, r, cfg, 512, precision);
    json j{{"psi", r.psi},
           {"lambdas", r.lambdas},
           {"max_pairwise_ks", r.max_pairwise_ks},
           {"config", config_json(cfg)}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  throw ArgumentError("no subcommand given");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CapabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace plaus
