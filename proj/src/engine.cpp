#include "plaus/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "plaus/optimize.hpp"
#include "plaus/special.hpp"
#include "plaus/util.hpp"

namespace plaus {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative slack for tie comparisons: discrete statistics reach equal values
// through different arithmetic paths and may differ by an ulp.
constexpr double kTieSlack = 1e-12;

bool tie_le(double t, double t_obs) { return t <= t_obs * (1.0 + kTieSlack) + 1e-300; }

void check_cfg(const McConfig& cfg) {
  if (cfg.M < 100)
    throw ArgumentError("McConfig: M below 100 is rejected for alpha-level work");
  if (cfg.workers < 0) throw ArgumentError("McConfig: workers must be nonnegative");
}

// Uniform view of full-parameter and interest-parameter problems: a scalar
// or vector target, a simulator at the target, and the statistic.
struct Problem {
  std::string name;
  int dim = 1;
  ParamSpace space;
  std::function<Eigen::VectorXd(const Dataset&)> fit_target;
  // statistic of one dataset, evaluated at many targets (fit done once)
  std::function<std::function<double(const Eigen::VectorXd&)>(const Dataset&)> make_T;
  // simulate + fit + evaluate for one replicate
  std::function<double(const Eigen::VectorXd& target, Eigen::Index n, RngStream&)> draw_T;
  std::function<Dataset(const Eigen::VectorXd& target, Eigen::Index n, RngStream&)> simulate;
  std::function<double(const Dataset&, const Eigen::VectorXd&)> exact_plaus;
  std::function<std::vector<DiscretePoint>(const Dataset&, const Eigen::VectorXd&)>
      discrete_support;
};

Problem make_problem(const ModelSpec& model, const Dataset& proto) {
  auto model_p = std::make_shared<ModelSpec>(model);
  auto proto_p = std::make_shared<Dataset>(proto);
  Problem P;
  P.name = model.name;
  P.dim = model.space.dims();
  P.space = model.space;
  P.fit_target = [model_p](const Dataset& y) { return mle(*model_p, y).argmax; };
  P.make_T = [model_p](const Dataset& y) {
    auto y_p = std::make_shared<Dataset>(y);
    auto fit = std::make_shared<FitResult>(mle(*model_p, *y_p));
    return [model_p, y_p, fit](const Eigen::VectorXd& th) {
      return relative_likelihood(*model_p, *y_p, th, *fit);
    };
  };
  P.simulate = [model_p, proto_p](const Eigen::VectorXd& th, Eigen::Index n,
                                  RngStream& g) {
    return simulate(*model_p, th, n, *proto_p, g);
  };
  if (model.closed.statistic_sampler) {
    P.draw_T = [model_p](const Eigen::VectorXd& th, Eigen::Index n, RngStream& g) {
      return model_p->closed.statistic_sampler(th, n, g);
    };
  } else {
    P.draw_T = [model_p, proto_p](const Eigen::VectorXd& th, Eigen::Index n,
                                  RngStream& g) {
      const Dataset ym = simulate(*model_p, th, n, *proto_p, g);
      const FitResult fit = mle(*model_p, ym);
      return relative_likelihood(*model_p, ym, th, fit);
    };
  }
  if (model.closed.exact_plaus) P.exact_plaus = model.closed.exact_plaus;
  if (model.closed.discrete_support) P.discrete_support = model.closed.discrete_support;
  return P;
}

Problem make_problem(const MarginalModelSpec& model, const Dataset& y_observed) {
  auto model_p = std::make_shared<MarginalModelSpec>(model);
  auto proto_p = std::make_shared<Dataset>(y_observed);

  // Resolve the nuisance value used for simulation once, from the observed data.
  Eigen::VectorXd lambda0;
  if (model.lambda0_policy == Lambda0Policy::kFixed) {
    lambda0 = model.lambda0_fixed;
  } else if (model.lambda_dims() > 0) {
    const FitResult global = marginal_mle(model, y_observed);
    lambda0 = global.argmax.tail(model.lambda_dims());
  } else {
    lambda0 = Eigen::VectorXd(0);
  }
  if (lambda0.size() != model.lambda_dims())
    throw ArgumentError(model.name() + ": lambda0 has the wrong dimension");
  auto lam0_p = std::make_shared<Eigen::VectorXd>(std::move(lambda0));

  Problem P;
  P.name = model.name();
  P.dim = 1;
  P.space = make_space_1d(model.psi_lower, model.psi_upper);
  // interest must also satisfy the base-space slice
  P.space.constraint = [model_p, lam0_p](const Eigen::VectorXd& psi) {
    return model_p->base.space.contains(model_p->join(psi[0], *lam0_p));
  };
  P.fit_target = [model_p](const Dataset& y) {
    Eigen::VectorXd v(1);
    v[0] = model_p->closed.psi_mle ? model_p->closed.psi_mle(y)
                                   : marginal_mle(*model_p, y).argmax[0];
    return v;
  };
  P.make_T = [model_p](const Dataset& y) {
    auto y_p = std::make_shared<Dataset>(y);
    if (model_p->closed.statistic) {
      return std::function<double(const Eigen::VectorXd&)>(
          [model_p, y_p](const Eigen::VectorXd& psi) {
            return relative_profile_likelihood(*model_p, *y_p, psi[0], 0.0);
          });
    }
    auto logmax = std::make_shared<double>(marginal_mle(*model_p, *y_p).logmax);
    return std::function<double(const Eigen::VectorXd&)>(
        [model_p, y_p, logmax](const Eigen::VectorXd& psi) {
          return relative_profile_likelihood(*model_p, *y_p, psi[0], *logmax);
        });
  };
  P.simulate = [model_p, proto_p, lam0_p](const Eigen::VectorXd& psi, Eigen::Index n,
                                          RngStream& g) {
    return simulate(model_p->base, model_p->join(psi[0], *lam0_p), n, *proto_p, g);
  };
  P.draw_T = [model_p, proto_p, lam0_p](const Eigen::VectorXd& psi, Eigen::Index n,
                                        RngStream& g) {
    const Dataset ym =
        simulate(model_p->base, model_p->join(psi[0], *lam0_p), n, *proto_p, g);
    if (model_p->closed.statistic)
      return relative_profile_likelihood(*model_p, ym, psi[0], 0.0);
    return relative_profile_likelihood(*model_p, ym, psi[0]);
  };
  if (model.closed.exact_plaus) {
    P.exact_plaus = [model_p](const Dataset& y, const Eigen::VectorXd& psi) {
      return model_p->closed.exact_plaus(y, psi[0]);
    };
  }
  if (model.base.closed.discrete_support)
    P.discrete_support = model.base.closed.discrete_support;
  return P;
}

PlausResult mc_point(const Problem& P, const Dataset& y, const Eigen::VectorXd& target,
                     const McConfig& cfg, std::uint64_t grid_index) {
  check_cfg(cfg);
  if (!P.space.contains(target))
    throw DomainError(P.name + ": target outside the parameter space");
  const auto T = P.make_T(y);
  const double t_obs = T(target);
  const Eigen::Index n = y.n();
  const std::uint64_t gi = cfg.common_random_numbers ? 0 : grid_index;

  const int W = resolve_workers(cfg.workers);
  std::vector<std::int64_t> counts(W, 0), fails(W, 0);
  const int M = cfg.M;
  parallel_for(W, W, [&](std::int64_t w) {
    const int lo = static_cast<int>(M * w / W);
    const int hi = static_cast<int>(M * (w + 1) / W);
    std::int64_t c = 0, f = 0;
    for (int m = lo; m < hi; ++m) {
      RngStream g(cfg.base_seed, stream_tag::engine, gi, static_cast<std::uint64_t>(m));
      double tm;
      try {
        tm = P.draw_T(target, n, g);
      } catch (const NumericError&) {
        RngStream g2(cfg.base_seed, stream_tag::engine_retry, gi,
                     static_cast<std::uint64_t>(m));
        try {
          tm = P.draw_T(target, n, g2);
        } catch (const NumericError&) {
          tm = 1.0;  // conservative: counts against rejection
          ++f;
        }
      }
      if (tie_le(tm, t_obs)) ++c;
    }
    counts[w] = c;
    fails[w] = f;
  });

  std::int64_t count = 0, fallbacks = 0;
  for (int w = 0; w < W; ++w) {
    count += counts[w];
    fallbacks += fails[w];
  }
  if (fallbacks > std::max<std::int64_t>(1, M / 1000))
    throw NumericError(P.name + ": more than 0.1% of replicates failed to fit");

  PlausResult out;
  out.estimate = static_cast<double>(count) / static_cast<double>(M);
  out.mc_stderr = std::sqrt(out.estimate * (1.0 - out.estimate) / M);
  out.method = EvalMethod::kMonteCarlo;
  out.M_used = M;
  out.fallbacks = static_cast<int>(fallbacks);
  return out;
}

PlausResult exact_point(const Problem& P, const Dataset& y, const Eigen::VectorXd& target) {
  if (!P.discrete_support)
    throw CapabilityError(P.name + ": exact enumeration is not available");
  if (!P.space.contains(target))
    throw DomainError(P.name + ": target outside the parameter space");
  const auto T = P.make_T(y);
  const double t_obs = T(target);
  double total = 0.0;
  for (const DiscretePoint& pt : P.discrete_support(y, target)) {
    if (tie_le(pt.t, t_obs)) total += pt.pmf;
  }
  PlausResult out;
  out.estimate = std::min(total, 1.0);
  out.mc_stderr = 0.0;
  out.method = EvalMethod::kExactEnumeration;
  out.M_used = 0;
  return out;
}

PlausResult closed_point(const Problem& P, const Dataset& y, const Eigen::VectorXd& target) {
  if (!P.exact_plaus)
    throw CapabilityError(P.name + ": no closed-form plausibility");
  if (!P.space.contains(target))
    throw DomainError(P.name + ": target outside the parameter space");
  PlausResult out;
  out.estimate = std::min(std::max(P.exact_plaus(y, target), 0.0), 1.0);
  out.mc_stderr = 0.0;
  out.method = EvalMethod::kClosedForm;
  out.M_used = 0;
  return out;
}

PlausResult point_dispatch(const Problem& P, const Dataset& y,
                           const Eigen::VectorXd& target, const McConfig& cfg,
                           EvalMethod method, std::uint64_t grid_index) {
  switch (method) {
    case EvalMethod::kClosedForm:
      return closed_point(P, y, target);
    case EvalMethod::kExactEnumeration:
      return exact_point(P, y, target);
    case EvalMethod::kMonteCarlo:
      return mc_point(P, y, target, cfg, grid_index);
    case EvalMethod::kAuto:
      if (P.exact_plaus) return closed_point(P, y, target);
      if (P.discrete_support) return exact_point(P, y, target);
      return mc_point(P, y, target, cfg, grid_index);
  }
  throw ArgumentError("unknown evaluation method");
}

// Plausibility at an arbitrary point, zero outside the space.  Used by the
// curve, region, and set-sup paths.
PlausResult point_or_zero(const Problem& P, const Dataset& y,
                          const Eigen::VectorXd& target, const McConfig& cfg,
                          EvalMethod method, std::uint64_t grid_index) {
  if (!P.space.contains(target)) {
    PlausResult out;
    out.estimate = 0.0;
    out.mc_stderr = 0.0;
    out.method = method == EvalMethod::kAuto ? EvalMethod::kClosedForm : method;
    return out;
  }
  return point_dispatch(P, y, target, cfg, method, grid_index);
}

std::vector<PlausResult> curve_impl(const Problem& P, const Dataset& y,
                                    const std::vector<double>& grid, const McConfig& cfg,
                                    EvalMethod method) {
  if (P.dim != 1) throw ArgumentError(P.name + ": curves need a scalar target");
  std::vector<PlausResult> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    Eigen::VectorXd t(1);
    t[0] = grid[j];
    out[j] = point_or_zero(P, y, t, cfg, method, j);
  }
  return out;
}

EvalMethod resolve_method(const Problem& P, EvalMethod method) {
  if (method != EvalMethod::kAuto) return method;
  if (P.exact_plaus) return EvalMethod::kClosedForm;
  if (P.discrete_support) return EvalMethod::kExactEnumeration;
  return EvalMethod::kMonteCarlo;
}

RegionResult region_impl(const Problem& P, const Dataset& y, double alpha,
                         const McConfig& cfg, const RegionOptions& opts) {
  if (P.dim != 1)
    throw ArgumentError(P.name + ": regions are solved for scalar targets only");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must be in (0,1)");
  if (opts.grid_points < 8) throw ArgumentError("region: grid too coarse");

  const EvalMethod method = resolve_method(P, opts.method);
  const double th_hat = P.fit_target(y)[0];
  const auto T_obs = P.make_T(y);

  std::uint64_t probe_counter = 1000000;  // stream index for off-grid probes
  auto pl = [&](double th) {
    Eigen::VectorXd t(1);
    t[0] = th;
    return point_or_zero(P, y, t, cfg, method, probe_counter++).estimate;
  };

  // Wald-type initial half width from the curvature of log T at the maximizer.
  const double space_lo = P.space.lower[0], space_hi = P.space.upper[0];
  double h = 1e-4 * (std::fabs(th_hat) + 1.0);
  if (std::isfinite(space_lo)) h = std::min(h, 0.25 * (th_hat - space_lo) + 1e-300);
  if (std::isfinite(space_hi)) h = std::min(h, 0.25 * (space_hi - th_hat) + 1e-300);
  double se = std::fabs(th_hat) * 0.5 + 1.0;
  if (h > 0) {
    Eigen::VectorXd tp(1), tm(1);
    tp[0] = th_hat + h;
    tm[0] = th_hat - h;
    const double lp = std::log(std::max(T_obs(tp), 1e-300));
    const double lm = std::log(std::max(T_obs(tm), 1e-300));
    const double d2 = (lp + lm) / (h * h);  // log T at the maximizer is 0
    if (d2 < 0.0 && std::isfinite(d2)) se = 1.0 / std::sqrt(-d2);
  }

  const double z = norm_quantile(1.0 - alpha / 2.0);
  double half = std::max(opts.span_mult, 0.1) * z * se;
  double lo = th_hat - half, hi = th_hat + half;
  if (std::isfinite(space_lo)) lo = std::max(lo, space_lo);
  if (std::isfinite(space_hi)) hi = std::min(hi, space_hi);

  bool lo_at_bound = std::isfinite(space_lo) && lo <= space_lo;
  bool hi_at_bound = std::isfinite(space_hi) && hi >= space_hi;
  int widen = 0;
  while (!lo_at_bound && pl(lo) >= alpha) {
    half *= 1.7;
    lo = th_hat - half;
    if (std::isfinite(space_lo) && lo <= space_lo) {
      lo = space_lo;
      lo_at_bound = true;
    }
    if (++widen > 70)
      throw NumericError(P.name + ": plausibility never fell below alpha (left)");
  }
  widen = 0;
  while (!hi_at_bound && pl(hi) >= alpha) {
    half *= 1.7;
    hi = th_hat + half;
    if (std::isfinite(space_hi) && hi >= space_hi) {
      hi = space_hi;
      hi_at_bound = true;
    }
    if (++widen > 70)
      throw NumericError(P.name + ": plausibility never fell below alpha (right)");
  }

  const int G = opts.grid_points;
  std::vector<double> thetas(G), vals(G);
  for (int j = 0; j < G; ++j)
    thetas[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(G - 1);
  for (int j = 0; j < G; ++j) {
    Eigen::VectorXd t(1);
    t[0] = thetas[j];
    vals[j] = point_or_zero(P, y, t, cfg, method, static_cast<std::uint64_t>(j)).estimate;
  }

  RegionResult out;
  out.alpha = alpha;
  out.method = method;
  out.grid_points = G;
  out.endpoint_tol = 1e-4 * (hi - lo);

  bool all_above = true;
  for (double v : vals) all_above = all_above && (v > alpha);
  if (all_above && lo_at_bound && hi_at_bound) {
    out.intervals.emplace_back(space_lo, space_hi);
    out.whole_space = true;
    out.contains_mle = true;
    return out;
  }

  auto refine = [&](double a, double b, bool above_at_b) {
    // bisect pl - alpha between a and b; "above_at_b" says which side is inside
    for (int it = 0; it < 60 && b - a > out.endpoint_tol; ++it) {
      const double mid = 0.5 * (a + b);
      const bool above = pl(mid) > alpha;
      if (above == above_at_b) b = mid;
      else a = mid;
    }
    return 0.5 * (a + b);
  };

  int j = 0;
  while (j < G) {
    if (vals[j] > alpha) {
      int k = j;
      while (k + 1 < G && vals[k + 1] > alpha) ++k;
      double left, right;
      if (j == 0) {
        left = thetas[0];  // widening stopped at a bound
      } else {
        left = refine(thetas[j - 1], thetas[j], true);
      }
      if (k == G - 1) {
        right = thetas[G - 1];
      } else {
        right = refine(thetas[k], thetas[k + 1], false);
      }
      out.intervals.emplace_back(left, right);
      j = k + 1;
    } else {
      ++j;
    }
  }

  out.contains_mle = false;
  for (auto& iv : out.intervals) {
    if (th_hat >= iv.first - out.endpoint_tol && th_hat <= iv.second + out.endpoint_tol)
      out.contains_mle = true;
  }
  return out;
}

PlausResult set_impl(const Problem& P, const Dataset& y, const SetDescriptor& A,
                     const McConfig& cfg) {
  check_cfg(cfg);
  // CRN keeps the Monte Carlo objective deterministic across probe points.
  McConfig cfg_crn = cfg;
  cfg_crn.common_random_numbers = true;

  auto eval = [&](const Eigen::VectorXd& th) {
    return point_or_zero(P, y, th, cfg_crn, EvalMethod::kAuto, 0);
  };

  if (A.kind == SetDescriptor::Kind::kFiniteSet) {
    if (A.points.empty()) throw ArgumentError("plaus_set: empty point list");
    PlausResult best;
    best.estimate = -1.0;
    bool any_in_space = false;
    for (const auto& p : A.points) {
      if (P.space.contains(p)) any_in_space = true;
      const PlausResult r = eval(p);
      if (r.estimate > best.estimate) best = r;
    }
    if (!any_in_space)
      throw DomainError("plaus_set: set does not intersect the parameter space");
    return best;
  }

  if (A.lo.size() != P.dim || A.hi.size() != P.dim)
    throw ArgumentError("plaus_set: box dimension mismatch");
  Eigen::VectorXd lo = A.lo, hi = A.hi;
  for (int i = 0; i < P.dim; ++i) {
    lo[i] = std::max(lo[i], P.space.lower[i]);
    hi[i] = std::min(hi[i], P.space.upper[i]);
    if (!(lo[i] <= hi[i]))
      throw DomainError("plaus_set: set does not intersect the parameter space");
  }
  auto admissible = [&](const Eigen::VectorXd& th) {
    if (!P.space.contains(th)) return false;
    if (A.kind == SetDescriptor::Kind::kPredicateBox && A.predicate && !A.predicate(th))
      return false;
    return true;
  };

  PlausResult best;
  best.estimate = -1.0;
  auto consider = [&](const Eigen::VectorXd& th) {
    if (!admissible(th)) return;
    const PlausResult r = eval(th);
    if (r.estimate > best.estimate) best = r;
  };

  // the maximizer first: if it lies in A the supremum is 1
  Eigen::VectorXd th_hat = P.fit_target(y);
  bool clip_ok = true;
  for (int i = 0; i < P.dim; ++i) {
    if (th_hat[i] < lo[i] || th_hat[i] > hi[i]) clip_ok = false;
  }
  if (clip_ok) consider(th_hat);

  // coarse scan of the box
  const int per_dim = P.dim == 1 ? 17 : (P.dim == 2 ? 7 : 3);
  std::vector<Eigen::VectorXd> probes;
  const long total = static_cast<long>(std::pow(per_dim, P.dim));
  for (long idx = 0; idx < total; ++idx) {
    Eigen::VectorXd th(P.dim);
    long rem = idx;
    for (int i = 0; i < P.dim; ++i) {
      const int pos = static_cast<int>(rem % per_dim);
      rem /= per_dim;
      const double frac = per_dim == 1 ? 0.5
                                       : static_cast<double>(pos) /
                                             static_cast<double>(per_dim - 1);
      th[i] = lo[i] + (hi[i] - lo[i]) * frac;
    }
    probes.push_back(th);
  }
  std::vector<std::pair<double, Eigen::VectorXd>> scored;
  for (const auto& th : probes) {
    if (!admissible(th)) continue;
    const PlausResult r = eval(th);
    if (r.estimate > best.estimate) best = r;
    scored.emplace_back(r.estimate, th);
  }
  if (scored.empty() && best.estimate < 0.0)
    throw DomainError("plaus_set: set does not intersect the parameter space");
  if (best.estimate >= 1.0) return best;

  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  const int starts = std::min<std::size_t>(3, scored.size());
  ParamSpace box;
  box.lower = lo;
  box.upper = hi;
  box.constraint = admissible;
  for (int s = 0; s < starts; ++s) {
    auto obj = [&](const Eigen::VectorXd& th) {
      if (!admissible(th)) return -1.0;
      const PlausResult r = eval(th);
      if (r.estimate > best.estimate) best = r;
      return r.estimate;
    };
    OptimOptions oo;
    oo.max_iter = 200;
    oo.restarts = 0;
    try {
      maximize(obj, box, scored[s].second, oo);
    } catch (const NumericError&) {
      // the running max already holds the best probed value
    }
  }
  return best;
}

std::vector<double> sorted_T_sample(const Problem& P, const Eigen::VectorXd& target,
                                    Eigen::Index n, const McConfig& cfg, int grid_i) {
  std::vector<double> ts(cfg.M);
  const int W = resolve_workers(cfg.workers);
  const int M = cfg.M;
  parallel_for(W, W, [&](std::int64_t w) {
    const int lo = static_cast<int>(M * w / W);
    const int hi = static_cast<int>(M * (w + 1) / W);
    for (int m = lo; m < hi; ++m) {
      RngStream g(cfg.base_seed, stream_tag::engine, static_cast<std::uint64_t>(grid_i),
                  static_cast<std::uint64_t>(m));
      try {
        ts[m] = P.draw_T(target, n, g);
      } catch (const NumericError&) {
        ts[m] = 1.0;
      }
    }
  });
  std::sort(ts.begin(), ts.end());
  return ts;
}

// Exact CDF of a discrete statistic, as sorted (t, cumulative mass) steps.
std::vector<std::pair<double, double>> exact_cdf(std::vector<DiscretePoint> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const DiscretePoint& a, const DiscretePoint& b) { return a.t < b.t; });
  std::vector<std::pair<double, double>> cdf;
  double cum = 0.0;
  for (const auto& p : pts) {
    cum += p.pmf;
    if (!cdf.empty() && std::fabs(cdf.back().first - p.t) <= kTieSlack * std::fabs(p.t)) {
      cdf.back().second = cum;
    } else {
      cdf.emplace_back(p.t, cum);
    }
  }
  return cdf;
}

double exact_cdf_at(const std::vector<std::pair<double, double>>& cdf, double t) {
  // step function: mass of values <= t
  double v = 0.0;
  for (const auto& [x, c] : cdf) {
    if (x <= t * (1.0 + kTieSlack) + 1e-300) v = c;
    else break;
  }
  return v;
}

double exact_quantile(const std::vector<std::pair<double, double>>& cdf, double q) {
  for (const auto& [x, c] : cdf) {
    if (c >= q) return x;
  }
  return cdf.empty() ? 0.0 : cdf.back().first;
}

double sample_quantile_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) return 0.0;
  const double pos = q * static_cast<double>(s.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= s.size()) return s.back();
  const double w = pos - static_cast<double>(i);
  return s[i] * (1.0 - w) + s[i + 1] * w;
}

PivotalityReport pivot_impl(const Problem& P, const Dataset& proto,
                            const std::vector<Eigen::VectorXd>& grid, const McConfig& cfg,
                            const std::vector<double>& q_grid,
                            const std::function<std::vector<DiscretePoint>(int)>& support_of,
                            bool have_exact) {
  if (grid.size() < 2)
    throw ArgumentError("pivotality_check: need at least two grid points");
  check_cfg(cfg);

  PivotalityReport rep;
  rep.q_grid = q_grid;
  rep.mc_bound = 3.0 * 1.36 / std::sqrt(static_cast<double>(cfg.M));

  const int K = static_cast<int>(grid.size());
  if (have_exact) {
    rep.method = EvalMethod::kExactEnumeration;
    std::vector<std::vector<std::pair<double, double>>> cdfs(K);
    for (int i = 0; i < K; ++i) cdfs[i] = exact_cdf(support_of(i));
    for (int i = 0; i < K; ++i) {
      for (int j = i + 1; j < K; ++j) {
        PivotPair pr;
        pr.i = i;
        pr.j = j;
        double d = 0.0;
        for (const auto& [t, c] : cdfs[i])
          d = std::max(d, std::fabs(c - exact_cdf_at(cdfs[j], t)));
        for (const auto& [t, c] : cdfs[j])
          d = std::max(d, std::fabs(c - exact_cdf_at(cdfs[i], t)));
        pr.ks = d;
        for (double q : q_grid)
          pr.quantile_gaps.push_back(
              std::fabs(exact_quantile(cdfs[i], q) - exact_quantile(cdfs[j], q)));
        rep.max_discrepancy = std::max(rep.max_discrepancy, d);
        rep.pairs.push_back(std::move(pr));
      }
    }
    return rep;
  }

  rep.method = EvalMethod::kMonteCarlo;
  std::vector<std::vector<double>> samples(K);
  for (int i = 0; i < K; ++i)
    samples[i] = sorted_T_sample(P, grid[i], proto.n(), cfg, i);
  for (int i = 0; i < K; ++i) {
    for (int j = i + 1; j < K; ++j) {
      PivotPair pr;
      pr.i = i;
      pr.j = j;
      pr.ks = ks_two_sample_sorted(samples[i], samples[j]);
      for (double q : q_grid)
        pr.quantile_gaps.push_back(std::fabs(sample_quantile_sorted(samples[i], q) -
                                             sample_quantile_sorted(samples[j], q)));
      rep.max_discrepancy = std::max(rep.max_discrepancy, pr.ks);
      rep.pairs.push_back(std::move(pr));
    }
  }
  return rep;
}

}  // namespace

const char* method_name(EvalMethod m) {
  switch (m) {
    case EvalMethod::kAuto: return "auto";
    case EvalMethod::kMonteCarlo: return "monte-carlo";
    case EvalMethod::kExactEnumeration: return "exact-enumeration";
    case EvalMethod::kClosedForm: return "closed-form";
  }
  return "unknown";
}

SetDescriptor SetDescriptor::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  SetDescriptor s;
  s.kind = Kind::kBox;
  s.lo = lo;
  s.hi = hi;
  return s;
}

SetDescriptor SetDescriptor::box1d(double lo, double hi) {
  Eigen::VectorXd l(1), h(1);
  l[0] = lo;
  h[0] = hi;
  return box(l, h);
}

SetDescriptor SetDescriptor::finite(std::vector<Eigen::VectorXd> pts) {
  SetDescriptor s;
  s.kind = Kind::kFiniteSet;
  s.points = std::move(pts);
  return s;
}

SetDescriptor SetDescriptor::finite1d(const std::vector<double>& pts) {
  std::vector<Eigen::VectorXd> v;
  for (double x : pts) {
    Eigen::VectorXd p(1);
    p[0] = x;
    v.push_back(p);
  }
  return finite(std::move(v));
}

SetDescriptor SetDescriptor::predicate_box(
    const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
    std::function<bool(const Eigen::VectorXd&)> pred) {
  SetDescriptor s;
  s.kind = Kind::kPredicateBox;
  s.lo = lo;
  s.hi = hi;
  s.predicate = std::move(pred);
  return s;
}

PlausResult plaus_mc(const ModelSpec& model, const Dataset& y,
                     const Eigen::VectorXd& theta, const McConfig& cfg) {
  return mc_point(make_problem(model, y), y, theta, cfg, 0);
}

PlausResult plaus_mc(const MarginalModelSpec& model, const Dataset& y, double psi,
                     const McConfig& cfg) {
  Eigen::VectorXd t(1);
  t[0] = psi;
  return mc_point(make_problem(model, y), y, t, cfg, 0);
}

PlausResult marginal_plaus_mc(const MarginalModelSpec& model, const Dataset& y,
                              double psi, const McConfig& cfg) {
  return plaus_mc(model, y, psi, cfg);
}

PlausResult plaus_exact_discrete(const ModelSpec& model, const Dataset& y,
                                 const Eigen::VectorXd& theta) {
  return exact_point(make_problem(model, y), y, theta);
}

PlausResult plaus_exact_discrete(const MarginalModelSpec& model, const Dataset& y,
                                 double psi) {
  Eigen::VectorXd t(1);
  t[0] = psi;
  return exact_point(make_problem(model, y), y, t);
}

PlausResult plaus_point(const ModelSpec& model, const Dataset& y,
                        const Eigen::VectorXd& theta, const McConfig& cfg,
                        EvalMethod method) {
  return point_dispatch(make_problem(model, y), y, theta, cfg, method, 0);
}

PlausResult plaus_point(const MarginalModelSpec& model, const Dataset& y, double psi,
                        const McConfig& cfg, EvalMethod method) {
  Eigen::VectorXd t(1);
  t[0] = psi;
  return point_dispatch(make_problem(model, y), y, t, cfg, method, 0);
}

std::vector<PlausResult> plaus_curve(const ModelSpec& model, const Dataset& y,
                                     const std::vector<double>& grid, const McConfig& cfg,
                                     EvalMethod method) {
  return curve_impl(make_problem(model, y), y, grid, cfg, method);
}

std::vector<PlausResult> plaus_curve(const MarginalModelSpec& model, const Dataset& y,
                                     const std::vector<double>& grid, const McConfig& cfg,
                                     EvalMethod method) {
  return curve_impl(make_problem(model, y), y, grid, cfg, method);
}

PlausResult plaus_set(const ModelSpec& model, const Dataset& y, const SetDescriptor& A,
                      const McConfig& cfg) {
  return set_impl(make_problem(model, y), y, A, cfg);
}

TestDecision plaus_test(const ModelSpec& model, const Dataset& y, const SetDescriptor& A,
                        double alpha, const McConfig& cfg) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must be in (0,1)");
  TestDecision d;
  d.alpha = alpha;
  d.plausibility = plaus_set(model, y, A, cfg);
  d.reject = d.plausibility.estimate <= alpha;
  return d;
}

RegionResult plaus_region(const ModelSpec& model, const Dataset& y, double alpha,
                          const McConfig& cfg, const RegionOptions& opts) {
  return region_impl(make_problem(model, y), y, alpha, cfg, opts);
}

RegionResult plaus_region(const MarginalModelSpec& model, const Dataset& y, double alpha,
                          const McConfig& cfg, const RegionOptions& opts) {
  return region_impl(make_problem(model, y), y, alpha, cfg, opts);
}

PivotalityReport pivotality_check(const ModelSpec& model, const Dataset& proto,
                                  const std::vector<Eigen::VectorXd>& theta_grid,
                                  const McConfig& cfg,
                                  const std::vector<double>& q_grid) {
  Problem P = make_problem(model, proto);
  const bool have_exact = static_cast<bool>(model.closed.discrete_support);
  auto support_of = [&](int i) { return model.closed.discrete_support(proto, theta_grid[i]); };
  return pivot_impl(P, proto, theta_grid, cfg, q_grid,
                    have_exact ? std::function<std::vector<DiscretePoint>(int)>(support_of)
                               : nullptr,
                    have_exact);
}

PivotalityReport pivotality_check(const MarginalModelSpec& model, const Dataset& proto,
                                  const std::vector<Eigen::VectorXd>& theta_grid,
                                  const McConfig& cfg,
                                  const std::vector<double>& q_grid) {
  // grid entries are full parameter vectors (interest first); the statistic is
  // always evaluated at the interest component
  auto model_p = std::make_shared<MarginalModelSpec>(model);
  auto proto_p = std::make_shared<Dataset>(proto);
  Problem P;
  P.name = model.name();
  P.dim = model.base.space.dims();
  P.space = model.base.space;
  P.draw_T = [model_p, proto_p](const Eigen::VectorXd& th, Eigen::Index n, RngStream& g) {
    const Dataset ym = simulate(model_p->base, th, n, *proto_p, g);
    if (model_p->closed.statistic)
      return relative_profile_likelihood(*model_p, ym, th[0], 0.0);
    return relative_profile_likelihood(*model_p, ym, th[0]);
  };
  const bool have_exact = static_cast<bool>(model.base.closed.discrete_support);
  auto support_of = [&](int i) {
    return model.base.closed.discrete_support(proto, theta_grid[i]);
  };
  return pivot_impl(P, proto, theta_grid, cfg, q_grid,
                    have_exact ? std::function<std::vector<DiscretePoint>(int)>(support_of)
                               : nullptr,
                    have_exact);
}

}  // namespace plaus
