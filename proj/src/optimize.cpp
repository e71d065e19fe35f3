#include "plaus/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "plaus/errors.hpp"

namespace plaus {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Coordinate-wise maps between a box and all of R.
struct BoxTransform {
  Eigen::VectorXd lo, hi;

  Eigen::VectorXd to_unconstrained(const Eigen::VectorXd& x) const {
    Eigen::VectorXd u(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      u[i] = to_unconstrained_coord(x[i], lo[i], hi[i]);
    return u;
  }

  Eigen::VectorXd to_box(const Eigen::VectorXd& u) const {
    Eigen::VectorXd x(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i)
      x[i] = to_box_coord(u[i], lo[i], hi[i]);
    return x;
  }
};

// Nudges a start point strictly inside the box.
Eigen::VectorXd interior_point(const ParamSpace& space, Eigen::VectorXd x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double lo = space.lower[i], hi = space.upper[i];
    double span = 1.0;
    if (std::isfinite(lo) && std::isfinite(hi)) span = hi - lo;
    const double pad = 1e-6 * span;
    if (std::isfinite(lo) && x[i] <= lo) x[i] = lo + pad;
    if (std::isfinite(hi) && x[i] >= hi) x[i] = hi - pad;
    if (!std::isfinite(x[i])) x[i] = std::isfinite(lo) ? lo + 1.0 : (std::isfinite(hi) ? hi - 1.0 : 0.0);
  }
  return x;
}

struct NmOutcome {
  Eigen::VectorXd u;
  double f;
  int iterations;
  bool converged;
  double spread;
};

// Standard Nelder-Mead on an unconstrained objective (minimization).
NmOutcome nelder_mead(const std::function<double(const Eigen::VectorXd&)>& fn,
                      const Eigen::VectorXd& u0, double rel_ftol, int max_iter) {
  const Eigen::Index d = u0.size();
  const int np = static_cast<int>(d) + 1;
  std::vector<Eigen::VectorXd> pts(np, u0);
  std::vector<double> fv(np);
  for (int i = 1; i < np; ++i) {
    const double step = (u0[i - 1] != 0.0) ? 0.05 * std::fabs(u0[i - 1]) + 0.05 : 0.25;
    pts[i][i - 1] += step;
  }
  for (int i = 0; i < np; ++i) fv[i] = fn(pts[i]);

  auto order = [&] {
    std::vector<int> idx(np);
    for (int i = 0; i < np; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    std::vector<Eigen::VectorXd> p2(np);
    std::vector<double> f2(np);
    for (int i = 0; i < np; ++i) {
      p2[i] = pts[idx[i]];
      f2[i] = fv[idx[i]];
    }
    pts.swap(p2);
    fv.swap(f2);
  };

  int it = 0;
  for (; it < max_iter; ++it) {
    order();
    const double fbest = fv[0], fworst = fv[np - 1];
    const double denom = std::fabs(fbest) + std::fabs(fworst) + 1e-300;
    if (2.0 * std::fabs(fworst - fbest) / denom < rel_ftol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < np - 1; ++i) centroid += pts[i];
    centroid /= static_cast<double>(np - 1);

    const Eigen::VectorXd xr = centroid + (centroid - pts[np - 1]);
    const double fr = fn(xr);
    if (fr < fv[0]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[np - 1]);
      const double fe = fn(xe);
      if (fe < fr) {
        pts[np - 1] = xe;
        fv[np - 1] = fe;
      } else {
        pts[np - 1] = xr;
        fv[np - 1] = fr;
      }
    } else if (fr < fv[np - 2]) {
      pts[np - 1] = xr;
      fv[np - 1] = fr;
    } else {
      const Eigen::VectorXd xc = centroid + 0.5 * (pts[np - 1] - centroid);
      const double fc = fn(xc);
      if (fc < fv[np - 1]) {
        pts[np - 1] = xc;
        fv[np - 1] = fc;
      } else {
        for (int i = 1; i < np; ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          fv[i] = fn(pts[i]);
        }
      }
    }
  }
  order();
  double spread = 0.0;
  for (int i = 1; i < np; ++i) spread = std::max(spread, (pts[i] - pts[0]).norm());
  const double denom = std::fabs(fv[0]) + std::fabs(fv[np - 1]) + 1e-300;
  const bool conv = 2.0 * std::fabs(fv[np - 1] - fv[0]) / denom < rel_ftol * 10.0;
  return {pts[0], fv[0], it, conv, spread};
}

}  // namespace

double brent_min(const std::function<double(double)>& fn, double lo, double hi,
                 double xtol, int max_iter, int* iters_out) {
  const double gold = 0.3819660112501051;
  double a = lo, b = hi;
  double x = a + gold * (b - a);
  double w = x, v = x;
  double fx = fn(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    const double xm = 0.5 * (a + b);
    const double tol1 = xtol * std::fabs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::fabs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    bool parabolic = false;
    if (std::fabs(e) > tol1) {
      // try a parabolic step through (v, w, x)
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::fabs(q);
      const double etmp = e;
      e = d;
      if (std::fabs(p) < std::fabs(0.5 * q * etmp) && p > q * (a - x) && p < q * (b - x)) {
        parabolic = true;
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (xm > x) ? tol1 : -tol1;
      }
    }
    if (!parabolic) {
      e = (x >= xm) ? a - x : b - x;
      d = gold * e;
    }
    const double u = (std::fabs(d) >= tol1) ? x + d : x + ((d > 0) ? tol1 : -tol1);
    const double fu = fn(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  if (iters_out) *iters_out = it;
  return x;
}

double to_unconstrained_coord(double x, double lo, double hi) {
  const bool bl = std::isfinite(lo);
  const bool bu = std::isfinite(hi);
  if (bl && bu) {
    const double w = hi - lo;
    double p = (x - lo) / w;
    p = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
    return std::log(p / (1.0 - p));
  }
  if (bl) return std::log(std::max(x - lo, 1e-300));
  if (bu) return std::log(std::max(hi - x, 1e-300));
  return x;
}

double to_box_coord(double u, double lo, double hi) {
  const bool bl = std::isfinite(lo);
  const bool bu = std::isfinite(hi);
  if (bl && bu) {
    // logistic; stable in both tails
    const double p = u >= 0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
    return lo + (hi - lo) * p;
  }
  if (bl) return lo + std::exp(u);
  if (bu) return hi - std::exp(u);
  return u;
}

double bisect_root(const std::function<double(double)>& fn, double lo, double hi,
                   double xtol, int max_iter) {
  double flo = fn(lo), fhi = fn(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw NumericError("bisect_root: no sign change on the given bracket");
  for (int it = 0; it < max_iter && hi - lo > xtol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = fn(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

OptimResult maximize(const std::function<double(const Eigen::VectorXd&)>& fn,
                     const ParamSpace& space, const Eigen::VectorXd& init,
                     const OptimOptions& opts) {
  const Eigen::Index d = space.lower.size();
  if (init.size() != d) throw ArgumentError("maximize: init dimension mismatch");
  BoxTransform tf{space.lower, space.upper};

  // Minimize the negative; reject constraint violations with +inf.
  auto negfn = [&](const Eigen::VectorXd& u) {
    const Eigen::VectorXd x = tf.to_box(u);
    if (space.constraint && !space.constraint(x)) return kInf;
    const double f = fn(x);
    return std::isnan(f) ? kInf : -f;
  };

  const Eigen::VectorXd u0 = tf.to_unconstrained(interior_point(space, init));

  OptimResult best;
  best.fval = -kInf;

  if (d == 1) {
    // bracket around u0, then Brent
    double step = 1.0;
    double a = u0[0] - step, b = u0[0] + step;
    Eigen::VectorXd tmp(1);
    auto f1 = [&](double u) {
      tmp[0] = u;
      return negfn(tmp);
    };
    double fa = f1(a), fm = f1(u0[0]), fb = f1(b);
    int grow = 0;
    while ((fa < fm || fb < fm) && grow < 60) {
      if (fa < fm) { b = u0[0]; fb = fm; fm = fa; a -= step; fa = f1(a); }
      else { a = u0[0]; fa = fm; fm = fb; b += step; fb = f1(b); }
      step *= 1.6;
      ++grow;
    }
    int iters = 0;
    const double u_opt = brent_min(f1, a, b, 1e-10, opts.max_iter, &iters);
    best.iterations = iters;
    best.residual = std::fabs(b - a) * 1e-10 + 1e-12;
    tmp[0] = u_opt;
    double fv = f1(u_opt);
    // keep the best of the probed points
    if (fm < fv) { tmp[0] = u0[0]; fv = fm; }
    best.x = tf.to_box(tmp);
    best.fval = -fv;
    best.converged = iters < opts.max_iter;
    return best;
  }

  RngStream jitter(0x8d07f5c1a23ebd4bULL);  // fixed: fits deterministically
  Eigen::VectorXd ustart = u0;
  for (int r = 0; r <= opts.restarts; ++r) {
    const NmOutcome out = nelder_mead(negfn, ustart, opts.rel_ftol, opts.max_iter);
    if (-out.f > best.fval) {
      best.x = tf.to_box(out.u);
      best.fval = -out.f;
      best.iterations += out.iterations;
      best.converged = out.converged;
      best.residual = out.spread;
    } else {
      best.iterations += out.iterations;
    }
    if (r < opts.restarts) {
      // jitter around the incumbent in unconstrained coordinates
      ustart = tf.to_unconstrained(best.x);
      for (Eigen::Index i = 0; i < d; ++i)
        ustart[i] += opts.restart_scale * draw_normal(jitter);
    }
  }
  if (!std::isfinite(best.fval))
    throw NumericError("maximize: objective not finite anywhere probed");
  return best;
}

}  // namespace plaus
