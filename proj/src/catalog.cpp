#include "plaus/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plaus/errors.hpp"
#include "plaus/optimize.hpp"
#include "plaus/special.hpp"

namespace plaus {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Eigen::VectorXd vec1(double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  return v;
}

long as_count(double x, const char* what) {
  const double r = std::round(x);
  if (std::fabs(x - r) > 1e-8 || r < 0)
    throw ArgumentError(std::string(what) + ": expected a nonnegative integer count");
  return static_cast<long>(r);
}

// ---------------------------------------------------------------------------
// binomial: one or more count rows, trial totals in `constants`
// ---------------------------------------------------------------------------

struct BinomialSums {
  double s;  // total successes
  double N;  // total trials
};

BinomialSums binomial_sums(const Dataset& y) {
  if (!y.has_constants())
    throw ArgumentError("binomial: trial counts missing (constants column 'n')");
  BinomialSums out{0.0, 0.0};
  for (Eigen::Index i = 0; i < y.n(); ++i) {
    const long Ni = as_count(y.constants[i], "binomial trials");
    const long yi = as_count(y.obs(i, 0), "binomial count");
    if (yi > Ni) throw DomainError("binomial: count exceeds trials");
    out.s += static_cast<double>(yi);
    out.N += static_cast<double>(Ni);
  }
  return out;
}

double binomial_loglik(const Dataset& y, const Eigen::VectorXd& th) {
  const double theta = th[0];
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.n(); ++i) {
    const long Ni = as_count(y.constants[i], "binomial trials");
    const long yi = as_count(y.obs(i, 0), "binomial count");
    if (yi > Ni) return -kInf;
    ll += log_choose(static_cast<double>(Ni), static_cast<double>(yi));
    if (yi > 0) {
      if (theta == 0.0) return -kInf;
      ll += yi * std::log(theta);
    }
    if (Ni - yi > 0) {
      if (theta == 1.0) return -kInf;
      ll += (Ni - yi) * std::log1p(-theta);
    }
  }
  return ll;
}

// Relative likelihood as a function of the total-success count; shared by the
// enumeration path so tied values agree exactly.
double binomial_count_logT(double s, double N, double theta) {
  if (theta == 0.0 && s > 0) return -kInf;
  if (theta == 1.0 && N - s > 0) return -kInf;
  double lt = 0.0;
  if (s > 0) lt += s * std::log(theta);
  if (N - s > 0) lt += (N - s) * std::log1p(-theta);
  const double that = s / N;
  double lhat = 0.0;
  if (s > 0) lhat += s * std::log(that);
  if (N - s > 0) lhat += (N - s) * std::log1p(-that);
  return std::min(lt - lhat, 0.0);
}

ModelSpec make_binomial() {
  ModelSpec m;
  m.name = "binomial";
  m.space = make_space_1d(0.0, 1.0);
  m.loglik = binomial_loglik;
  m.sampler = [](const Eigen::VectorXd& th, Eigen::Index n, const Dataset& proto,
                 RngStream& g) {
    if (!proto.has_constants() || proto.constants.size() < n)
      throw ArgumentError("binomial: sampler needs prototype trial counts");
    Dataset d;
    d.obs.resize(n, 1);
    d.constants = proto.constants.head(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const long Ni = as_count(d.constants[i], "binomial trials");
      d.obs(i, 0) = static_cast<double>(draw_binomial(g, Ni, th[0]));
    }
    return d;
  };
  m.closed.mle = [](const Dataset& y) {
    const BinomialSums bs = binomial_sums(y);
    return vec1(bs.s / bs.N);
  };
  m.init_guess = [](const Dataset& y) {
    const BinomialSums bs = binomial_sums(y);
    return vec1((bs.s + 0.5) / (bs.N + 1.0));
  };
  m.closed.discrete_support = [](const Dataset& y, const Eigen::VectorXd& th) {
    const BinomialSums bs = binomial_sums(y);
    const long N = static_cast<long>(bs.N);
    const double theta = th[0];
    std::vector<DiscretePoint> pts;
    pts.reserve(N + 1);
    for (long s = 0; s <= N; ++s) {
      double lpmf = log_choose(bs.N, s);
      if (s > 0) lpmf += (theta == 0.0 ? -kInf : s * std::log(theta));
      if (N - s > 0) lpmf += (theta == 1.0 ? -kInf : (N - s) * std::log1p(-theta));
      pts.push_back({std::exp(binomial_count_logT(s, bs.N, theta)), std::exp(lpmf)});
    }
    return pts;
  };
  return m;
}

// ---------------------------------------------------------------------------
// poisson
// ---------------------------------------------------------------------------

double poisson_count_logT(double s, double n, double theta) {
  // log relative likelihood for total count s from n units
  if (theta == 0.0) return s > 0 ? -kInf : 0.0;
  const double that = s / n;
  double lt = s * std::log(theta) - n * theta;
  double lhat = (s > 0 ? s * std::log(that) : 0.0) - s;
  return lt - lhat;
}

ModelSpec make_poisson() {
  ModelSpec m;
  m.name = "poisson";
  m.space = make_space_1d(0.0, kInf);
  m.loglik = [](const Dataset& y, const Eigen::VectorXd& th) {
    const double theta = th[0];
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.n(); ++i) {
      const long yi = as_count(y.obs(i, 0), "poisson count");
      if (theta == 0.0) {
        if (yi > 0) return -kInf;
        continue;
      }
      ll += yi * std::log(theta) - theta - std::lgamma(static_cast<double>(yi) + 1.0);
    }
    return ll;
  };
  m.sampler = [](const Eigen::VectorXd& th, Eigen::Index n, const Dataset&,
                 RngStream& g) {
    Dataset d;
    d.obs.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i)
      d.obs(i, 0) = static_cast<double>(draw_poisson(g, th[0]));
    return d;
  };
  m.closed.mle = [](const Dataset& y) { return vec1(y.obs.col(0).mean()); };
  m.init_guess = [](const Dataset& y) { return vec1(y.obs.col(0).mean() + 0.1); };
  m.closed.discrete_support = [](const Dataset& y, const Eigen::VectorXd& th) {
    const double n = static_cast<double>(y.n());
    const double mean = n * th[0];
    std::vector<DiscretePoint> pts;
    double lpmf = -mean;  // log pmf at s = 0
    double cum = 0.0;
    const long hard_cap = static_cast<long>(mean + 80.0 * std::sqrt(mean + 1.0) + 80.0);
    for (long s = 0;; ++s) {
      const double pmf = std::exp(lpmf);
      pts.push_back({std::exp(poisson_count_logT(static_cast<double>(s), n, th[0])), pmf});
      cum += pmf;
      if ((cum >= 1.0 - 1e-12 && s > mean) || s >= hard_cap) break;
      lpmf += std::log(mean) - std::log(static_cast<double>(s + 1));
    }
    return pts;
  };
  m.closed.statistic_sampler = [](const Eigen::VectorXd& th, Eigen::Index n,
                                  RngStream& g) {
    const double nn = static_cast<double>(n);
    const long s = draw_poisson(g, nn * th[0]);
    return std::exp(poisson_count_logT(static_cast<double>(s), nn, th[0]));
  };
  return m;
}

// ---------------------------------------------------------------------------
// lindley: p(y) = theta^2/(theta+1) (y+1) exp(-theta y)
// ---------------------------------------------------------------------------

double lindley_mle_from_mean(double ybar) {
  if (!(ybar > 0)) throw DomainError("lindley: sample mean must be positive");
  return (1.0 - ybar + std::sqrt(ybar * ybar + 6.0 * ybar + 1.0)) / (2.0 * ybar);
}

double lindley_logT_from_mean(double ybar, double n, double theta) {
  const double that = lindley_mle_from_mean(ybar);
  return 2.0 * n * std::log(theta / that) + n * std::log((that + 1.0) / (theta + 1.0)) +
         n * ybar * (that - theta);
}

ModelSpec make_lindley() {
  ModelSpec m;
  m.name = "lindley";
  m.space = make_space_1d(0.0, kInf);
  m.loglik = [](const Dataset& y, const Eigen::VectorXd& th) {
    const double theta = th[0];
    if (theta <= 0.0) return -kInf;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.n(); ++i) {
      const double yi = y.obs(i, 0);
      if (yi < 0.0) return -kInf;
      ll += 2.0 * std::log(theta) - std::log(theta + 1.0) + std::log1p(yi) - theta * yi;
    }
    return ll;
  };
  m.sampler = [](const Eigen::VectorXd& th, Eigen::Index n, const Dataset&,
                 RngStream& g) {
    const double theta = th[0];
    const double w_exp = theta / (theta + 1.0);
    Dataset d;
    d.obs.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = g.uniform();
      const double x = (u < w_exp) ? draw_exponential(g) : draw_gamma(g, 2.0);
      d.obs(i, 0) = x / theta;
    }
    return d;
  };
  m.closed.mle = [](const Dataset& y) {
    return vec1(lindley_mle_from_mean(y.obs.col(0).mean()));
  };
  m.init_guess = [](const Dataset& y) {
    return vec1(lindley_mle_from_mean(y.obs.col(0).mean()));
  };
  m.closed.statistic_sampler = [](const Eigen::VectorXd& th, Eigen::Index n,
                                  RngStream& g) {
    // Sum of n draws: K of the mixture components are Gamma(2), the rest
    // Gamma(1), all with rate theta, so the total is Gamma(n + K)/theta.
    const double theta = th[0];
    const double nn = static_cast<double>(n);
    const double w_gamma2 = 1.0 / (theta + 1.0);
    const long k = draw_binomial(g, static_cast<long>(n), w_gamma2);
    const double total = draw_gamma(g, nn + static_cast<double>(k)) / theta;
    return std::exp(std::min(0.0, lindley_logT_from_mean(total / nn, nn, theta)));
  };
  return m;
}

// ---------------------------------------------------------------------------
// gamma2: (shape, scale)
// ---------------------------------------------------------------------------

ModelSpec make_gamma2() {
  ModelSpec m;
  m.name = "gamma2";
  Eigen::VectorXd lo(2), hi(2);
  lo << 0.0, 0.0;
  hi << kInf, kInf;
  m.space = make_space(lo, hi);
  m.loglik = [](const Dataset& y, const Eigen::VectorXd& th) {
    const double k = th[0], s = th[1];
    if (!(k > 0.0 && s > 0.0)) return -kInf;
    double slog = 0.0, sum = 0.0;
    for (Eigen::Index i = 0; i < y.n(); ++i) {
      const double yi = y.obs(i, 0);
      if (!(yi > 0.0)) return -kInf;
      slog += std::log(yi);
      sum += yi;
    }
    const double n = static_cast<double>(y.n());
    return -n * std::lgamma(k) - n * k * std::log(s) + (k - 1.0) * slog - sum / s;
  };
  m.sampler = [](const Eigen::VectorXd& th, Eigen::Index n, const Dataset&,
                 RngStream& g) {
    Dataset d;
    d.obs.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) d.obs(i, 0) = draw_gamma(g, th[0]) * th[1];
    return d;
  };
  m.init_guess = [](const Dataset& y) {
    const double mean = y.obs.col(0).mean();
    const double var =
        (y.obs.col(0).array() - mean).square().sum() / std::max<double>(1, y.n() - 1);
    Eigen::VectorXd th(2);
    const double v = std::max(var, 1e-12 * mean * mean + 1e-300);
    th[0] = std::max(mean * mean / v, 1e-6);
    th[1] = std::max(v / mean, 1e-12);
    return th;
  };
  m.closed.mle = [](const Dataset& y) {
    // Scale given shape is ybar/k, so the fit reduces to one dimension.
    double slog = 0.0;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < y.n(); ++i) {
      const double yi = y.obs(i, 0);
      if (!(yi > 0.0)) throw DomainError("gamma2: data must be positive");
      slog += std::log(yi);
      sum += yi;
    }
    const double n = static_cast<double>(y.n());
    const double ybar = sum / n;
    const double logybar = std::log(ybar);
    auto neg_profile = [&](double logk) {
      const double k = std::exp(logk);
      // profile log-likelihood with scale = ybar/k
      return -(-n * std::lgamma(k) - n * k * (logybar - logk) + (k - 1.0) * slog -
               n * k);
    };
    // method-of-moments start, bracketed in log space
    const double var = (y.obs.col(0).array() - ybar).square().sum() / std::max(n - 1.0, 1.0);
    double lk0 = std::log(std::max(ybar * ybar / std::max(var, 1e-12), 1e-4));
    double a = lk0 - 2.0, b = lk0 + 2.0;
    while (neg_profile(a) < neg_profile(lk0) && a > -30.0) { b = lk0; lk0 = a; a -= 2.0; }
    while (neg_profile(b) < neg_profile(lk0) && b < 30.0) { a = lk0; lk0 = b; b += 2.0; }
    const double lk = brent_min(neg_profile, a, b, 1e-12, 400);
    Eigen::VectorXd th(2);
    th[0] = std::exp(lk);
    th[1] = ybar / th[0];
    return th;
  };
  return m;
}

// ---------------------------------------------------------------------------
// probit: binary response, fixed design
// ---------------------------------------------------------------------------

ModelSpec make_probit(int covariates) {
  if (covariates < 1) throw ArgumentError("probit: need at least one covariate");
  ModelSpec m;
  m.name = "probit";
  const int p = covariates + 1;
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(p, -kInf);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(p, kInf);
  m.space = make_space(lo, hi);
  m.restart_scale = 0.25;
  auto eta = [p](const Dataset& y, const Eigen::VectorXd& th, Eigen::Index i) {
    double e = th[0];
    for (int j = 1; j < p; ++j) e += th[j] * y.design(i, j - 1);
    return e;
  };
  m.loglik = [eta, p](const Dataset& y, const Eigen::VectorXd& th) {
    if (!y.has_design() || y.design.cols() != p - 1)
      throw ArgumentError("probit: design matrix missing or wrong width");
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.n(); ++i) {
      const long yi = as_count(y.obs(i, 0), "probit response");
      if (yi > 1) throw ArgumentError("probit: responses must be 0/1");
      const double ph = norm_cdf(eta(y, th, i));
      const double pr = yi == 1 ? ph : 1.0 - ph;
      if (pr <= 0.0) return -kInf;
      ll += std::log(pr);
    }
    return ll;
  };
  m.sampler = [eta](const Eigen::VectorXd& th, Eigen::Index n, const Dataset& proto,
                    RngStream& g) {
    if (!proto.has_design() || proto.design.rows() < n)
      throw ArgumentError("probit: sampler needs the prototype design");
    Dataset d;
    d.design = proto.design.topRows(n);
    d.obs.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ph = norm_cdf(eta(d, th, i));
      d.obs(i, 0) = g.uniform() < ph ? 1.0 : 0.0;
    }
    return d;
  };
  m.init_guess = [p](const Dataset& y) {
    // least squares on the latent scale with coarse +-z coding
    const double z34 = norm_quantile(0.75);
    Eigen::MatrixXd X(y.n(), p);
    Eigen::VectorXd z(y.n());
    for (Eigen::Index i = 0; i < y.n(); ++i) {
      X(i, 0) = 1.0;
      for (int j = 1; j < p; ++j) X(i, j) = y.design(i, j - 1);
      z[i] = y.obs(i, 0) > 0.5 ? z34 : -z34;
    }
    Eigen::VectorXd beta = (X.transpose() * X)
                               .ldlt()
                               .solve(X.transpose() * z);
    return beta;
  };
  m.closed.mle = [m, p](const Dataset& y) {
    // Fisher scoring with step halving; fails over to the generic search
    // if the surface misbehaves (e.g. near-separation).
    Eigen::MatrixXd X(y.n(), p);
    for (Eigen::Index i = 0; i < y.n(); ++i) {
      X(i, 0) = 1.0;
      for (int j = 1; j < p; ++j) X(i, j) = y.design(i, j - 1);
    }
    Eigen::VectorXd beta = m.init_guess(y);
    double ll = m.loglik(y, beta);
    const double inv_sqrt2pi = 0.3989422804014326779399460599344;
    bool ok = std::isfinite(ll);
    for (int it = 0; ok && it < 60; ++it) {
      Eigen::VectorXd score = Eigen::VectorXd::Zero(p);
      Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
      for (Eigen::Index i = 0; i < y.n(); ++i) {
        const double eta = X.row(i).dot(beta);
        const double ph = std::min(std::max(norm_cdf(eta), 1e-12), 1.0 - 1e-12);
        const double pdf = inv_sqrt2pi * std::exp(-0.5 * eta * eta);
        const double yi = y.obs(i, 0);
        score += (yi - ph) * pdf / (ph * (1.0 - ph)) * X.row(i).transpose();
        info += pdf * pdf / (ph * (1.0 - ph)) * X.row(i).transpose() * X.row(i);
      }
      Eigen::VectorXd step = info.ldlt().solve(score);
      if (!step.allFinite()) { ok = false; break; }
      double scale = 1.0;
      double ll_new = m.loglik(y, beta + step);
      int halvings = 0;
      while (!(ll_new >= ll) && halvings++ < 30) {
        scale *= 0.5;
        ll_new = m.loglik(y, beta + scale * step);
      }
      if (halvings >= 30) { ok = false; break; }
      beta += scale * step;
      if (ll_new - ll < 1e-12 * (std::fabs(ll) + 1.0)) return beta;
      ll = ll_new;
    }
    if (ok && beta.allFinite()) return beta;
    OptimOptions oo;
    oo.restart_scale = 0.25;
    const OptimResult alt =
        maximize([&](const Eigen::VectorXd& th) { return m.loglik(y, th); }, m.space,
                 m.init_guess(y), oo);
    return alt.x;
  };
  return m;
}

// ---------------------------------------------------------------------------
// norm-mean: Gaussian with known sigma
// ---------------------------------------------------------------------------

ModelSpec make_norm_mean(double sigma) {
  if (!(sigma > 0)) throw ArgumentError("norm-mean: sigma must be positive");
  ModelSpec m;
  m.name = "norm-mean";
  m.space = make_space_1d(-kInf, kInf);
  const double v = sigma * sigma;
  m.loglik = [v](const Dataset& y, const Eigen::VectorXd& th) {
    const double mu = th[0];
    const double n = static_cast<double>(y.n());
    return -0.5 * n * (kLog2Pi + std::log(v)) -
           (y.obs.col(0).array() - mu).square().sum() / (2.0 * v);
  };
  m.sampler = [sigma](const Eigen::VectorXd& th, Eigen::Index n, const Dataset&,
                      RngStream& g) {
    Dataset d;
    d.obs.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) d.obs(i, 0) = th[0] + sigma * draw_normal(g);
    return d;
  };
  m.closed.mle = [](const Dataset& y) { return vec1(y.obs.col(0).mean()); };
  m.init_guess = m.closed.mle;
  m.closed.exact_plaus = [sigma](const Dataset& y, const Eigen::VectorXd& th) {
    // -2 log T = n (ybar - theta)^2 / sigma^2 is exactly chi-square(1)
    const double n = static_cast<double>(y.n());
    const double z = std::sqrt(n) * std::fabs(y.obs.col(0).mean() - th[0]) / sigma;
    return 2.0 * (1.0 - norm_cdf(z));
  };
  return m;
}

// ---------------------------------------------------------------------------
// norm2: Gaussian (mean, variance)
// ---------------------------------------------------------------------------

double norm2_loglik(const Dataset& y, const Eigen::VectorXd& th) {
  const double mu = th[0], v = th[1];
  if (!(v > 0.0)) return -kInf;
  const double n = static_cast<double>(y.n());
  return -0.5 * n * (kLog2Pi + std::log(v)) -
         (y.obs.col(0).array() - mu).square().sum() / (2.0 * v);
}

ModelSpec make_norm2() {
  ModelSpec m;
  m.name = "norm2";
  Eigen::VectorXd lo(2), hi(2);
  lo << -kInf, 0.0;
  hi << kInf, kInf;
  m.space = make_space(lo, hi);
  m.loglik = norm2_loglik;
  m.sampler = [](const Eigen::VectorXd& th, Eigen::Index n, const Dataset&,
                 RngStream& g) {
    const double sd = std::sqrt(th[1]);
    Dataset d;
    d.obs.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) d.obs(i, 0) = th[0] + sd * draw_normal(g);
    return d;
  };
  m.closed.mle = [](const Dataset& y) {
    if (y.n() < 2) throw DomainError("norm2: need at least two observations");
    const double mean = y.obs.col(0).mean();
    const double s2 = (y.obs.col(0).array() - mean).square().sum() /
                      static_cast<double>(y.n());
    if (!(s2 > 0)) throw DomainError("norm2: degenerate sample (zero variance)");
    Eigen::VectorXd th(2);
    th << mean, s2;
    return th;
  };
  m.init_guess = m.closed.mle;
  return m;
}

// ---------------------------------------------------------------------------
// t-mean: marginal mean of norm2
// ---------------------------------------------------------------------------

MarginalModelSpec make_t_mean() {
  MarginalModelSpec m;
  m.base = make_norm2();
  m.base.name = "t-mean";
  m.psi_lower = -kInf;
  m.psi_upper = kInf;
  m.closed.psi_mle = [](const Dataset& y) { return y.obs.col(0).mean(); };
  m.closed.profile_lambda = [](const Dataset& y, double psi) {
    const double s2 = (y.obs.col(0).array() - psi).square().sum() /
                      static_cast<double>(y.n());
    return vec1(std::max(s2, 1e-300));
  };
  m.closed.statistic = [](const Dataset& y, double psi) {
    const double n = static_cast<double>(y.n());
    const double mean = y.obs.col(0).mean();
    const double S2 = (y.obs.col(0).array() - mean).square().sum();
    if (!(S2 > 0)) throw DomainError("t-mean: degenerate sample");
    return std::pow(1.0 + n * (mean - psi) * (mean - psi) / S2, -0.5 * n);
  };
  m.closed.exact_plaus = [](const Dataset& y, double psi) {
    // T is decreasing in |t|, and t has an exact Student distribution
    const double n = static_cast<double>(y.n());
    const double mean = y.obs.col(0).mean();
    const double S2 = (y.obs.col(0).array() - mean).square().sum();
    const double s = std::sqrt(S2 / (n - 1.0));
    const double t = std::sqrt(n) * std::fabs(mean - psi) / s;
    return 2.0 * (1.0 - t_cdf(t, n - 1.0));
  };
  return m;
}

// ---------------------------------------------------------------------------
// np-quantile: interest is the 100p-th quantile; everything flows through
// the below/above counts, so sampling reduces to a binomial draw
// ---------------------------------------------------------------------------

double npq_count_logT(double r, double n, double p) {
  // log of (np/r)^r (n(1-p)/(n-r))^(n-r), the count-based relative likelihood
  double lt = 0.0;
  if (r > 0) lt += r * (std::log(n * p) - std::log(r));
  if (n - r > 0) lt += (n - r) * (std::log(n * (1.0 - p)) - std::log(n - r));
  return std::min(lt, 0.0);
}

MarginalModelSpec make_np_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("np-quantile: p must be in (0,1)");
  MarginalModelSpec m;
  ModelSpec base;
  base.name = "np-quantile";
  base.space = make_space_1d(-kInf, kInf);

  auto sample_quantile = [p](const Dataset& y) {
    std::vector<double> v(y.obs.col(0).data(), y.obs.col(0).data() + y.n());
    std::sort(v.begin(), v.end());
    const long n = static_cast<long>(v.size());
    long k = static_cast<long>(std::ceil(p * static_cast<double>(n)));
    k = std::min(std::max<long>(k, 1), n);
    return v[k - 1];
  };
  auto count_r = [p, sample_quantile](const Dataset& y, double psi) {
    const double n = static_cast<double>(y.n());
    const double psi_hat = sample_quantile(y);
    if (psi == psi_hat) return n * p;
    double r = 0.0;
    if (psi < psi_hat) {
      for (Eigen::Index i = 0; i < y.n(); ++i) r += (y.obs(i, 0) <= psi) ? 1.0 : 0.0;
    } else {
      for (Eigen::Index i = 0; i < y.n(); ++i) r += (y.obs(i, 0) < psi) ? 1.0 : 0.0;
    }
    return r;
  };
  auto statistic = [p, count_r](const Dataset& y, double psi) {
    const double n = static_cast<double>(y.n());
    return std::exp(npq_count_logT(count_r(y, psi), n, p));
  };

  base.loglik = [statistic](const Dataset& y, const Eigen::VectorXd& th) {
    return std::log(statistic(y, th[0]));
  };
  base.sampler = [p](const Eigen::VectorXd& th, Eigen::Index n, const Dataset&,
                     RngStream& g) {
    // The statistic depends only on how many observations fall below the
    // interest value, and that count is Binomial(n, p) for every continuous
    // distribution with 100p-th quantile psi.  A two-point stand-in dataset
    // reproduces any given count without ties at psi.
    const long r = draw_binomial(g, static_cast<long>(n), p);
    Dataset d;
    d.obs.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i)
      d.obs(i, 0) = (i < static_cast<Eigen::Index>(r)) ? th[0] - 1.0 : th[0] + 1.0;
    return d;
  };
  base.closed.mle = [sample_quantile](const Dataset& y) {
    return vec1(sample_quantile(y));
  };
  base.init_guess = base.closed.mle;
  base.closed.discrete_support = [p](const Dataset& y, const Eigen::VectorXd& th) {
    (void)th;
    const long n = static_cast<long>(y.n());
    const double nn = static_cast<double>(n);
    std::vector<DiscretePoint> pts;
    pts.reserve(n + 1);
    for (long r = 0; r <= n; ++r) {
      const double lpmf = log_choose(nn, static_cast<double>(r)) +
                          (r > 0 ? r * std::log(p) : 0.0) +
                          (n - r > 0 ? (n - r) * std::log1p(-p) : 0.0);
      pts.push_back({std::exp(npq_count_logT(static_cast<double>(r), nn, p)),
                     std::exp(lpmf)});
    }
    return pts;
  };
  m.base = std::move(base);
  m.psi_lower = -kInf;
  m.psi_upper = kInf;
  m.closed.psi_mle = [sample_quantile](const Dataset& y) { return sample_quantile(y); };
  m.closed.statistic = statistic;
  return m;
}

// ---------------------------------------------------------------------------
// corr: bivariate normal, interest = correlation
// ---------------------------------------------------------------------------

struct BvnMoments {
  double m1, m2, s11, s22, s12, r;
};

BvnMoments bvn_moments(const Dataset& y) {
  if (y.dim() != 2) throw ArgumentError("corr: needs two observation columns");
  if (y.n() < 3) throw DomainError("corr: need at least three observations");
  const double n = static_cast<double>(y.n());
  BvnMoments mo;
  mo.m1 = y.obs.col(0).mean();
  mo.m2 = y.obs.col(1).mean();
  const auto c1 = y.obs.col(0).array() - mo.m1;
  const auto c2 = y.obs.col(1).array() - mo.m2;
  mo.s11 = c1.square().sum() / n;
  mo.s22 = c2.square().sum() / n;
  mo.s12 = (c1 * c2).sum() / n;
  if (!(mo.s11 > 0.0 && mo.s22 > 0.0)) throw DomainError("corr: degenerate sample");
  mo.r = mo.s12 / std::sqrt(mo.s11 * mo.s22);
  mo.r = std::min(std::max(mo.r, -1.0 + 1e-12), 1.0 - 1e-12);
  return mo;
}

MarginalModelSpec make_corr() {
  MarginalModelSpec m;
  ModelSpec base;
  base.name = "corr";
  Eigen::VectorXd lo(5), hi(5);
  lo << -1.0, -kInf, -kInf, 0.0, 0.0;
  hi << 1.0, kInf, kInf, kInf, kInf;
  base.space = make_space(lo, hi);
  base.loglik = [](const Dataset& y, const Eigen::VectorXd& th) {
    const double rho = th[0], mu1 = th[1], mu2 = th[2], s1 = th[3], s2 = th[4];
    if (!(s1 > 0 && s2 > 0) || !(std::fabs(rho) < 1.0)) return -kInf;
    if (y.dim() != 2) throw ArgumentError("corr: needs two observation columns");
    const double om = 1.0 - rho * rho;
    double q = 0.0;
    for (Eigen::Index i = 0; i < y.n(); ++i) {
      const double z1 = (y.obs(i, 0) - mu1) / s1;
      const double z2 = (y.obs(i, 1) - mu2) / s2;
      q += z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2;
    }
    const double n = static_cast<double>(y.n());
    return -n * (kLog2Pi + std::log(s1) + std::log(s2) + 0.5 * std::log(om)) -
           q / (2.0 * om);
  };
  base.sampler = [](const Eigen::VectorXd& th, Eigen::Index n, const Dataset&,
                    RngStream& g) {
    const double rho = th[0];
    const double c = std::sqrt(1.0 - rho * rho);
    Dataset d;
    d.obs.resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double z1 = draw_normal(g);
      const double z2 = draw_normal(g);
      d.obs(i, 0) = th[1] + th[3] * z1;
      d.obs(i, 1) = th[2] + th[4] * (rho * z1 + c * z2);
    }
    return d;
  };
  base.closed.mle = [](const Dataset& y) {
    const BvnMoments mo = bvn_moments(y);
    Eigen::VectorXd th(5);
    th << mo.r, mo.m1, mo.m2, std::sqrt(mo.s11), std::sqrt(mo.s22);
    return th;
  };
  base.init_guess = base.closed.mle;
  m.base = std::move(base);
  m.psi_lower = -1.0;
  m.psi_upper = 1.0;
  m.closed.psi_mle = [](const Dataset& y) { return bvn_moments(y).r; };
  m.closed.profile_lambda = [](const Dataset& y, double psi) {
    // conditional maximizers: means stay put, variances rescale by
    // (1 - psi*r) / (1 - psi^2)
    const BvnMoments mo = bvn_moments(y);
    const double f = (1.0 - psi * mo.r) / (1.0 - psi * psi);
    Eigen::VectorXd lam(4);
    lam << mo.m1, mo.m2, std::sqrt(mo.s11 * f), std::sqrt(mo.s22 * f);
    return lam;
  };
  m.closed.statistic = [](const Dataset& y, double psi) {
    if (!(std::fabs(psi) < 1.0)) return 0.0;
    const BvnMoments mo = bvn_moments(y);
    const double n = static_cast<double>(y.n());
    const double base_val = std::sqrt((1.0 - psi * psi) * (1.0 - mo.r * mo.r)) /
                            (1.0 - psi * mo.r);
    return std::min(std::pow(base_val, n), 1.0);
  };
  return m;
}

// ---------------------------------------------------------------------------
// gamma-mean: gamma with mean psi and shape lambda
// ---------------------------------------------------------------------------

MarginalModelSpec make_gamma_mean() {
  MarginalModelSpec m;
  ModelSpec base;
  base.name = "gamma-mean";
  Eigen::VectorXd lo(2), hi(2);
  lo << 0.0, 0.0;
  hi << kInf, kInf;
  base.space = make_space(lo, hi);
  base.loglik = [](const Dataset& y, const Eigen::VectorXd& th) {
    const double psi = th[0], lam = th[1];
    if (!(psi > 0.0 && lam > 0.0)) return -kInf;
    double slog = 0.0, sum = 0.0;
    for (Eigen::Index i = 0; i < y.n(); ++i) {
      const double yi = y.obs(i, 0);
      if (!(yi > 0.0)) return -kInf;
      slog += std::log(yi);
      sum += yi;
    }
    const double n = static_cast<double>(y.n());
    return n * (lam * std::log(lam / psi) - std::lgamma(lam)) + (lam - 1.0) * slog -
           lam * sum / psi;
  };
  base.sampler = [](const Eigen::VectorXd& th, Eigen::Index n, const Dataset&,
                    RngStream& g) {
    const double scale = th[0] / th[1];
    Dataset d;
    d.obs.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) d.obs(i, 0) = draw_gamma(g, th[1]) * scale;
    return d;
  };
  base.init_guess = [](const Dataset& y) {
    const double mean = y.obs.col(0).mean();
    const double var =
        (y.obs.col(0).array() - mean).square().sum() / std::max<double>(1, y.n() - 1);
    Eigen::VectorXd th(2);
    th << mean, std::max(mean * mean / std::max(var, 1e-12), 1e-3);
    return th;
  };
  m.base = std::move(base);
  m.psi_lower = 0.0;
  m.psi_upper = kInf;
  m.lambda0_policy = Lambda0Policy::kFixed;
  m.lambda0_fixed = vec1(1.0);
  m.closed.psi_mle = [](const Dataset& y) { return y.obs.col(0).mean(); };
  m.closed.statistic = [](const Dataset& y, double psi) {
    if (!(psi > 0.0)) return 0.0;
    double slog = 0.0, sum = 0.0;
    for (Eigen::Index i = 0; i < y.n(); ++i) {
      const double yi = y.obs(i, 0);
      if (!(yi > 0.0)) throw DomainError("gamma-mean: data must be positive");
      slog += std::log(yi);
      sum += yi;
    }
    const double n = static_cast<double>(y.n());
    // log-likelihood via sufficient statistics, profiled over the shape
    auto ll = [&](double mean, double lam) {
      return n * (lam * std::log(lam / mean) - std::lgamma(lam)) +
             (lam - 1.0) * slog - lam * sum / mean;
    };
    auto fit_shape = [&](double mean) {
      auto neg = [&](double loglam) { return -ll(mean, std::exp(loglam)); };
      double c = 0.0;
      double a = -4.0, b = 4.0;
      while (neg(a) < neg(c) && a > -30.0) { b = c; c = a; a -= 3.0; }
      while (neg(b) < neg(c) && b < 30.0) { a = c; c = b; b += 3.0; }
      return std::exp(brent_min(neg, a, b, 1e-11, 300));
    };
    const double ybar = sum / n;
    const double num = ll(psi, fit_shape(psi));
    const double den = ll(ybar, fit_shape(ybar));
    return std::min(std::exp(num - den), 1.0);
  };
  return m;
}

// ---------------------------------------------------------------------------
// ranef: Y_i ~ N(lambda, sigma_i^2 + psi^2), sigma_i known
// ---------------------------------------------------------------------------

struct RanefWork {
  double loglik;  // profile log-likelihood value
};

double ranef_lambda_hat(const Dataset& y, double t /* = psi^2 */) {
  double sw = 0.0, swy = 0.0;
  for (Eigen::Index i = 0; i < y.n(); ++i) {
    const double w = 1.0 / (y.constants[i] * y.constants[i] + t);
    sw += w;
    swy += w * y.obs(i, 0);
  }
  return swy / sw;
}

double ranef_profile_ll(const Dataset& y, double t) {
  const double lam = ranef_lambda_hat(y, t);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.n(); ++i) {
    const double v = y.constants[i] * y.constants[i] + t;
    const double r = y.obs(i, 0) - lam;
    ll += -0.5 * (kLog2Pi + std::log(v)) - r * r / (2.0 * v);
  }
  return ll;
}

// d/dt of the profile log-likelihood (envelope form; lambda term drops out).
double ranef_profile_score(const Dataset& y, double t) {
  const double lam = ranef_lambda_hat(y, t);
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.n(); ++i) {
    const double v = y.constants[i] * y.constants[i] + t;
    const double r = y.obs(i, 0) - lam;
    s += -0.5 / v + 0.5 * r * r / (v * v);
  }
  return s;
}

double ranef_that(const Dataset& y) {
  if (!y.has_constants()) throw ArgumentError("ranef: known sigmas missing");
  // boundary case first
  if (ranef_profile_score(y, 0.0) <= 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  int grow = 0;
  while (ranef_profile_score(y, hi) > 0.0 && grow++ < 200) {
    lo = hi;
    hi *= 2.0;
  }
  if (grow >= 200) throw NumericError("ranef: variance fit diverged");
  for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ranef_profile_score(y, mid) > 0.0) lo = mid;
    else hi = mid;
  }
  const double t = 0.5 * (lo + hi);
  // guard against a spurious interior root below the boundary value
  return ranef_profile_ll(y, t) >= ranef_profile_ll(y, 0.0) ? t : 0.0;
}

MarginalModelSpec make_ranef() {
  MarginalModelSpec m;
  ModelSpec base;
  base.name = "ranef";
  Eigen::VectorXd lo(2), hi(2);
  lo << 0.0, -kInf;
  hi << kInf, kInf;
  base.space = make_space(lo, hi);
  base.loglik = [](const Dataset& y, const Eigen::VectorXd& th) {
    if (!y.has_constants()) throw ArgumentError("ranef: known sigmas missing");
    const double psi = th[0], lam = th[1];
    if (psi < 0.0) return -kInf;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.n(); ++i) {
      const double v = y.constants[i] * y.constants[i] + psi * psi;
      const double r = y.obs(i, 0) - lam;
      ll += -0.5 * (kLog2Pi + std::log(v)) - r * r / (2.0 * v);
    }
    return ll;
  };
  base.sampler = [](const Eigen::VectorXd& th, Eigen::Index n, const Dataset& proto,
                    RngStream& g) {
    if (!proto.has_constants() || proto.constants.size() < n)
      throw ArgumentError("ranef: sampler needs prototype sigmas");
    Dataset d;
    d.constants = proto.constants.head(n);
    d.obs.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sd = std::sqrt(d.constants[i] * d.constants[i] + th[0] * th[0]);
      d.obs(i, 0) = th[1] + sd * draw_normal(g);
    }
    return d;
  };
  base.init_guess = [](const Dataset& y) {
    Eigen::VectorXd th(2);
    th << 0.5, y.obs.col(0).mean();
    return th;
  };
  m.base = std::move(base);
  m.psi_lower = 0.0;
  m.psi_upper = kInf;
  m.closed.psi_mle = [](const Dataset& y) { return std::sqrt(ranef_that(y)); };
  m.closed.profile_lambda = [](const Dataset& y, double psi) {
    if (!y.has_constants()) throw ArgumentError("ranef: known sigmas missing");
    return vec1(ranef_lambda_hat(y, psi * psi));
  };
  m.closed.statistic = [](const Dataset& y, double psi) {
    if (psi < 0.0) return 0.0;
    const double that = ranef_that(y);
    const double t = std::exp(ranef_profile_ll(y, psi * psi) - ranef_profile_ll(y, that));
    return std::min(t, 1.0);
  };
  return m;
}

}  // namespace

ModelSpec binomial_model() { return make_binomial(); }
ModelSpec poisson_model() { return make_poisson(); }
ModelSpec lindley_model() { return make_lindley(); }
ModelSpec gamma2_model() { return make_gamma2(); }
ModelSpec probit_model(int covariates) { return make_probit(covariates); }
ModelSpec norm_mean_model(double sigma) { return make_norm_mean(sigma); }
ModelSpec norm2_model() { return make_norm2(); }
MarginalModelSpec t_mean_model() { return make_t_mean(); }
MarginalModelSpec np_quantile_model(double p) { return make_np_quantile(p); }
MarginalModelSpec corr_model() { return make_corr(); }
MarginalModelSpec gamma_mean_model() { return make_gamma_mean(); }
MarginalModelSpec ranef_model() { return make_ranef(); }

std::vector<AnyModel> builtin_catalog() {
  std::vector<AnyModel> all;
  all.emplace_back(binomial_model());
  all.emplace_back(poisson_model());
  all.emplace_back(lindley_model());
  all.emplace_back(gamma2_model());
  all.emplace_back(probit_model());
  all.emplace_back(norm_mean_model());
  all.emplace_back(norm2_model());
  all.emplace_back(t_mean_model());
  all.emplace_back(np_quantile_model());
  all.emplace_back(corr_model());
  all.emplace_back(gamma_mean_model());
  all.emplace_back(ranef_model());
  return all;
}

const std::string& model_name(const AnyModel& m) {
  return std::visit([](const auto& x) -> const std::string& {
    if constexpr (std::is_same_v<std::decay_t<decltype(x)>, ModelSpec>)
      return x.name;
    else
      return x.base.name;
  }, m);
}

bool is_marginal(const AnyModel& m) {
  return std::holds_alternative<MarginalModelSpec>(m);
}

AnyModel find_model(const std::string& id) {
  for (auto& entry : builtin_catalog()) {
    if (model_name(entry) == id) return entry;
  }
  throw ArgumentError("unknown model id: " + id);
}

std::vector<std::string> catalog_ids() {
  std::vector<std::string> ids;
  for (const auto& entry : builtin_catalog()) ids.push_back(model_name(entry));
  return ids;
}

}  // namespace plaus
