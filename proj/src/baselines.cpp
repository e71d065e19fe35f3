#include "plaus/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plaus/errors.hpp"
#include "plaus/likelihood.hpp"
#include "plaus/optimize.hpp"
#include "plaus/special.hpp"
#include "plaus/util.hpp"

namespace plaus {

namespace {

// Observed information of a scalar objective, differenced on the
// unconstrained scale and delta-mapped back to the natural scale.
double natural_se(const std::function<double(double)>& logf, double x_hat, double lo,
                  double hi) {
  const double u = to_unconstrained_coord(x_hat, lo, hi);
  const double h = std::max(1e-5, 1e-5 * std::fabs(u));
  const double xp = to_box_coord(u + h, lo, hi);
  const double xm = to_box_coord(u - h, lo, hi);
  const double f0 = logf(x_hat), fp = logf(xp), fm = logf(xm);
  const double info_u = -(fp - 2.0 * f0 + fm) / (h * h);
  if (!(info_u > 0.0) || !std::isfinite(info_u))
    throw NumericError("wald_interval: observed information is singular");
  const double dxdu = (xp - xm) / (2.0 * h);
  return std::fabs(dxdu) / std::sqrt(info_u);
}

IntervalEstimate clipped(std::string method, double center, double half, double lo_bound,
                         double hi_bound, double alpha) {
  IntervalEstimate iv;
  iv.method = std::move(method);
  iv.lo = std::max(center - half, lo_bound);
  iv.hi = std::min(center + half, hi_bound);
  iv.alpha = alpha;
  return iv;
}

IntervalEstimate percentile_from(std::vector<double> est, int failures, int B,
                                 double alpha, const std::string& method) {
  if (failures > std::max(1, B / 100))
    throw NumericError("bootstrap_percentile: estimator failed on >1% of resamples");
  IntervalEstimate iv;
  iv.method = method;
  iv.alpha = alpha;
  iv.lo = quantile_type7(est, alpha / 2.0);
  iv.hi = quantile_type7(std::move(est), 1.0 - alpha / 2.0);
  return iv;
}

}  // namespace

double quantile_type7(std::vector<double> v, double q) {
  if (v.empty()) throw ArgumentError("quantile_type7: empty sample");
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(h);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (h - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

IntervalEstimate wald_interval(const ModelSpec& model, const Dataset& y, double alpha) {
  if (model.space.dims() != 1)
    throw ArgumentError("wald_interval: scalar-parameter models only");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must be in (0,1)");
  const FitResult fit = mle(model, y);
  const double th = fit.argmax[0];
  auto logf = [&](double x) {
    Eigen::VectorXd v(1);
    v[0] = x;
    return loglik(model, y, v);
  };
  const double se = natural_se(logf, th, model.space.lower[0], model.space.upper[0]);
  const double z = norm_quantile(1.0 - alpha / 2.0);
  return clipped("wald", th, z * se, model.space.lower[0], model.space.upper[0], alpha);
}

IntervalEstimate wald_interval(const MarginalModelSpec& model, const Dataset& y,
                               double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must be in (0,1)");
  const FitResult global = marginal_mle(model, y);
  const double psi_hat = global.argmax[0];
  auto logf = [&](double psi) { return profile_fit(model, y, psi).logmax; };
  const double se = natural_se(logf, psi_hat, model.psi_lower, model.psi_upper);
  const double z = norm_quantile(1.0 - alpha / 2.0);
  return clipped("wald", psi_hat, z * se, model.psi_lower, model.psi_upper, alpha);
}

IntervalEstimate clopper_pearson(long n, long y, double alpha) {
  if (n <= 0 || y < 0 || y > n) throw ArgumentError("clopper_pearson: need 0 <= y <= n");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must be in (0,1)");
  IntervalEstimate iv;
  iv.method = "clopper-pearson";
  iv.alpha = alpha;
  const double a2 = alpha / 2.0;
  const double yy = static_cast<double>(y);
  const double nn = static_cast<double>(n);
  if (y == 0) {
    iv.lo = 0.0;
  } else {
    // P(Y >= y | theta) = I_theta(y, n-y+1) = alpha/2
    iv.lo = bisect_root(
        [&](double th) { return reg_inc_beta(yy, nn - yy + 1.0, th) - a2; }, 0.0, 1.0,
        1e-13, 200);
  }
  if (y == n) {
    iv.hi = 1.0;
  } else {
    // P(Y <= y | theta) = 1 - I_theta(y+1, n-y) = alpha/2
    iv.hi = bisect_root(
        [&](double th) { return 1.0 - reg_inc_beta(yy + 1.0, nn - yy, th) - a2; }, 0.0,
        1.0, 1e-13, 200);
  }
  return iv;
}

IntervalEstimate bootstrap_percentile(const ModelSpec& model, const Dataset& y,
                                      double alpha, int B, std::uint64_t seed,
                                      int workers) {
  if (model.space.dims() != 1)
    throw ArgumentError("bootstrap_percentile: scalar-parameter models only");
  if (B < 10) throw ArgumentError("bootstrap_percentile: B too small");
  const FitResult fit = mle(model, y);
  std::vector<double> est(B);
  std::vector<char> bad(B, 0);
  parallel_for(B, workers, [&](std::int64_t b) {
    RngStream g(seed, stream_tag::bootstrap, static_cast<std::uint64_t>(b));
    try {
      const Dataset yb = simulate(model, fit.argmax, y.n(), y, g);
      est[b] = mle(model, yb).argmax[0];
    } catch (const NumericError&) {
      bad[b] = 1;
    } catch (const DomainError&) {
      bad[b] = 1;
    }
  });
  std::vector<double> good;
  good.reserve(B);
  int failures = 0;
  for (int b = 0; b < B; ++b) {
    if (bad[b]) ++failures;
    else good.push_back(est[b]);
  }
  return percentile_from(std::move(good), failures, B, alpha, "pboot");
}

IntervalEstimate bootstrap_percentile(const MarginalModelSpec& model, const Dataset& y,
                                      double alpha, int B, std::uint64_t seed,
                                      int workers) {
  if (B < 10) throw ArgumentError("bootstrap_percentile: B too small");
  const FitResult global = marginal_mle(model, y);
  std::vector<double> est(B);
  std::vector<char> bad(B, 0);
  parallel_for(B, workers, [&](std::int64_t b) {
    RngStream g(seed, stream_tag::bootstrap, static_cast<std::uint64_t>(b));
    try {
      const Dataset yb = simulate(model.base, global.argmax, y.n(), y, g);
      est[b] = model.closed.psi_mle ? model.closed.psi_mle(yb)
                                    : marginal_mle(model, yb).argmax[0];
    } catch (const NumericError&) {
      bad[b] = 1;
    } catch (const DomainError&) {
      bad[b] = 1;
    }
  });
  std::vector<double> good;
  good.reserve(B);
  int failures = 0;
  for (int b = 0; b < B; ++b) {
    if (bad[b]) ++failures;
    else good.push_back(est[b]);
  }
  return percentile_from(std::move(good), failures, B, alpha, "pboot");
}

IntervalEstimate fisher_z_interval(double psi_hat, long n, double alpha) {
  if (!(std::fabs(psi_hat) < 1.0))
    throw ArgumentError("fisher_z_interval: |psi_hat| must be below 1");
  if (n < 4) throw ArgumentError("fisher_z_interval: need n >= 4");
  const double z = std::atanh(psi_hat);
  const double half = norm_quantile(1.0 - alpha / 2.0) / std::sqrt(static_cast<double>(n - 3));
  IntervalEstimate iv;
  iv.method = "fisher-z";
  iv.alpha = alpha;
  iv.lo = std::tanh(z - half);
  iv.hi = std::tanh(z + half);
  return iv;
}

double hotelling_z4(double psi, long n) {
  const double z = std::atanh(psi);
  const double nm1 = static_cast<double>(n - 1);
  return z - (3.0 * z + psi) / (4.0 * nm1) -
         (23.0 * z + 33.0 * psi - 5.0 * psi * psi) / (96.0 * nm1 * nm1);
}

IntervalEstimate hotelling_z4_interval(double psi_hat, long n, double alpha) {
  if (!(std::fabs(psi_hat) < 1.0))
    throw ArgumentError("hotelling_z4_interval: |psi_hat| must be below 1");
  if (n < 4) throw ArgumentError("hotelling_z4_interval: need n >= 4");
  const double center = hotelling_z4(psi_hat, n);
  const double half = norm_quantile(1.0 - alpha / 2.0) / std::sqrt(static_cast<double>(n - 1));
  auto invert = [&](double target) {
    const double a = -1.0 + 1e-14, b = 1.0 - 1e-14;
    if (hotelling_z4(a, n) > target) return -1.0;
    if (hotelling_z4(b, n) < target) return 1.0;
    return bisect_root([&](double p) { return hotelling_z4(p, n) - target; }, a, b,
                       1e-13, 200);
  };
  IntervalEstimate iv;
  iv.method = "z4";
  iv.alpha = alpha;
  iv.lo = invert(center - half);
  iv.hi = invert(center + half);
  return iv;
}

}  // namespace plaus
