#include "plaus/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plaus/errors.hpp"

namespace plaus {

namespace {

// Continued fraction for the incomplete beta function (Lentz's algorithm).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericError("reg_inc_beta: continued fraction did not converge");
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730950488016887242097); }

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("norm_quantile: p must be in (0,1)");
  // Acklam's rational approximation, then one Halley step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = norm_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * 3.141592653589793238462643383280) *
                   std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double reg_inc_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("reg_inc_beta: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lbeta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  const double front = std::exp(lbeta + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double t_cdf(double t, double df) {
  if (!(df > 0.0)) throw DomainError("t_cdf: df must be positive");
  if (t == 0.0) return 0.5;
  const double x = df / (df + t * t);
  const double p = 0.5 * reg_inc_beta(0.5 * df, 0.5, x);
  return t > 0.0 ? 1.0 - p : p;
}

double t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("t_quantile: p must be in (0,1)");
  if (p == 0.5) return 0.0;
  // Newton from a normal start, with bisection safeguard.
  double lo = -1.0, hi = 1.0;
  while (t_cdf(lo, df) > p) lo *= 2.0;
  while (t_cdf(hi, df) < p) hi *= 2.0;
  double x = norm_quantile(p);
  if (x < lo || x > hi) x = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double f = t_cdf(x, df) - p;
    if (f > 0.0) hi = x; else lo = x;
    const double lpdf = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                        0.5 * std::log(df * 3.141592653589793238462643383280) -
                        0.5 * (df + 1.0) * std::log1p(x * x / df);
    const double step = f / std::exp(lpdf);
    double xn = x - step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::fabs(xn - x) < 1e-14 * (1.0 + std::fabs(x))) return xn;
    x = xn;
  }
  return x;
}

double chi2_quantile_df1(double p) {
  const double z = norm_quantile(0.5 * (1.0 + p));
  return z * z;
}

double chi2_quantile_df2(double p) { return -2.0 * std::log1p(-p); }

double kolmogorov_Q(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.18) return 1.0;  // series is numerically 1 here
  double s = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    s += (j % 2 == 1) ? term : -term;
    if (term < 1e-18) break;
  }
  return 2.0 * s;
}

double ks_uniform_pvalue(double d, long n) {
  const double sn = std::sqrt(static_cast<double>(n));
  return kolmogorov_Q((sn + 0.12 + 0.11 / sn) * d);
}

double ks_two_sample_sorted(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample_sorted: empty sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i;
    else ++j;
    d = std::max(d,
                 std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_uniform_statistic(std::vector<double> sample) {
  if (sample.empty()) throw DomainError("ks_uniform_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(std::fabs(sample[i] - lo), std::fabs(sample[i] - hi)));
  }
  return d;
}

}  // namespace plaus
