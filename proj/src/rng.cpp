#include "plaus/rng.hpp"

#include <cmath>

#include "plaus/errors.hpp"

namespace plaus {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t k0, std::uint64_t k1, std::uint64_t k2,
                     std::uint64_t k3) {
  // Fold the key tuple into one word, then expand to the 256-bit state.
  std::uint64_t h = mix64(k0 + kGolden);
  h = mix64(h ^ (k1 + 2 * kGolden));
  h = mix64(h ^ (k2 + 3 * kGolden));
  h = mix64(h ^ (k3 + 5 * kGolden));
  for (int i = 0; i < 4; ++i) {
    h += kGolden;
    state_[i] = mix64(h);
  }
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t RngStream::next() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double draw_normal(RngStream& g) {
  // Box-Muller, cosine branch only: fixed two-uniform cost, no carried state.
  const double u1 = g.uniform_open();
  const double u2 = g.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double draw_exponential(RngStream& g) { return -std::log(g.uniform_open()); }

double draw_gamma(RngStream& g, double shape) {
  if (!(shape > 0)) throw DomainError("draw_gamma: shape must be positive");
  if (shape < 1.0) {
    // Boost to shape+1 and scale back.
    const double x = draw_gamma(g, shape + 1.0);
    return x * std::pow(g.uniform_open(), 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = draw_normal(g);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = g.uniform_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

long draw_binomial(RngStream& g, long n, double p) {
  if (n < 0) throw DomainError("draw_binomial: n must be nonnegative");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("draw_binomial: p outside [0,1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (p > 0.5) return n - draw_binomial(g, n, 1.0 - p);
  if (n > 100000) throw NumericError("draw_binomial: n too large for inversion");
  // CDF inversion; p <= 1/2 keeps the k=0 mass representable.
  const double q = 1.0 - p;
  const double r = p / q;
  double prob = std::pow(q, static_cast<double>(n));
  double cum = prob;
  const double u = g.uniform();
  long k = 0;
  while (u > cum && k < n) {
    prob *= r * static_cast<double>(n - k) / static_cast<double>(k + 1);
    cum += prob;
    ++k;
  }
  return k;
}

long draw_poisson(RngStream& g, double mean) {
  if (!(mean >= 0.0)) throw DomainError("draw_poisson: mean must be nonnegative");
  if (mean == 0.0) return 0;
  if (mean > 500.0) throw NumericError("draw_poisson: mean too large for inversion");
  double prob = std::exp(-mean);
  double cum = prob;
  const double u = g.uniform();
  long k = 0;
  // Hard stop far beyond any representable tail mass.
  const long kmax = static_cast<long>(mean + 60.0 * std::sqrt(mean) + 60.0);
  while (u > cum && k < kmax) {
    prob *= mean / static_cast<double>(k + 1);
    cum += prob;
    ++k;
  }
  return k;
}

}  // namespace plaus
