#pragma once

#include <array>
#include <cstdint>

namespace plaus {

// Counter-derived random stream: the four key words fully determine the
// sequence, so a (seed, purpose, major, minor) tuple always reproduces the
// same draws regardless of scheduling or platform.  Generator is
// xoshiro256++ seeded through a splitmix64 expansion of the keys.
class RngStream {
 public:
  explicit RngStream(std::uint64_t k0, std::uint64_t k1 = 0, std::uint64_t k2 = 0,
                     std::uint64_t k3 = 0);

  std::uint64_t next();

  // Uniform on [0,1) with 53 random bits.
  double uniform();
  // Uniform on the open interval (0,1); safe to pass through log().
  double uniform_open();

 private:
  std::array<std::uint64_t, 4> state_;
};

// Stream purposes used to keep substreams of one base seed disjoint.
namespace stream_tag {
inline constexpr std::uint64_t engine = 1;
inline constexpr std::uint64_t engine_retry = 2;
inline constexpr std::uint64_t bootstrap = 3;
inline constexpr std::uint64_t study_data = 4;
inline constexpr std::uint64_t study_sigma = 5;
inline constexpr std::uint64_t study_engine = 6;
inline constexpr std::uint64_t set_search = 7;
inline constexpr std::uint64_t sensitivity = 8;
inline constexpr std::uint64_t generic = 9;
}  // namespace stream_tag

// 64-bit mixer used for key folding; exposed for deriving per-cell seeds.
std::uint64_t mix64(std::uint64_t z);

// --- samplers -------------------------------------------------------------
// All samplers consume only the given stream; no global state.

double draw_normal(RngStream& g);                      // standard normal
double draw_exponential(RngStream& g);                 // unit mean
double draw_gamma(RngStream& g, double shape);         // unit scale
long draw_binomial(RngStream& g, long n, double p);    // counts in {0..n}
long draw_poisson(RngStream& g, double mean);

}  // namespace plaus
