#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace voi {

// Stable 64-bit content hash (FNV-1a). std::hash is not stable across
// processes, so every derived seed and provenance hash goes through this.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_combine(std::uint64_t seed, std::string_view bytes);

std::uint64_t splitmix64(std::uint64_t x);

// Seeded random stream. Every stochastic component takes one of these
// explicitly; no global RNG anywhere.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(splitmix64(seed ^ 0x9e3779b97f4a7c15ULL)) {}

  // Independent stream for a named sub-task. Pure function of (seed, label):
  // parallel jobs derive their streams up front in label order, so thread
  // scheduling cannot change results.
  static RngStream derive(std::uint64_t root_seed, std::string_view label) {
    return RngStream(splitmix64(root_seed) ^ fnv1a64(label));
  }

  // Child stream that consumes one draw of this stream's state.
  RngStream fork(std::string_view label) { return RngStream(next_u64() ^ fnv1a64(label)); }

  std::uint64_t next_u64() { return gen_(); }

  double uniform();                       // (0, 1)
  double uniform(double lo, double hi);   // (lo, hi)
  double normal();                        // standard normal
  double normal(double mean, double sd);
  double gamma(double shape, double rate);
  double beta(double a, double b);
  long long binomial(long long n, double p);
  int uniform_int(int lo, int hi);        // inclusive bounds

 private:
  std::mt19937_64 gen_;
};

}  // namespace voi
