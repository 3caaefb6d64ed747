#pragma once

#include <cstdint>
#include <vector>

#include "spc/error.hpp"

namespace spc {

/// Addresses one random stream: (master_seed, stream_path) fully determines
/// the draw sequence, and distinct paths give statistically independent
/// streams regardless of execution order. Paths are small integer vectors
/// like [cell, replication, fold, mc-block].
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> stream_path;

  SeedSpec child(std::uint64_t element) const {
    SeedSpec s = *this;
    s.stream_path.push_back(element);
    return s;
  }
};

/// Deterministic random stream: xoshiro256++ seeded by hashing
/// (master_seed, stream_path) with a splitmix64 sponge. All samplers are
/// implemented in-house so draw sequences are bit-exact across platforms.
class RngStream {
 public:
  explicit RngStream(const SeedSpec& spec);

  /// Stream for the sub-path `spec.child(element)`. O(path length).
  RngStream child(std::uint64_t element) const;

  const SeedSpec& spec() const noexcept { return spec_; }

  std::uint64_t next_u64();

  /// Uniform on (0,1) (never returns 0 or 1).
  double uniform();

  double normal();                                   // N(0,1)
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double gamma(double shape, double rate);           // mean shape/rate
  double inv_gamma(double shape, double scale);      // mean scale/(shape-1)
  double beta(double a, double b);
  double exponential(double rate);
  long poisson(double lambda);
  long binomial(long trials, double prob);
  long geometric_from_zero(double theta);            // pmf theta (1-theta)^x, x = 0,1,...

  /// Random permutation of 0..n-1 (Fisher-Yates).
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  SeedSpec spec_;
  std::uint64_t state_[4];
  double spare_normal_ = 0.0;
  bool has_spare_ = false;

  void seed_from_spec();
  long poisson_knuth(double lambda);
  long poisson_ptrs(double lambda);
};

}  // namespace spc
