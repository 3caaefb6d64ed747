#include "spc/rng.hpp"

#include <cmath>

namespace spc {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

void RngStream::seed_from_spec() {
  // Sponge: absorb master seed and each path element through splitmix64,
  // then squeeze the four xoshiro words.
  std::uint64_t h = spec_.master_seed ^ 0xA3EC647659359ACDULL;
  (void)splitmix64(h);
  for (std::uint64_t e : spec_.stream_path) {
    h ^= splitmix64(h) ^ (e * 0xD6E8FEB86659FD93ULL + 0x2545F4914F6CDD1DULL);
    (void)splitmix64(h);
  }
  for (auto& w : state_) w = splitmix64(h);
  has_spare_ = false;
}

RngStream::RngStream(const SeedSpec& spec) : spec_(spec) { seed_from_spec(); }

RngStream RngStream::child(std::uint64_t element) const {
  return RngStream(spec_.child(element));
}

std::uint64_t RngStream::next_u64() {
  // xoshiro256++ (Blackman & Vigna)
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
  for (;;) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double RngStream::normal() {
  // Marsaglia polar with one cached spare.
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s >= 1.0 || s == 0.0) continue;
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * m;
    has_spare_ = true;
    return u * m;
  }
}

double RngStream::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw Error(ErrorCode::InvalidParameter, "gamma sampler needs shape, rate > 0");
  if (shape < 1.0) {
    // Boost via Gamma(shape+1) * U^{1/shape}.
    const double g = gamma(shape + 1.0, 1.0);
    return g * std::pow(uniform(), 1.0 / shape) / rate;
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double RngStream::inv_gamma(double shape, double scale) {
  if (!(scale >= 0.0))
    throw Error(ErrorCode::InvalidParameter, "inv_gamma scale must be nonnegative");
  return scale / gamma(shape, 1.0);
}

double RngStream::beta(double a, double b) {
  const double x = gamma(a, 1.0);
  const double y = gamma(b, 1.0);
  return x / (x + y);
}

double RngStream::exponential(double rate) { return -std::log(uniform()) / rate; }

long RngStream::poisson_knuth(double lambda) {
  const double limit = std::exp(-lambda);
  long k = 0;
  double prod = uniform();
  while (prod > limit) {
    ++k;
    prod *= uniform();
  }
  return k;
}

long RngStream::poisson_ptrs(double lambda) {
  // Hormann's transformed rejection with squeeze (PTRS), exact for lambda >= 10.
  const double log_lambda = std::log(lambda);
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const double k = kf;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_lambda - lambda - std::lgamma(k + 1.0))
      return static_cast<long>(kf);
  }
}

long RngStream::poisson(double lambda) {
  if (!(lambda >= 0.0))
    throw Error(ErrorCode::InvalidParameter, "poisson rate must be nonnegative");
  if (lambda == 0.0) return 0;
  if (lambda < 10.0) return poisson_knuth(lambda);
  return poisson_ptrs(lambda);
}

long RngStream::binomial(long trials, double prob) {
  if (trials < 0 || !(prob >= 0.0 && prob <= 1.0))
    throw Error(ErrorCode::InvalidParameter, "binomial needs trials >= 0, prob in [0,1]");
  if (prob == 0.0 || trials == 0) return 0;
  if (prob == 1.0) return trials;
  if (prob > 0.5) return trials - binomial(trials, 1.0 - prob);
  // CDF inversion walk; fine for the moderate n*p used here.
  const double q = 1.0 - prob;
  const double ratio = prob / q;
  double pmf = std::pow(q, static_cast<double>(trials));
  double cdf = pmf;
  const double u = uniform();
  long k = 0;
  while (u > cdf && k < trials) {
    pmf *= ratio * static_cast<double>(trials - k) / static_cast<double>(k + 1);
    cdf += pmf;
    ++k;
  }
  return k;
}

long RngStream::geometric_from_zero(double theta) {
  if (!(theta > 0.0 && theta <= 1.0))
    throw Error(ErrorCode::InvalidParameter, "geometric success prob must be in (0,1]");
  if (theta == 1.0) return 0;
  const double denom = std::log1p(-theta);
  return static_cast<long>(std::floor(std::log(uniform()) / denom));
}

std::vector<std::size_t> RngStream::permutation(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(next_u64() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace spc
