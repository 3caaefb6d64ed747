#pragma once

#include <cstddef>

namespace spc {

/// Standard normal CDF via the complementary error function; relative error
/// at libm erfc level (~1e-15), good deep into the tails.
double normal_cdf(double x);

/// Standard normal quantile (Wichura AS241, double precision).
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x).
double reg_lower_gamma(double a, double x);

/// 95% Wilson score interval for x successes out of n.
struct Interval {
  double low = 0.0;
  double high = 0.0;
};
Interval wilson_interval(std::size_t successes, std::size_t n);

}  // namespace spc
