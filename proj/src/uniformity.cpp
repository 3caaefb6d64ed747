#include "spc/uniformity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "spc/error.hpp"

namespace spc {

double ks_statistic(std::span<const double> sample) {
  if (sample.empty()) throw Error(ErrorCode::EmptyData, "ks_statistic on empty sample");
  std::vector<double> u(sample.begin(), sample.end());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] >= 0.0 && u[i] <= 1.0))
      throw Error(ErrorCode::OutOfRange, "ks_statistic sample value outside [0,1]", i);
  }
  std::sort(u.begin(), u.end());
  const double k = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double hi = (static_cast<double>(i) + 1.0) / k - u[i];
    const double lo = u[i] - static_cast<double>(i) / k;
    d = std::max(d, std::max(hi, lo));
  }
  return d;
}

double kolmogorov_cdf(double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidParameter, "kolmogorov_cdf needs t >= 0");
  if (t < 1e-8) return 0.0;
  if (t < 0.5) {
    // Jacobi theta form: K(t) = sqrt(2 pi)/t * sum exp(-(2i-1)^2 pi^2 / (8 t^2)).
    const double f = std::numbers::pi * std::numbers::pi / (8.0 * t * t);
    double s = 0.0;
    for (int i = 1; i < 40; ++i) {
      const double term = std::exp(-static_cast<double>((2 * i - 1) * (2 * i - 1)) * f);
      s += term;
      if (term < 1e-17) break;
    }
    return std::sqrt(2.0 * std::numbers::pi) / t * s;
  }
  double s = 0.0;
  double sign = 1.0;
  for (int i = 1; i < 1000; ++i) {
    const double term = 2.0 * std::exp(-2.0 * static_cast<double>(i) * static_cast<double>(i) * t * t);
    s += sign * term;
    sign = -sign;
    if (term < 1e-14) break;
  }
  return std::clamp(1.0 - s, 0.0, 1.0);
}

PValue ks_uniform_pvalue(std::span<const double> sample) {
  return ks_uniform_report(sample).p;
}

KsReport ks_uniform_report(std::span<const double> sample) {
  KsReport rep;
  rep.k = sample.size();
  rep.d = ks_statistic(sample);
  const double sk = std::sqrt(static_cast<double>(rep.k));
  rep.scaled = sk * rep.d;
  rep.p = PValue{1.0 - kolmogorov_cdf(rep.scaled + 1.0 / (6.0 * sk)), {}};
  return rep;
}

}  // namespace spc
