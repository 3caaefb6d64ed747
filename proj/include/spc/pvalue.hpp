#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>

#include "spc/error.hpp"

namespace spc {

/// A p-value together with its Monte Carlo resolution. `mc_samples` is set
/// when the value came from Monte Carlo counting (then, in strict tie mode,
/// the value is an integer multiple of 1/mc_samples); analytic p-values
/// (e.g. the KS uniformity p-value) leave it empty.
struct PValue {
  double value = 0.0;
  std::optional<std::uint32_t> mc_samples;
};

/// Two-sided transform p_ts = 2 min(p, 1 - p).
inline PValue two_sided(const PValue& p) {
  if (!(p.value >= 0.0 && p.value <= 1.0))
    throw Error(ErrorCode::OutOfRange, "p-value outside [0,1]");
  return PValue{2.0 * std::min(p.value, 1.0 - p.value), p.mc_samples};
}

inline double two_sided(double p) { return two_sided(PValue{p, {}}).value; }

}  // namespace spc
