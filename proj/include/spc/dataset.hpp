#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "spc/error.hpp"

namespace spc {

/// Exchangeable real-valued observations.
struct IidDataset {
  std::vector<double> values;
};

/// Two-level data: group i holds J_i observations; ragged sizes allowed.
struct GroupedDataset {
  std::vector<std::vector<double>> groups;

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.size();
    return n;
  }
};

/// Ordered observations with strictly increasing time stamps.
struct TimeSeriesDataset {
  std::vector<double> values;
  std::vector<double> times;
};

using Dataset = std::variant<IidDataset, GroupedDataset, TimeSeriesDataset>;

/// Throws Error (EmptyData / NonFiniteValue / NonMonotoneIndex) unless all
/// type invariants hold.
void validate(const Dataset& data);

/// Total observation count, any shape.
std::size_t dataset_size(const Dataset& data);

/// Flattened values (grouped data concatenated in group order).
std::vector<double> flatten(const Dataset& data);

}  // namespace spc
