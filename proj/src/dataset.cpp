#include "spc/dataset.hpp"

#include <cmath>

namespace spc {

namespace {

void check_finite(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw Error(ErrorCode::NonFiniteValue, "non-finite value", i);
  }
}

}  // namespace

void validate(const Dataset& data) {
  if (const auto* iid = std::get_if<IidDataset>(&data)) {
    if (iid->values.empty()) throw Error(ErrorCode::EmptyData, "empty dataset");
    check_finite(iid->values);
    return;
  }
  if (const auto* grp = std::get_if<GroupedDataset>(&data)) {
    if (grp->groups.size() < 2)
      throw Error(ErrorCode::EmptyData, "grouped dataset needs at least 2 groups");
    for (std::size_t i = 0; i < grp->groups.size(); ++i) {
      if (grp->groups[i].empty())
        throw Error(ErrorCode::EmptyData, "empty group", i);
      check_finite(grp->groups[i]);
    }
    return;
  }
  const auto& ts = std::get<TimeSeriesDataset>(data);
  if (ts.values.empty()) throw Error(ErrorCode::EmptyData, "empty time series");
  if (ts.values.size() != ts.times.size())
    throw Error(ErrorCode::ShapeMismatch, "time series values/times length mismatch");
  check_finite(ts.values);
  check_finite(ts.times);
  for (std::size_t i = 1; i < ts.times.size(); ++i) {
    if (!(ts.times[i] > ts.times[i - 1]))
      throw Error(ErrorCode::NonMonotoneIndex, "time index not strictly increasing", i);
  }
}

std::size_t dataset_size(const Dataset& data) {
  if (const auto* iid = std::get_if<IidDataset>(&data)) return iid->values.size();
  if (const auto* grp = std::get_if<GroupedDataset>(&data)) return grp->total_size();
  return std::get<TimeSeriesDataset>(data).values.size();
}

std::vector<double> flatten(const Dataset& data) {
  if (const auto* iid = std::get_if<IidDataset>(&data)) return iid->values;
  if (const auto* grp = std::get_if<GroupedDataset>(&data)) {
    std::vector<double> out;
    out.reserve(grp->total_size());
    for (const auto& g : grp->groups) out.insert(out.end(), g.begin(), g.end());
    return out;
  }
  return std::get<TimeSeriesDataset>(data).values;
}

}  // namespace spc
