#include "spc/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>

namespace spc {

bool is_parameter_dependent(const StatisticSpec& spec) {
  return spec.kind == StatKind::MseDiscrepancy;
}

bool needs_grouped(const StatisticSpec& spec) {
  switch (spec.kind) {
    case StatKind::GrandMean:
    case StatKind::MeanOfGroupQuantiles:
    case StatKind::QuantileOfGroupMeans:
      return true;
    default:
      return false;
  }
}

namespace {

double parse_level(std::string_view arg, std::string_view name) {
  double c = 0.0;
  const auto res = std::from_chars(arg.data(), arg.data() + arg.size(), c);
  if (res.ec != std::errc() || res.ptr != arg.data() + arg.size() || !(c > 0.0 && c < 1.0))
    throw Error(ErrorCode::InvalidParameter,
                std::string("quantile level must be in (0,1): ") + std::string(name));
  return c;
}

}  // namespace

StatisticSpec parse_statistic(std::string_view name) {
  std::string_view head = name;
  std::string_view arg;
  if (const auto pos = name.find(':'); pos != std::string_view::npos) {
    head = name.substr(0, pos);
    arg = name.substr(pos + 1);
  }
  StatisticSpec spec;
  if (head == "mean") spec.kind = StatKind::Mean;
  else if (head == "moment2") spec.kind = StatKind::Moment2;
  else if (head == "moment3") spec.kind = StatKind::Moment3;
  else if (head == "std_dev") spec.kind = StatKind::StdDev;
  else if (head == "success_rate") spec.kind = StatKind::SuccessRate;
  else if (head == "grand_mean") spec.kind = StatKind::GrandMean;
  else if (head == "mse") spec.kind = StatKind::MseDiscrepancy;
  else if (head == "quantile") { spec.kind = StatKind::Quantile; spec.level = parse_level(arg, name); }
  else if (head == "mean_group_quantiles") { spec.kind = StatKind::MeanOfGroupQuantiles; spec.level = parse_level(arg, name); }
  else if (head == "quantile_group_means") { spec.kind = StatKind::QuantileOfGroupMeans; spec.level = parse_level(arg, name); }
  else if (head == "autocorr") {
    spec.kind = StatKind::Autocorrelation;
    long lag = -1;
    const auto res = std::from_chars(arg.data(), arg.data() + arg.size(), lag);
    if (res.ec != std::errc() || res.ptr != arg.data() + arg.size() || lag < 0)
      throw Error(ErrorCode::InvalidParameter, "autocorr lag must be a nonnegative integer");
    spec.lag = lag;
  } else {
    throw Error(ErrorCode::InvalidParameter, "unknown statistic: " + std::string(name));
  }
  return spec;
}

std::string statistic_name(const StatisticSpec& spec) {
  const auto with_level = [&](const char* head) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s:%g", head, spec.level);
    return std::string(buf);
  };
  switch (spec.kind) {
    case StatKind::Mean: return "mean";
    case StatKind::Moment2: return "moment2";
    case StatKind::Moment3: return "moment3";
    case StatKind::Quantile: return with_level("quantile");
    case StatKind::StdDev: return "std_dev";
    case StatKind::SuccessRate: return "success_rate";
    case StatKind::Autocorrelation: return "autocorr:" + std::to_string(spec.lag);
    case StatKind::GrandMean: return "grand_mean";
    case StatKind::MeanOfGroupQuantiles: return with_level("mean_group_quantiles");
    case StatKind::QuantileOfGroupMeans: return with_level("quantile_group_means");
    case StatKind::MseDiscrepancy: return "mse";
  }
  return "?";
}

double order_statistic(std::span<const double> values, double c,
                       std::vector<double>& scratch) {
  if (values.empty()) throw Error(ErrorCode::EmptyData, "order statistic of empty data");
  if (!(c > 0.0 && c < 1.0))
    throw Error(ErrorCode::InvalidParameter, "quantile level must be in (0,1)");
  const std::size_t n = values.size();
  const auto rank = static_cast<std::size_t>(
      std::ceil(c * static_cast<double>(n)));  // 1-based, in [1, n]
  scratch.assign(values.begin(), values.end());
  auto nth = scratch.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(scratch.begin(), nth, scratch.end());
  return *nth;
}

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double autocorrelation(std::span<const double> v, long lag) {
  const long n = static_cast<long>(v.size());
  if (lag >= n)
    throw Error(ErrorCode::ShapeMismatch, "autocorrelation lag >= series length");
  const double m = mean_of(v);
  double denom = 0.0;
  for (const double x : v) denom += (x - m) * (x - m);
  if (denom == 0.0)
    throw Error(ErrorCode::DivisionByZero, "autocorrelation of constant series");
  double num = 0.0;
  for (long t = 0; t + lag < n; ++t)
    num += (v[static_cast<std::size_t>(t)] - m) * (v[static_cast<std::size_t>(t + lag)] - m);
  return num / denom;
}

}  // namespace

double evaluate_flat(const StatisticSpec& spec, std::span<const double> v,
                     std::vector<double>& scratch) {
  if (v.empty()) throw Error(ErrorCode::EmptyData, "statistic of empty data");
  const double n = static_cast<double>(v.size());
  switch (spec.kind) {
    case StatKind::Mean:
      return mean_of(v);
    case StatKind::Moment2: {
      double s = 0.0;
      for (const double x : v) s += x * x;
      return s / n;
    }
    case StatKind::Moment3: {
      double s = 0.0;
      for (const double x : v) s += x * x * x;
      return s / n;
    }
    case StatKind::Quantile:
      return order_statistic(v, spec.level, scratch);
    case StatKind::StdDev: {
      const double m = mean_of(v);
      double s = 0.0;
      for (const double x : v) s += (x - m) * (x - m);
      return std::sqrt(s / n);
    }
    case StatKind::SuccessRate: {
      double s = 0.0;
      for (const double x : v) s += x;
      if (s == 0.0)
        throw Error(ErrorCode::DivisionByZero, "success rate of all-zero data");
      return n / s;
    }
    case StatKind::Autocorrelation:
      return autocorrelation(v, spec.lag);
    case StatKind::GrandMean:
      return mean_of(v);
    default:
      throw Error(ErrorCode::ShapeMismatch,
                  "statistic " + statistic_name(spec) + " needs grouped data");
  }
}

double evaluate_grouped(const StatisticSpec& spec, const GroupedDataset& data,
                        std::vector<double>& scratch) {
  if (data.groups.empty()) throw Error(ErrorCode::EmptyData, "statistic of empty data");
  switch (spec.kind) {
    case StatKind::GrandMean: {
      double s = 0.0;
      std::size_t n = 0;
      for (const auto& g : data.groups) {
        for (const double x : g) s += x;
        n += g.size();
      }
      return s / static_cast<double>(n);
    }
    case StatKind::MeanOfGroupQuantiles: {
      double s = 0.0;
      for (const auto& g : data.groups) s += order_statistic(g, spec.level, scratch);
      return s / static_cast<double>(data.groups.size());
    }
    case StatKind::QuantileOfGroupMeans: {
      std::vector<double> means;
      means.reserve(data.groups.size());
      for (const auto& g : data.groups) means.push_back(mean_of(g));
      return order_statistic(means, spec.level, scratch);
    }
    default:
      throw Error(ErrorCode::ShapeMismatch,
                  "statistic " + statistic_name(spec) + " needs flat data");
  }
}

double evaluate(const StatisticSpec& spec, const Dataset& data) {
  if (is_parameter_dependent(spec))
    throw Error(ErrorCode::ShapeMismatch,
                "mse discrepancy needs a parameter value; use evaluate_discrepancy");
  std::vector<double> scratch;
  if (const auto* grp = std::get_if<GroupedDataset>(&data))
    return evaluate_grouped(spec, *grp, scratch);
  if (needs_grouped(spec))
    throw Error(ErrorCode::ShapeMismatch,
                "statistic " + statistic_name(spec) + " needs grouped data");
  if (const auto* iid = std::get_if<IidDataset>(&data))
    return evaluate_flat(spec, iid->values, scratch);
  return evaluate_flat(spec, std::get<TimeSeriesDataset>(data).values, scratch);
}

double mse_flat(std::span<const double> values, double cond_mean) {
  if (values.empty()) throw Error(ErrorCode::EmptyData, "mse of empty data");
  double s = 0.0;
  for (const double x : values) s += (x - cond_mean) * (x - cond_mean);
  return s / static_cast<double>(values.size());
}

double mse_grouped(const GroupedDataset& data, std::span<const double> group_cond_means) {
  if (data.groups.size() != group_cond_means.size())
    throw Error(ErrorCode::ShapeMismatch, "mse_grouped mean count mismatch");
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < data.groups.size(); ++i) {
    for (const double x : data.groups[i])
      s += (x - group_cond_means[i]) * (x - group_cond_means[i]);
    n += data.groups[i].size();
  }
  if (n == 0) throw Error(ErrorCode::EmptyData, "mse of empty data");
  return s / static_cast<double>(n);
}

}  // namespace spc
