#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spc/dataset.hpp"

namespace spc {

enum class StatKind {
  Mean,
  Moment2,
  Moment3,
  Quantile,
  StdDev,       // divisor N, consistent with the biased autocovariance
  SuccessRate,  // N / sum(x)
  Autocorrelation,
  GrandMean,
  MeanOfGroupQuantiles,
  QuantileOfGroupMeans,
  MseDiscrepancy,  // parameter-dependent: mean squared deviation from E[X|theta]
};

struct StatisticSpec {
  StatKind kind = StatKind::Mean;
  double level = 0.0;  // quantile level c in (0,1)
  long lag = 0;        // autocorrelation lag >= 0
};

bool is_parameter_dependent(const StatisticSpec& spec);
bool needs_grouped(const StatisticSpec& spec);

/// Parse the config/CLI name: mean, moment2, moment3, quantile:<c>, std_dev,
/// success_rate, autocorr:<lag>, grand_mean, mean_group_quantiles:<c>,
/// quantile_group_means:<c>, mse.
StatisticSpec parse_statistic(std::string_view name);
std::string statistic_name(const StatisticSpec& spec);

/// Evaluate a parameter-free statistic. Grouped kinds need a GroupedDataset,
/// flat kinds an IidDataset or TimeSeriesDataset.
double evaluate(const StatisticSpec& spec, const Dataset& data);

/// Fast paths used by the check engine; `scratch` avoids re-allocation in
/// Monte Carlo loops (quantiles partially sort a copy).
double evaluate_flat(const StatisticSpec& spec, std::span<const double> values,
                     std::vector<double>& scratch);
double evaluate_grouped(const StatisticSpec& spec, const GroupedDataset& data,
                        std::vector<double>& scratch);

/// Empirical order statistic at 1-based index ceil(c * n) (no interpolation).
double order_statistic(std::span<const double> values, double c,
                       std::vector<double>& scratch);

/// Mean squared deviation from per-observation conditional means.
double mse_flat(std::span<const double> values, double cond_mean);
double mse_grouped(const GroupedDataset& data, std::span<const double> group_cond_means);

}  // namespace spc
