#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spc/models.hpp"
#include "spc/pvalue.hpp"
#include "spc/splits.hpp"
#include "spc/statistics.hpp"

namespace spc {

enum class CheckMethod { Ppc, PopPcV1, SingleSpc, DividedSpc };

CheckMethod parse_method(std::string_view name);
std::string method_name(CheckMethod method);

enum class TieMode { Strict, MidP };

struct FoldRule {
  double b = 1.0;
  double beta = 0.49;
};

struct CheckConfig {
  CheckMethod method = CheckMethod::SingleSpc;
  StatisticSpec statistic;
  double q = 0.5;                               // SPC split proportion
  SplitKind inner_split = SplitKind::IidRandom; // per-check / per-fold split
  std::size_t ts_block = 0;                     // inner ts_interpolated block m
  FoldKind outer_split = FoldKind::IidRandom;   // divided: fold formation
  std::optional<std::size_t> k;                 // divided: explicit fold count
  FoldRule fold_rule;                           // divided: k = floor(b U^beta) otherwise
  std::size_t mc_samples = 1000;                // S
  TieMode tie_mode = TieMode::Strict;           // ties count 1/2 in MidP
  std::size_t pop_outer_reps = 1;               // POP-PC-v1 fresh datasets (see README)
  bool keep_replicate_stats = false;            // stash T(rep_s) in diagnostics
};

struct CheckDiagnostics {
  std::size_t n_observed = 0;
  std::size_t n_heldout = 0;
  std::size_t k = 0;
  std::size_t mc_samples = 0;
  std::string seed_trail;
  std::vector<std::string> warnings;
  std::vector<double> replicate_stats;
  double observed_stat = 0.0;
  bool has_observed_stat = false;
};

struct CheckResult {
  PValue p;
  PValue p_two_sided;
  std::optional<std::vector<PValue>> fold_pvalues;
  CheckDiagnostics diagnostics;
};

/// Posterior predictive check: condition on the full data, replicate the full
/// shape, p = (1/S) sum 1{T(x) > T(Y_s)}.
CheckResult ppc(const Model& model, const Dataset& data, const CheckConfig& cfg,
                const SeedSpec& seed);

/// Single q-SPC: fit on the observed part of the split, replicate the
/// held-out shape, p = (1/S) sum 1{T(x_ho) > T(x_rep,s)}.
CheckResult single_spc(const Model& model, const Dataset& data, const CheckConfig& cfg,
                       const SeedSpec& seed);

/// Single SPC on a caller-provided split (same stream layout as single_spc).
CheckResult single_spc_with_split(const Model& model, const Dataset& data,
                                  const SplitResult& split, const CheckConfig& cfg,
                                  const SeedSpec& seed);

/// Divided SPC: k folds, one single-SPC p-value per fold on independent
/// streams, assimilated by the KS uniformity test.
CheckResult divided_spc(const Model& model, const Dataset& data, const CheckConfig& cfg,
                        const SeedSpec& seed);

/// POP-PC-v1 (simulation only): p = mean over replicates and fresh datasets
/// of 1{T(Y_s) > T(X_new,r)} with Y ~ posterior predictive given the full
/// data and X_new ~ the true generating distribution.
CheckResult pop_pc_v1(const Model& model, const Dataset& data, const TruthSpec& truth,
                      const CheckConfig& cfg, const SeedSpec& seed);

/// Dispatch on cfg.method; POP-PC-v1 requires a truth (TruthUnavailable otherwise).
CheckResult run_check(const Model& model, const Dataset& data,
                      const std::optional<TruthSpec>& truth, const CheckConfig& cfg,
                      const SeedSpec& seed);

}  // namespace spc
