#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "spc/dataset.hpp"
#include "spc/rng.hpp"

namespace spc {

enum class SplitKind {
  IidRandom,       // uniformly random ceil(qN)-subset observed
  IidPrefix,       // first ceil(qN) observed
  HierCross,       // ceil(qI) whole groups observed
  HierWithin,      // within each group, ceil(q J_i) observations observed
  TsExtrapolated,  // first ceil(qN) in time order observed
  TsInterpolated,  // per block of m, first ceil(qm) observed
};

struct SplitStrategy {
  SplitKind kind = SplitKind::IidRandom;
  double q = 0.5;
  std::size_t block = 0;  // TsInterpolated block m; 0 = floor(N/20) clamped to >= 2
};

/// Parse config names: iid_random, iid_prefix, hier_cross, hier_within,
/// ts_extrapolated, ts_interpolated:<m>.
SplitStrategy parse_split(std::string_view name, double q);
std::string split_name(const SplitStrategy& strategy);

/// Index sets into the source dataset. Flat strategies fill observed/heldout
/// with element positions; HierCross with group indices; HierWithin fills the
/// per-group position lists instead. Splits never copy data.
struct SplitResult {
  SplitKind kind = SplitKind::IidRandom;
  std::vector<std::size_t> observed;
  std::vector<std::size_t> heldout;
  std::vector<std::vector<std::size_t>> observed_within;
  std::vector<std::vector<std::size_t>> heldout_within;
};

SplitResult split(const Dataset& data, const SplitStrategy& strategy, RngStream& rng);

/// Materialize one side of a split as a dataset (group order and within-group
/// order follow ascending index order).
Dataset extract(const Dataset& data, const SplitResult& split, bool heldout_side);

enum class FoldKind {
  IidRandom,     // random partition of elements
  HierCross,     // partition of groups
  HierWithin,    // partition within every group
  TsContiguous,  // consecutive blocks (extrapolated-style)
  TsStrided,     // strided membership (interpolated-style)
};

FoldKind parse_fold_kind(std::string_view name);
std::string fold_kind_name(FoldKind kind);

/// k disjoint folds of equal unit count floor(U/k) (U = elements, groups, or
/// per-group sizes by kind); remainder dropped. Folds smaller than 4 units
/// warn but are permitted.
struct FoldPlan {
  FoldKind kind = FoldKind::IidRandom;
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> folds;  // element positions or group ids
  std::vector<std::vector<std::vector<std::size_t>>> folds_within;  // [fold][group] positions
  std::size_t dropped = 0;
  std::vector<std::string> warnings;
};

FoldPlan make_folds(const Dataset& data, std::size_t k, FoldKind kind, RngStream& rng);

Dataset materialize_fold(const Dataset& data, const FoldPlan& plan, std::size_t fold);

/// k = floor(b N^beta), clamped below at 2.
std::size_t k_from_rule(std::size_t n, double b, double beta);

}  // namespace spc
