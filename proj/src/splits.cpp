#include "spc/splits.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace spc {

namespace {

std::size_t ceil_frac(double q, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
}

void check_q(double q) {
  if (!(q > 0.0 && q < 1.0))
    throw Error(ErrorCode::InvalidParameter, "split proportion q must be in (0,1)");
}

// Sorted random subset of size m from 0..n-1 (partial Fisher-Yates).
std::vector<std::size_t> random_subset(std::size_t n, std::size_t m, RngStream& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::size_t> out(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> complement_of(const std::vector<std::size_t>& sorted, std::size_t n) {
  std::vector<std::size_t> out;
  out.reserve(n - sorted.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (j < sorted.size() && sorted[j] == i) { ++j; continue; }
    out.push_back(i);
  }
  return out;
}

}  // namespace

SplitStrategy parse_split(std::string_view name, double q) {
  SplitStrategy s;
  s.q = q;
  std::string_view head = name;
  std::string_view arg;
  if (const auto pos = name.find(':'); pos != std::string_view::npos) {
    head = name.substr(0, pos);
    arg = name.substr(pos + 1);
  }
  if (head == "iid_random") s.kind = SplitKind::IidRandom;
  else if (head == "iid_prefix") s.kind = SplitKind::IidPrefix;
  else if (head == "hier_cross") s.kind = SplitKind::HierCross;
  else if (head == "hier_within") s.kind = SplitKind::HierWithin;
  else if (head == "ts_extrapolated") s.kind = SplitKind::TsExtrapolated;
  else if (head == "ts_interpolated") {
    s.kind = SplitKind::TsInterpolated;
    if (!arg.empty()) {
      std::size_t m = 0;
      const auto res = std::from_chars(arg.data(), arg.data() + arg.size(), m);
      if (res.ec != std::errc() || res.ptr != arg.data() + arg.size() || m < 2)
        throw Error(ErrorCode::InvalidParameter, "ts_interpolated block must be >= 2");
      s.block = m;
    }
  } else {
    throw Error(ErrorCode::InvalidParameter, "unknown split strategy: " + std::string(name));
  }
  return s;
}

std::string split_name(const SplitStrategy& s) {
  switch (s.kind) {
    case SplitKind::IidRandom: return "iid_random";
    case SplitKind::IidPrefix: return "iid_prefix";
    case SplitKind::HierCross: return "hier_cross";
    case SplitKind::HierWithin: return "hier_within";
    case SplitKind::TsExtrapolated: return "ts_extrapolated";
    case SplitKind::TsInterpolated:
      return "ts_interpolated:" + std::to_string(s.block);
  }
  return "?";
}

SplitResult split(const Dataset& data, const SplitStrategy& strategy, RngStream& rng) {
  check_q(strategy.q);
  validate(data);
  SplitResult out;
  out.kind = strategy.kind;

  const auto degenerate = [](std::size_t obs, std::size_t ho) {
    return obs == 0 || ho == 0;
  };

  switch (strategy.kind) {
    case SplitKind::IidRandom:
    case SplitKind::IidPrefix: {
      const std::size_t n = dataset_size(data);
      if (std::get_if<GroupedDataset>(&data))
        throw Error(ErrorCode::ShapeMismatch, "i.i.d. split of grouped data");
      const std::size_t m = ceil_frac(strategy.q, n);
      if (degenerate(m, n - m))
        throw Error(ErrorCode::DegenerateSplit, "split leaves an empty side");
      if (strategy.kind == SplitKind::IidPrefix) {
        for (std::size_t i = 0; i < m; ++i) out.observed.push_back(i);
        for (std::size_t i = m; i < n; ++i) out.heldout.push_back(i);
      } else {
        out.observed = random_subset(n, m, rng);
        out.heldout = complement_of(out.observed, n);
      }
      return out;
    }
    case SplitKind::HierCross: {
      const auto* grp = std::get_if<GroupedDataset>(&data);
      if (!grp) throw Error(ErrorCode::ShapeMismatch, "hier_cross split needs grouped data");
      const std::size_t I = grp->groups.size();
      const std::size_t m = ceil_frac(strategy.q, I);
      if (degenerate(m, I - m))
        throw Error(ErrorCode::DegenerateSplit, "split leaves an empty side");
      out.observed = random_subset(I, m, rng);
      out.heldout = complement_of(out.observed, I);
      return out;
    }
    case SplitKind::HierWithin: {
      const auto* grp = std::get_if<GroupedDataset>(&data);
      if (!grp) throw Error(ErrorCode::ShapeMismatch, "hier_within split needs grouped data");
      out.observed_within.resize(grp->groups.size());
      out.heldout_within.resize(grp->groups.size());
      for (std::size_t i = 0; i < grp->groups.size(); ++i) {
        const std::size_t ji = grp->groups[i].size();
        const std::size_t m = ceil_frac(strategy.q, ji);
        if (degenerate(m, ji - m))
          throw Error(ErrorCode::DegenerateSplit, "within-split leaves an empty side", i);
        auto child = rng.child(i);
        out.observed_within[i] = random_subset(ji, m, child);
        out.heldout_within[i] = complement_of(out.observed_within[i], ji);
      }
      return out;
    }
    case SplitKind::TsExtrapolated: {
      if (!std::get_if<TimeSeriesDataset>(&data))
        throw Error(ErrorCode::ShapeMismatch, "ts_extrapolated split needs a time series");
      const std::size_t n = dataset_size(data);
      const std::size_t m = ceil_frac(strategy.q, n);
      if (degenerate(m, n - m))
        throw Error(ErrorCode::DegenerateSplit, "split leaves an empty side");
      for (std::size_t i = 0; i < m; ++i) out.observed.push_back(i);
      for (std::size_t i = m; i < n; ++i) out.heldout.push_back(i);
      return out;
    }
    case SplitKind::TsInterpolated: {
      if (!std::get_if<TimeSeriesDataset>(&data))
        throw Error(ErrorCode::ShapeMismatch, "ts_interpolated split needs a time series");
      const std::size_t n = dataset_size(data);
      std::size_t m = strategy.block;
      if (m == 0) m = std::max<std::size_t>(n / 20, 2);
      if (m < 2) throw Error(ErrorCode::InvalidParameter, "interpolated block must be >= 2");
      const std::size_t per_block = ceil_frac(strategy.q, m);
      for (std::size_t start = 0; start < n; start += m) {
        const std::size_t len = std::min(m, n - start);
        const std::size_t take = std::min(per_block, len);
        for (std::size_t i = 0; i < len; ++i) {
          if (i < take) out.observed.push_back(start + i);
          else out.heldout.push_back(start + i);
        }
      }
      if (degenerate(out.observed.size(), out.heldout.size()))
        throw Error(ErrorCode::DegenerateSplit, "split leaves an empty side");
      return out;
    }
  }
  throw Error(ErrorCode::InvalidParameter, "unknown split kind");
}

Dataset extract(const Dataset& data, const SplitResult& sr, bool heldout_side) {
  switch (sr.kind) {
    case SplitKind::IidRandom:
    case SplitKind::IidPrefix: {
      const auto& v = std::get<IidDataset>(data).values;
      const auto& idx = heldout_side ? sr.heldout : sr.observed;
      IidDataset out;
      out.values.reserve(idx.size());
      for (const auto i : idx) out.values.push_back(v[i]);
      return out;
    }
    case SplitKind::HierCross: {
      const auto& grp = std::get<GroupedDataset>(data);
      const auto& idx = heldout_side ? sr.heldout : sr.observed;
      GroupedDataset out;
      out.groups.reserve(idx.size());
      for (const auto i : idx) out.groups.push_back(grp.groups[i]);
      return out;
    }
    case SplitKind::HierWithin: {
      const auto& grp = std::get<GroupedDataset>(data);
      const auto& idx = heldout_side ? sr.heldout_within : sr.observed_within;
      GroupedDataset out;
      out.groups.resize(grp.groups.size());
      for (std::size_t i = 0; i < grp.groups.size(); ++i) {
        out.groups[i].reserve(idx[i].size());
        for (const auto j : idx[i]) out.groups[i].push_back(grp.groups[i][j]);
      }
      return out;
    }
    case SplitKind::TsExtrapolated:
    case SplitKind::TsInterpolated: {
      const auto& ts = std::get<TimeSeriesDataset>(data);
      const auto& idx = heldout_side ? sr.heldout : sr.observed;
      TimeSeriesDataset out;
      out.values.reserve(idx.size());
      out.times.reserve(idx.size());
      for (const auto i : idx) {
        out.values.push_back(ts.values[i]);
        out.times.push_back(ts.times[i]);
      }
      return out;
    }
  }
  throw Error(ErrorCode::InvalidParameter, "unknown split kind");
}

FoldKind parse_fold_kind(std::string_view name) {
  if (name == "iid_random") return FoldKind::IidRandom;
  if (name == "hier_cross") return FoldKind::HierCross;
  if (name == "hier_within") return FoldKind::HierWithin;
  if (name == "ts_contiguous") return FoldKind::TsContiguous;
  if (name == "ts_strided") return FoldKind::TsStrided;
  throw Error(ErrorCode::InvalidParameter, "unknown fold strategy: " + std::string(name));
}

std::string fold_kind_name(FoldKind kind) {
  switch (kind) {
    case FoldKind::IidRandom: return "iid_random";
    case FoldKind::HierCross: return "hier_cross";
    case FoldKind::HierWithin: return "hier_within";
    case FoldKind::TsContiguous: return "ts_contiguous";
    case FoldKind::TsStrided: return "ts_strided";
  }
  return "?";
}

FoldPlan make_folds(const Dataset& data, std::size_t k, FoldKind kind, RngStream& rng) {
  validate(data);
  if (k < 2) throw Error(ErrorCode::TooManyFolds, "fold count must be >= 2");
  FoldPlan plan;
  plan.kind = kind;
  plan.k = k;

  const auto small_fold_warning = [&](std::size_t per_fold) {
    if (per_fold < 4)
      plan.warnings.push_back("folds of size " + std::to_string(per_fold) +
                              " are small; single-SPC p-values may be unstable");
  };

  switch (kind) {
    case FoldKind::IidRandom: {
      if (std::get_if<GroupedDataset>(&data))
        throw Error(ErrorCode::ShapeMismatch, "i.i.d. folds of grouped data");
      const std::size_t n = dataset_size(data);
      const std::size_t per = n / k;
      if (per < 2) throw Error(ErrorCode::TooManyFolds, "folds would have fewer than 2 elements");
      small_fold_warning(per);
      auto perm = rng.permutation(n);
      plan.folds.assign(k, {});
      for (std::size_t f = 0; f < k; ++f) {
        auto& fold = plan.folds[f];
        fold.assign(perm.begin() + static_cast<std::ptrdiff_t>(f * per),
                    perm.begin() + static_cast<std::ptrdiff_t>((f + 1) * per));
        std::sort(fold.begin(), fold.end());
      }
      plan.dropped = n - k * per;
      return plan;
    }
    case FoldKind::HierCross: {
      const auto* grp = std::get_if<GroupedDataset>(&data);
      if (!grp) throw Error(ErrorCode::ShapeMismatch, "cross folds need grouped data");
      const std::size_t I = grp->groups.size();
      const std::size_t per = I / k;
      if (per < 2) throw Error(ErrorCode::TooManyFolds, "folds would have fewer than 2 groups");
      small_fold_warning(per);
      auto perm = rng.permutation(I);
      plan.folds.assign(k, {});
      for (std::size_t f = 0; f < k; ++f) {
        auto& fold = plan.folds[f];
        fold.assign(perm.begin() + static_cast<std::ptrdiff_t>(f * per),
                    perm.begin() + static_cast<std::ptrdiff_t>((f + 1) * per));
        std::sort(fold.begin(), fold.end());
      }
      plan.dropped = I - k * per;
      return plan;
    }
    case FoldKind::HierWithin: {
      const auto* grp = std::get_if<GroupedDataset>(&data);
      if (!grp) throw Error(ErrorCode::ShapeMismatch, "within folds need grouped data");
      const std::size_t I = grp->groups.size();
      plan.folds_within.assign(k, std::vector<std::vector<std::size_t>>(I));
      std::size_t min_per = SIZE_MAX;
      for (std::size_t i = 0; i < I; ++i) {
        const std::size_t ji = grp->groups[i].size();
        const std::size_t per = ji / k;
        if (per < 1)
          throw Error(ErrorCode::TooManyFolds,
                      "within folds would leave group " + std::to_string(i) + " empty");
        min_per = std::min(min_per, per);
        auto child = rng.child(i);
        auto perm = child.permutation(ji);
        for (std::size_t f = 0; f < k; ++f) {
          auto& part = plan.folds_within[f][i];
          part.assign(perm.begin() + static_cast<std::ptrdiff_t>(f * per),
                      perm.begin() + static_cast<std::ptrdiff_t>((f + 1) * per));
          std::sort(part.begin(), part.end());
        }
        plan.dropped += ji - k * per;
      }
      small_fold_warning(min_per);
      return plan;
    }
    case FoldKind::TsContiguous:
    case FoldKind::TsStrided: {
      if (!std::get_if<TimeSeriesDataset>(&data))
        throw Error(ErrorCode::ShapeMismatch, "time-series folds need a time series");
      const std::size_t n = dataset_size(data);
      const std::size_t per = n / k;
      if (per < 2) throw Error(ErrorCode::TooManyFolds, "folds would have fewer than 2 elements");
      small_fold_warning(per);
      plan.folds.assign(k, {});
      if (kind == FoldKind::TsContiguous) {
        for (std::size_t f = 0; f < k; ++f)
          for (std::size_t i = 0; i < per; ++i) plan.folds[f].push_back(f * per + i);
      } else {
        for (std::size_t f = 0; f < k; ++f)
          for (std::size_t i = 0; i < per; ++i) plan.folds[f].push_back(f + i * k);
      }
      plan.dropped = n - k * per;
      return plan;
    }
  }
  throw Error(ErrorCode::InvalidParameter, "unknown fold kind");
}

Dataset materialize_fold(const Dataset& data, const FoldPlan& plan, std::size_t fold) {
  if (fold >= plan.k) throw Error(ErrorCode::OutOfRange, "fold index out of range");
  switch (plan.kind) {
    case FoldKind::IidRandom: {
      const auto& v = std::get<IidDataset>(data).values;
      IidDataset out;
      out.values.reserve(plan.folds[fold].size());
      for (const auto i : plan.folds[fold]) out.values.push_back(v[i]);
      return out;
    }
    case FoldKind::HierCross: {
      const auto& grp = std::get<GroupedDataset>(data);
      GroupedDataset out;
      out.groups.reserve(plan.folds[fold].size());
      for (const auto i : plan.folds[fold]) out.groups.push_back(grp.groups[i]);
      return out;
    }
    case FoldKind::HierWithin: {
      const auto& grp = std::get<GroupedDataset>(data);
      GroupedDataset out;
      out.groups.resize(grp.groups.size());
      for (std::size_t i = 0; i < grp.groups.size(); ++i) {
        for (const auto j : plan.folds_within[fold][i])
          out.groups[i].push_back(grp.groups[i][j]);
      }
      return out;
    }
    case FoldKind::TsContiguous:
    case FoldKind::TsStrided: {
      const auto& ts = std::get<TimeSeriesDataset>(data);
      TimeSeriesDataset out;
      for (const auto i : plan.folds[fold]) {
        out.values.push_back(ts.values[i]);
        out.times.push_back(ts.times[i]);
      }
      return out;
    }
  }
  throw Error(ErrorCode::InvalidParameter, "unknown fold kind");
}

std::size_t k_from_rule(std::size_t n, double b, double beta) {
  if (n < 2 || !(b > 0.0) || !(beta > 0.0 && beta < 1.0))
    throw Error(ErrorCode::InvalidParameter, "k_from_rule needs N >= 2, b > 0, beta in (0,1)");
  const double k = std::floor(b * std::pow(static_cast<double>(n), beta));
  if (k < 2.0) return 2;
  return static_cast<std::size_t>(k);
}

}  // namespace spc
