#include "spc/checks.hpp"

#include <algorithm>
#include <cmath>

#include "spc/uniformity.hpp"

namespace spc {

CheckMethod parse_method(std::string_view name) {
  if (name == "ppc") return CheckMethod::Ppc;
  if (name == "pop_pc_v1") return CheckMethod::PopPcV1;
  if (name == "single_spc") return CheckMethod::SingleSpc;
  if (name == "divided_spc") return CheckMethod::DividedSpc;
  throw Error(ErrorCode::InvalidParameter, "unknown method: " + std::string(name));
}

std::string method_name(CheckMethod method) {
  switch (method) {
    case CheckMethod::Ppc: return "ppc";
    case CheckMethod::PopPcV1: return "pop_pc_v1";
    case CheckMethod::SingleSpc: return "single_spc";
    case CheckMethod::DividedSpc: return "divided_spc";
  }
  return "?";
}

namespace {

std::string seed_trail(const SeedSpec& seed) {
  std::string s = "seed=" + std::to_string(seed.master_seed) + " path=[";
  for (std::size_t i = 0; i < seed.stream_path.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(seed.stream_path[i]);
  }
  return s + "]";
}

void check_cfg(const CheckConfig& cfg, CheckDiagnostics& diag) {
  if (cfg.mc_samples == 0)
    throw Error(ErrorCode::InvalidParameter, "mc_samples must be positive");
  if (cfg.mc_samples < 100)
    diag.warnings.push_back("mc_samples below 100; p-value resolution is coarse");
}

double replicate_stat(const CheckConfig& cfg, const Model& model,
                      const ParamDraw& effective, const std::vector<double>& flat,
                      const GroupedDataset& grouped, bool is_grouped,
                      std::vector<double>& scratch) {
  if (is_parameter_dependent(cfg.statistic)) {
    if (is_grouped) return mse_grouped(grouped, std::get<HierParam>(effective).group_means);
    return mse_flat(flat, conditional_mean(model, effective));
  }
  if (is_grouped) return evaluate_grouped(cfg.statistic, grouped, scratch);
  return evaluate_flat(cfg.statistic, flat, scratch);
}

double heldout_stat(const CheckConfig& cfg, const Model& model, const Dataset& heldout,
                    const ParamDraw& effective) {
  // Parameter-dependent path; the parameter-free value is computed once outside.
  return evaluate_discrepancy(cfg.statistic, heldout, effective, model);
}

/// Shared Monte Carlo core: fit on `fit_data`, replicate `rep_shape`, compare
/// against `heldout`. Streams: draws from seed.child(1), replicate s from
/// seed.child(2).child(s) (seed.child(0) belongs to the split).
PValue mc_pvalue(const Model& model, const Dataset& fit_data, const Dataset& heldout,
                 const PredictiveShape& rep_shape, const CheckConfig& cfg,
                 const SeedSpec& seed, CheckDiagnostics& diag) {
  const std::size_t s_count = cfg.mc_samples;
  RngStream fit_stream(seed.child(1));
  const auto draws = sample_posterior(model, fit_data, s_count, fit_stream);

  const bool param_dep = is_parameter_dependent(cfg.statistic);
  double t_obs = 0.0;
  if (!param_dep) {
    t_obs = evaluate(cfg.statistic, heldout);
    diag.observed_stat = t_obs;
    diag.has_observed_stat = true;
  }

  std::vector<double> flat;
  GroupedDataset grouped;
  std::vector<double> scratch;
  ParamDraw effective;
  const SeedSpec rep_seed = seed.child(2);

  double exceed = 0.0;
  double ties = 0.0;
  if (cfg.keep_replicate_stats) diag.replicate_stats.reserve(s_count);
  for (std::size_t s = 0; s < s_count; ++s) {
    RngStream rep_stream(rep_seed.child(s));
    sample_predictive_into(model, draws[s], rep_shape, rep_stream, flat, grouped, &effective);
    const double t_rep =
        replicate_stat(cfg, model, effective, flat, grouped, rep_shape.grouped, scratch);
    const double t_cmp = param_dep ? heldout_stat(cfg, model, heldout, effective) : t_obs;
    if (t_cmp > t_rep) exceed += 1.0;
    else if (t_cmp == t_rep) ties += 1.0;
    if (cfg.keep_replicate_stats) diag.replicate_stats.push_back(t_rep);
  }

  double p = exceed / static_cast<double>(s_count);
  if (cfg.tie_mode == TieMode::MidP) p += 0.5 * ties / static_cast<double>(s_count);
  return PValue{p, static_cast<std::uint32_t>(s_count)};
}

CheckResult finish(PValue p, CheckDiagnostics diag) {
  CheckResult res;
  res.p = p;
  res.p_two_sided = two_sided(p);
  res.diagnostics = std::move(diag);
  return res;
}

SplitStrategy inner_strategy(const CheckConfig& cfg) {
  SplitStrategy st;
  st.kind = cfg.inner_split;
  st.q = cfg.q;
  st.block = cfg.ts_block;
  return st;
}

CheckResult single_spc_impl(const Model& model, const Dataset& data,
                            const SplitResult& sr, const CheckConfig& cfg,
                            const SeedSpec& seed) {
  CheckDiagnostics diag;
  diag.seed_trail = seed_trail(seed);
  check_cfg(cfg, diag);
  const Dataset observed = extract(data, sr, false);
  const Dataset heldout = extract(data, sr, true);
  PredictiveShape shape = shape_of(heldout);
  shape.new_groups = (sr.kind == SplitKind::HierCross);
  diag.n_observed = dataset_size(observed);
  diag.n_heldout = dataset_size(heldout);
  diag.mc_samples = cfg.mc_samples;
  const PValue p = mc_pvalue(model, observed, heldout, shape, cfg, seed, diag);
  return finish(p, std::move(diag));
}

std::size_t fold_unit_count(const Dataset& data, FoldKind kind) {
  if (kind == FoldKind::HierCross)
    return std::get<GroupedDataset>(data).groups.size();
  if (kind == FoldKind::HierWithin) {
    const auto& grp = std::get<GroupedDataset>(data);
    std::size_t m = grp.groups.front().size();
    for (const auto& g : grp.groups) m = std::min(m, g.size());
    return m;
  }
  return dataset_size(data);
}

}  // namespace

CheckResult ppc(const Model& model, const Dataset& data, const CheckConfig& cfg,
                const SeedSpec& seed) {
  validate(data);
  CheckDiagnostics diag;
  diag.seed_trail = seed_trail(seed);
  check_cfg(cfg, diag);
  const PredictiveShape shape = shape_of(data);  // full size, same groups
  diag.n_observed = dataset_size(data);
  diag.n_heldout = dataset_size(data);
  diag.mc_samples = cfg.mc_samples;
  const PValue p = mc_pvalue(model, data, data, shape, cfg, seed, diag);
  return finish(p, std::move(diag));
}

CheckResult single_spc(const Model& model, const Dataset& data, const CheckConfig& cfg,
                       const SeedSpec& seed) {
  RngStream split_stream{SeedSpec(seed).child(0)};
  const SplitResult sr = split(data, inner_strategy(cfg), split_stream);
  return single_spc_impl(model, data, sr, cfg, seed);
}

CheckResult single_spc_with_split(const Model& model, const Dataset& data,
                                  const SplitResult& sr, const CheckConfig& cfg,
                                  const SeedSpec& seed) {
  validate(data);
  return single_spc_impl(model, data, sr, cfg, seed);
}

CheckResult divided_spc(const Model& model, const Dataset& data, const CheckConfig& cfg,
                        const SeedSpec& seed) {
  validate(data);
  CheckDiagnostics diag;
  diag.seed_trail = seed_trail(seed);
  check_cfg(cfg, diag);

  std::size_t k;
  if (cfg.k) {
    k = *cfg.k;
    if (k < 2) throw Error(ErrorCode::TooManyFolds, "fold count must be >= 2");
  } else {
    k = k_from_rule(fold_unit_count(data, cfg.outer_split), cfg.fold_rule.b,
                    cfg.fold_rule.beta);
  }
  diag.k = k;
  diag.mc_samples = cfg.mc_samples;
  if (k < 20)
    diag.warnings.push_back(
        "k = " + std::to_string(k) + " folds; the KS uniformity p-value is asymptotic in k");

  RngStream fold_stream{SeedSpec(seed).child(0)};
  const FoldPlan plan = make_folds(data, k, cfg.outer_split, fold_stream);
  for (const auto& w : plan.warnings) diag.warnings.push_back(w);

  const SeedSpec fold_seed = seed.child(1);
  std::vector<PValue> fold_ps;
  std::vector<double> fold_vals;
  fold_ps.reserve(k);
  fold_vals.reserve(k);
  std::size_t total_obs = 0, total_ho = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const Dataset fold_data = materialize_fold(data, plan, f);
    CheckResult fold_res = single_spc(model, fold_data, cfg, fold_seed.child(f));
    total_obs += fold_res.diagnostics.n_observed;
    total_ho += fold_res.diagnostics.n_heldout;
    fold_vals.push_back(fold_res.p.value);
    fold_ps.push_back(fold_res.p);
  }
  diag.n_observed = total_obs;
  diag.n_heldout = total_ho;

  if (std::adjacent_find(fold_vals.begin(), fold_vals.end(),
                         [](double a, double b) { return a != b; }) == fold_vals.end())
    diag.warnings.push_back("all fold p-values identical; KS uniformity degenerates");

  CheckResult res = finish(ks_uniform_pvalue(fold_vals), std::move(diag));
  res.fold_pvalues = std::move(fold_ps);
  return res;
}

CheckResult pop_pc_v1(const Model& model, const Dataset& data, const TruthSpec& truth,
                      const CheckConfig& cfg, const SeedSpec& seed) {
  validate(data);
  CheckDiagnostics diag;
  diag.seed_trail = seed_trail(seed);
  check_cfg(cfg, diag);
  if (cfg.pop_outer_reps == 0)
    throw Error(ErrorCode::InvalidParameter, "pop_outer_reps must be positive");

  const std::size_t s_count = cfg.mc_samples;
  const std::size_t r_count = cfg.pop_outer_reps;
  const PredictiveShape shape = shape_of(data);
  diag.n_observed = dataset_size(data);
  diag.n_heldout = dataset_size(data);
  diag.mc_samples = s_count;

  RngStream fit_stream{SeedSpec(seed).child(1)};
  const auto draws = sample_posterior(model, data, s_count, fit_stream);

  const bool param_dep = is_parameter_dependent(cfg.statistic);
  if (param_dep && shape.grouped)
    throw Error(ErrorCode::ShapeMismatch, "grouped mse is not supported by pop_pc_v1");

  // Fresh datasets. For the parameter-free path keep only T(X_new); the mse
  // path keeps first/second moments so T(X_new, theta_s) is O(1) per pair.
  const SeedSpec new_seed = seed.child(2);
  std::vector<double> t_new, q1_new, q2_new;
  for (std::size_t r = 0; r < r_count; ++r) {
    RngStream truth_stream(new_seed.child(r));
    const Dataset x_new = sample_truth(truth, shape, truth_stream);
    if (param_dep) {
      const auto& v = std::get<IidDataset>(x_new).values;
      double s1 = 0.0, s2 = 0.0;
      for (const double x : v) { s1 += x; s2 += x * x; }
      q1_new.push_back(s1 / static_cast<double>(v.size()));
      q2_new.push_back(s2 / static_cast<double>(v.size()));
    } else {
      t_new.push_back(evaluate(cfg.statistic, x_new));
    }
  }

  std::vector<double> flat, scratch;
  GroupedDataset grouped;
  ParamDraw effective;
  const SeedSpec rep_seed = seed.child(3);
  double exceed = 0.0, ties = 0.0;
  if (cfg.keep_replicate_stats) diag.replicate_stats.reserve(s_count);
  for (std::size_t s = 0; s < s_count; ++s) {
    RngStream rep_stream(rep_seed.child(s));
    sample_predictive_into(model, draws[s], shape, rep_stream, flat, grouped, &effective);
    const double t_rep =
        replicate_stat(cfg, model, effective, flat, grouped, shape.grouped, scratch);
    if (cfg.keep_replicate_stats) diag.replicate_stats.push_back(t_rep);
    if (param_dep) {
      const double m = conditional_mean(model, effective);
      for (std::size_t r = 0; r < r_count; ++r) {
        const double t_n = q2_new[r] - 2.0 * m * q1_new[r] + m * m;
        if (t_rep > t_n) exceed += 1.0;
        else if (t_rep == t_n) ties += 1.0;
      }
    } else {
      for (const double t_n : t_new) {
        if (t_rep > t_n) exceed += 1.0;
        else if (t_rep == t_n) ties += 1.0;
      }
    }
  }
  const double total = static_cast<double>(s_count) * static_cast<double>(r_count);
  double p = exceed / total;
  if (cfg.tie_mode == TieMode::MidP) p += 0.5 * ties / total;
  return finish(PValue{p, static_cast<std::uint32_t>(s_count * r_count)}, std::move(diag));
}

CheckResult run_check(const Model& model, const Dataset& data,
                      const std::optional<TruthSpec>& truth, const CheckConfig& cfg,
                      const SeedSpec& seed) {
  switch (cfg.method) {
    case CheckMethod::Ppc: return ppc(model, data, cfg, seed);
    case CheckMethod::SingleSpc: return single_spc(model, data, cfg, seed);
    case CheckMethod::DividedSpc: return divided_spc(model, data, cfg, seed);
    case CheckMethod::PopPcV1:
      if (!truth)
        throw Error(ErrorCode::TruthUnavailable,
                    "pop_pc_v1 needs the true generating distribution (simulation only)");
      return pop_pc_v1(model, data, *truth, cfg, seed);
  }
  throw Error(ErrorCode::InvalidParameter, "unknown method");
}

}  // namespace spc
