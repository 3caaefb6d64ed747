#include "spc/models.hpp"

#include <cmath>

#include "spc/math.hpp"

namespace spc {

namespace {

const std::vector<double>& flat_values(const Dataset& data) {
  if (const auto* iid = std::get_if<IidDataset>(&data)) return iid->values;
  if (const auto* ts = std::get_if<TimeSeriesDataset>(&data)) return ts->values;
  throw Error(ErrorCode::ShapeMismatch, "model needs flat (ungrouped) data");
}

const GroupedDataset& grouped_values(const Dataset& data) {
  if (const auto* grp = std::get_if<GroupedDataset>(&data)) return *grp;
  throw Error(ErrorCode::ShapeMismatch, "hierarchical model needs grouped data");
}

double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Conjugate posterior updates
// ---------------------------------------------------------------------------

PosteriorParams posterior_params(const Model& model, const Dataset& data) {
  validate(data);
  if (const auto* pg = std::get_if<PoissonGamma>(&model)) {
    const auto& x = flat_values(data);
    return GammaParams{pg->shape + sum_of(x), pg->rate + static_cast<double>(x.size())};
  }
  if (const auto* nk = std::get_if<NormalKnownVar>(&model)) {
    const auto& x = flat_values(data);
    const double prior_prec = 1.0 / (nk->prior_sd * nk->prior_sd);
    const double like_prec = static_cast<double>(x.size()) / (nk->sigma * nk->sigma);
    const double var = 1.0 / (prior_prec + like_prec);
    const double mean =
        var * (nk->prior_mean * prior_prec + sum_of(x) / (nk->sigma * nk->sigma));
    return NormalParams{mean, var};
  }
  if (std::get_if<NormalImproper>(&model)) {
    const auto& x = flat_values(data);
    const auto n = static_cast<double>(x.size());
    if (x.size() < 2)
      throw Error(ErrorCode::InsufficientData, "improper normal posterior needs N >= 2");
    const double xbar = sum_of(x) / n;
    double ss = 0.0;
    for (const double v : x) ss += (v - xbar) * (v - xbar);
    // (N-1) s^2 = ss with s^2 the unbiased sample variance
    return NormalInvGammaParams{xbar, n, (n - 1.0) / 2.0, ss / 2.0};
  }
  if (const auto* gb = std::get_if<GeometricBeta>(&model)) {
    const auto& x = flat_values(data);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < 0.0)
        throw Error(ErrorCode::InvalidParameter, "geometric data must be nonnegative", i);
    return BetaParams{gb->a + static_cast<double>(x.size()), gb->b + sum_of(x)};
  }
  throw Error(ErrorCode::ShapeMismatch,
              "posterior_params has no closed form for the hierarchical model; "
              "use gibbs_hierarchical");
}

// ---------------------------------------------------------------------------
// Hierarchical Gibbs
// ---------------------------------------------------------------------------

namespace detail {

HierSuffStats hier_suff_stats(const GroupedDataset& data) {
  HierSuffStats s;
  s.group_means.reserve(data.groups.size());
  s.group_sizes.reserve(data.groups.size());
  for (const auto& g : data.groups) {
    s.group_means.push_back(sum_of(g) / static_cast<double>(g.size()));
    s.group_sizes.push_back(g.size());
  }
  return s;
}

void hier_gibbs_init(HierState& state, const HierSuffStats& stats) {
  const auto I = stats.group_means.size();
  state.eta = stats.group_means;
  state.mu0 = sum_of(stats.group_means) / static_cast<double>(I);
  double ss = 0.0;
  for (const double m : stats.group_means) ss += (m - state.mu0) * (m - state.mu0);
  state.sigma0_sq = std::max(ss / static_cast<double>(I), 1e-8);
}

void hier_gibbs_step(HierState& state, const HierSuffStats& stats,
                     const HierPriorSpec& prior, double obs_var, RngStream& rng) {
  const auto I = stats.group_means.size();
  const double inv_s0 = 1.0 / state.sigma0_sq;
  for (std::size_t i = 0; i < I; ++i) {
    const double ji = static_cast<double>(stats.group_sizes[i]);
    const double prec = ji / obs_var + inv_s0;
    const double mean = (ji * stats.group_means[i] / obs_var + state.mu0 * inv_s0) / prec;
    state.eta[i] = rng.normal(mean, std::sqrt(1.0 / prec));
  }
  const double eta_bar = sum_of(state.eta) / static_cast<double>(I);
  const double denom = prior.kappa0 + static_cast<double>(I);
  const double mu_mean = (prior.kappa0 * prior.m0 + static_cast<double>(I) * eta_bar) / denom;
  state.mu0 = rng.normal(mu_mean, std::sqrt(state.sigma0_sq / denom));
  double ss = prior.b0 + prior.kappa0 * (state.mu0 - prior.m0) * (state.mu0 - prior.m0) / 2.0;
  for (const double e : state.eta) ss += (e - state.mu0) * (e - state.mu0) / 2.0;
  double shape = prior.a0 + static_cast<double>(I) / 2.0;
  if (prior.kappa0 > 0.0) shape += 0.5;
  state.sigma0_sq = rng.inv_gamma(shape, ss);
}

}  // namespace detail

std::vector<HierParam> gibbs_hierarchical(const GaussianHierarchical& model,
                                          const GroupedDataset& data,
                                          std::size_t n_draws, RngStream& rng) {
  if (data.groups.size() < 3)
    throw Error(ErrorCode::InsufficientData,
                "hierarchical posterior needs at least 3 groups");
  const auto stats = detail::hier_suff_stats(data);
  detail::HierState state;
  detail::hier_gibbs_init(state, stats);
  const detail::HierPriorSpec improper;  // sigma0^-2
  const std::size_t thin = std::max<std::size_t>(model.gibbs.thinning, 1);
  std::vector<HierParam> draws;
  draws.reserve(n_draws);
  for (std::size_t it = 0; it < model.gibbs.burn_in; ++it)
    detail::hier_gibbs_step(state, stats, improper, model.obs_var, rng);
  while (draws.size() < n_draws) {
    for (std::size_t t = 0; t < thin; ++t)
      detail::hier_gibbs_step(state, stats, improper, model.obs_var, rng);
    if (!std::isfinite(state.mu0) || !std::isfinite(state.sigma0_sq))
      throw Error(ErrorCode::InvalidParameter, "non-finite Gibbs state");
    draws.push_back(HierParam{state.mu0, state.sigma0_sq, state.eta});
  }
  return draws;
}

// ---------------------------------------------------------------------------
// Posterior sampling
// ---------------------------------------------------------------------------

std::vector<ParamDraw> sample_posterior(const Model& model, const Dataset& data,
                                        std::size_t n_draws, RngStream& rng) {
  if (const auto* gh = std::get_if<GaussianHierarchical>(&model)) {
    auto hier = gibbs_hierarchical(*gh, grouped_values(data), n_draws, rng);
    std::vector<ParamDraw> out;
    out.reserve(hier.size());
    for (auto& h : hier) out.emplace_back(std::move(h));
    return out;
  }
  const PosteriorParams post = posterior_params(model, data);
  std::vector<ParamDraw> out;
  out.reserve(n_draws);
  for (std::size_t s = 0; s < n_draws; ++s) {
    if (const auto* g = std::get_if<GammaParams>(&post)) {
      out.emplace_back(ScalarParam{rng.gamma(g->shape, g->rate)});
    } else if (const auto* nm = std::get_if<NormalParams>(&post)) {
      out.emplace_back(ScalarParam{rng.normal(nm->mean, std::sqrt(nm->var))});
    } else if (const auto* b = std::get_if<BetaParams>(&post)) {
      out.emplace_back(ScalarParam{rng.beta(b->a, b->b)});
    } else {
      const auto& nig = std::get<NormalInvGammaParams>(post);
      const double var = rng.inv_gamma(nig.ig_shape, nig.ig_scale);
      const double mu = rng.normal(nig.mean, std::sqrt(var / nig.n));
      out.emplace_back(LocScaleParam{mu, var});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Predictive replication
// ---------------------------------------------------------------------------

PredictiveShape shape_of(const Dataset& data) {
  PredictiveShape s;
  if (const auto* grp = std::get_if<GroupedDataset>(&data)) {
    s.grouped = true;
    for (const auto& g : grp->groups) s.group_sizes.push_back(g.size());
  } else {
    s.n = dataset_size(data);
  }
  return s;
}

namespace {

void fill_flat_predictive(const Model& model, const ParamDraw& draw,
                          std::size_t n, RngStream& rng, std::vector<double>& out) {
  out.resize(n);
  if (std::get_if<PoissonGamma>(&model)) {
    const double theta = std::get<ScalarParam>(draw).value;
    for (auto& v : out) v = static_cast<double>(rng.poisson(theta));
  } else if (const auto* nk = std::get_if<NormalKnownVar>(&model)) {
    const double theta = std::get<ScalarParam>(draw).value;
    for (auto& v : out) v = rng.normal(theta, nk->sigma);
  } else if (std::get_if<NormalImproper>(&model)) {
    const auto& p = std::get<LocScaleParam>(draw);
    const double sd = std::sqrt(p.var);
    for (auto& v : out) v = rng.normal(p.mean, sd);
  } else if (std::get_if<GeometricBeta>(&model)) {
    const double theta = std::get<ScalarParam>(draw).value;
    for (auto& v : out) v = static_cast<double>(rng.geometric_from_zero(theta));
  } else {
    throw Error(ErrorCode::ShapeMismatch, "hierarchical model cannot replicate flat data");
  }
}

}  // namespace

void sample_predictive_into(const Model& model, const ParamDraw& draw,
                            const PredictiveShape& shape, RngStream& rng,
                            std::vector<double>& flat, GroupedDataset& grouped,
                            ParamDraw* effective) {
  if (!shape.grouped) {
    fill_flat_predictive(model, draw, shape.n, rng, flat);
    if (effective) *effective = draw;
    return;
  }
  const auto* gh = std::get_if<GaussianHierarchical>(&model);
  if (!gh)
    throw Error(ErrorCode::ShapeMismatch, "grouped replication needs the hierarchical model");
  const auto& h = std::get<HierParam>(draw);
  const double sd = std::sqrt(gh->obs_var);
  grouped.groups.resize(shape.group_sizes.size());
  HierParam eff{h.mu0, h.sigma0_sq, {}};
  eff.group_means.resize(shape.group_sizes.size());
  if (shape.new_groups) {
    const double sd0 = std::sqrt(h.sigma0_sq);
    for (std::size_t i = 0; i < shape.group_sizes.size(); ++i)
      eff.group_means[i] = rng.normal(h.mu0, sd0);
  } else {
    if (h.group_means.size() != shape.group_sizes.size())
      throw Error(ErrorCode::ShapeMismatch,
                  "within-group replication needs a group mean per target group");
    eff.group_means = h.group_means;
  }
  for (std::size_t i = 0; i < shape.group_sizes.size(); ++i) {
    auto& g = grouped.groups[i];
    g.resize(shape.group_sizes[i]);
    for (auto& v : g) v = rng.normal(eff.group_means[i], sd);
  }
  if (effective) *effective = std::move(eff);
}

Dataset sample_predictive(const Model& model, const ParamDraw& draw,
                          const PredictiveShape& shape, RngStream& rng) {
  std::vector<double> flat;
  GroupedDataset grouped;
  sample_predictive_into(model, draw, shape, rng, flat, grouped, nullptr);
  if (shape.grouped) return grouped;
  return IidDataset{std::move(flat)};
}

double conditional_mean(const Model& model, const ParamDraw& draw) {
  if (std::get_if<PoissonGamma>(&model) || std::get_if<NormalKnownVar>(&model))
    return std::get<ScalarParam>(draw).value;
  if (std::get_if<NormalImproper>(&model)) return std::get<LocScaleParam>(draw).mean;
  if (std::get_if<GeometricBeta>(&model)) {
    const double theta = std::get<ScalarParam>(draw).value;
    return (1.0 - theta) / theta;
  }
  throw Error(ErrorCode::ShapeMismatch,
              "conditional_mean of the hierarchical model is per-group");
}

double evaluate_discrepancy(const StatisticSpec& spec, const Dataset& data,
                            const ParamDraw& draw, const Model& model) {
  if (spec.kind != StatKind::MseDiscrepancy)
    throw Error(ErrorCode::ShapeMismatch, "evaluate_discrepancy supports the mse statistic");
  if (const auto* grp = std::get_if<GroupedDataset>(&data)) {
    const auto& h = std::get<HierParam>(draw);
    return mse_grouped(*grp, h.group_means);
  }
  const double m = conditional_mean(model, draw);
  if (const auto* iid = std::get_if<IidDataset>(&data)) return mse_flat(iid->values, m);
  return mse_flat(std::get<TimeSeriesDataset>(data).values, m);
}

// ---------------------------------------------------------------------------
// Truth sampling
// ---------------------------------------------------------------------------

namespace {

void fill_truth_flat(const TruthSpec& truth, std::size_t n, RngStream& rng,
                     std::vector<double>& out) {
  out.resize(n);
  if (const auto* p = std::get_if<PoissonTruth>(&truth)) {
    if (!(p->rate > 0.0)) throw Error(ErrorCode::InvalidParameter, "poisson rate <= 0");
    for (auto& v : out) v = static_cast<double>(rng.poisson(p->rate));
  } else if (const auto* nb = std::get_if<NegBinTruth>(&truth)) {
    if (!(nb->mean > 0.0) || !(nb->dispersion > 0.0))
      throw Error(ErrorCode::InvalidParameter, "negbin needs mean, dispersion > 0");
    // Gamma-Poisson mixture: rate ~ Gamma(tau, tau/mu) gives variance mu + mu^2/tau.
    const double shape = nb->dispersion;
    const double rate = nb->dispersion / nb->mean;
    for (auto& v : out) v = static_cast<double>(rng.poisson(rng.gamma(shape, rate)));
  } else if (const auto* bn = std::get_if<BinomialTruth>(&truth)) {
    for (auto& v : out) v = static_cast<double>(rng.binomial(bn->trials, bn->prob));
  } else if (const auto* nm = std::get_if<NormalTruth>(&truth)) {
    if (!(nm->sd > 0.0)) throw Error(ErrorCode::InvalidParameter, "normal sd <= 0");
    for (auto& v : out) v = rng.normal(nm->mean, nm->sd);
  } else if (const auto* g = std::get_if<GeometricTruthSpec>(&truth)) {
    for (auto& v : out) v = static_cast<double>(rng.geometric_from_zero(g->theta));
  } else {
    throw Error(ErrorCode::ShapeMismatch, "hierarchical truth needs a grouped shape");
  }
}

}  // namespace

Dataset sample_truth(const TruthSpec& truth, const PredictiveShape& shape, RngStream& rng) {
  if (!shape.grouped) {
    IidDataset out;
    fill_truth_flat(truth, shape.n, rng, out.values);
    return out;
  }
  const auto* hier = std::get_if<HierTruth>(&truth);
  if (!hier)
    throw Error(ErrorCode::ShapeMismatch, "grouped shape needs a hierarchical truth");
  GroupedDataset out;
  out.groups.resize(shape.group_sizes.size());
  for (std::size_t i = 0; i < shape.group_sizes.size(); ++i) {
    double eta;
    double sd = 2.0;  // sqrt(4)
    switch (hier->scenario) {
      case HierScenario::S1: eta = rng.normal(); break;
      case HierScenario::S2: eta = rng.gamma(0.6, 0.2); break;
      case HierScenario::S3: eta = rng.normal(); sd = std::sqrt(8.0); break;
      case HierScenario::S4: eta = rng.normal(); break;
    }
    auto& g = out.groups[i];
    g.resize(shape.group_sizes[i]);
    for (auto& v : g) {
      v = rng.normal(eta, sd);
      if (hier->scenario == HierScenario::S4) v = std::exp(v);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prior ESS
// ---------------------------------------------------------------------------

double prior_ess(const Model& model) {
  if (const auto* pg = std::get_if<PoissonGamma>(&model)) return pg->rate;
  throw Error(ErrorCode::EssUndefined, "prior ESS is defined for the Poisson-Gamma model");
}

double relative_ess(double n0, double n_star) {
  if (!(n0 >= 0.0) || !(n_star >= 1.0))
    throw Error(ErrorCode::InvalidParameter, "relative_ess needs n0 >= 0, n_star >= 1");
  return n0 / (n0 + n_star);
}

double beta_for_target_r(double r, double n_star) {
  if (!(r > 0.0 && r < 1.0) || !(n_star >= 1.0))
    throw Error(ErrorCode::InvalidParameter, "beta_for_target_r needs r in (0,1), n_star >= 1");
  return r / (1.0 - r) * n_star;
}

double prior_shape_for_quantile(double rate, double theta_star, double prob) {
  if (!(rate > 0.0) || !(theta_star > 0.0) || !(prob > 0.0 && prob < 1.0))
    throw Error(ErrorCode::InvalidParameter, "prior_shape_for_quantile arguments out of range");
  const double x = rate * theta_star;
  // Gamma(a, rate) CDF at theta_star is P(a, rate * theta_star), decreasing in a.
  double lo = 1e-8, hi = 1.0;
  while (reg_lower_gamma(hi, x) > prob) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12)
      throw Error(ErrorCode::InvalidParameter, "prior_shape_for_quantile failed to bracket");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = reg_lower_gamma(mid, x);
    if (std::fabs(f - prob) < 1e-8) return mid;
    if (f > prob) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace spc
