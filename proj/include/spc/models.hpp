#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spc/dataset.hpp"
#include "spc/rng.hpp"
#include "spc/statistics.hpp"

namespace spc {

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

struct GibbsControls {
  std::size_t burn_in = 1000;
  std::size_t thinning = 1;
};

/// Poisson likelihood, Gamma(shape, rate) prior.
struct PoissonGamma {
  double shape = 0.1;
  double rate = 0.2;
};

/// N(theta, sigma^2) likelihood with known sigma, N(prior_mean, prior_sd^2) prior.
struct NormalKnownVar {
  double sigma = 1.0;
  double prior_mean = 0.0;
  double prior_sd = 1.0;
};

/// N(mu, sigma^2) likelihood, improper prior density sigma^-2.
struct NormalImproper {};

/// Geometric likelihood on {0,1,2,...} with pmf theta (1-theta)^x,
/// Beta(a, b) prior.
struct GeometricBeta {
  double a = 0.1;
  double b = 0.2;
};

/// Two-level Gaussian hierarchy: X_ij ~ N(eta_i, obs_var),
/// eta_i ~ N(mu0, sigma0^2), improper prior sigma0^-2 on (mu0, sigma0^2).
struct GaussianHierarchical {
  double obs_var = 4.0;
  GibbsControls gibbs;
};

using Model = std::variant<PoissonGamma, NormalKnownVar, NormalImproper,
                           GeometricBeta, GaussianHierarchical>;

// ---------------------------------------------------------------------------
// Posterior parameters (conjugate closed forms)
// ---------------------------------------------------------------------------

struct GammaParams { double shape, rate; };
struct NormalParams { double mean, var; };
struct BetaParams { double a, b; };
/// sigma^2 ~ InvGamma(ig_shape, ig_scale); mu | sigma^2 ~ N(mean, sigma^2 / n).
struct NormalInvGammaParams { double mean; double n; double ig_shape; double ig_scale; };

using PosteriorParams =
    std::variant<GammaParams, NormalParams, BetaParams, NormalInvGammaParams>;

PosteriorParams posterior_params(const Model& model, const Dataset& data);

// ---------------------------------------------------------------------------
// Parameter draws and sampling
// ---------------------------------------------------------------------------

struct ScalarParam { double value = 0.0; };
struct LocScaleParam { double mean = 0.0; double var = 1.0; };
struct HierParam {
  double mu0 = 0.0;
  double sigma0_sq = 1.0;
  std::vector<double> group_means;  // eta_i, indexed like the fitted data's groups
};
using ParamDraw = std::variant<ScalarParam, LocScaleParam, HierParam>;

/// n_draws posterior draws: i.i.d. for the conjugate models, a Gibbs chain
/// (after burn-in/thinning) for the hierarchical model. Deterministic given
/// the stream.
std::vector<ParamDraw> sample_posterior(const Model& model, const Dataset& data,
                                        std::size_t n_draws, RngStream& rng);

/// Gibbs sampler for the hierarchical model; full conditionals:
///   eta_i | rest ~ N((J_i ybar_i / v + mu0 / s0) / (J_i / v + 1 / s0), (J_i / v + 1 / s0)^-1)
///   mu0 | eta, s0 ~ N(mean(eta), s0 / I)
///   s0 | eta, mu0 ~ InvGamma(I / 2, sum_i (eta_i - mu0)^2 / 2)
std::vector<HierParam> gibbs_hierarchical(const GaussianHierarchical& model,
                                          const GroupedDataset& data,
                                          std::size_t n_draws, RngStream& rng);

/// Target shape for replicated data.
struct PredictiveShape {
  bool grouped = false;
  std::size_t n = 0;                     // flat element count
  std::vector<std::size_t> group_sizes;  // grouped
  /// Hierarchical only: draw fresh group means from N(mu0, sigma0^2) instead
  /// of reusing the draw's group_means (which must then match group count).
  bool new_groups = false;
};

PredictiveShape shape_of(const Dataset& data);

/// One replicated dataset of exactly the requested shape.
Dataset sample_predictive(const Model& model, const ParamDraw& draw,
                          const PredictiveShape& shape, RngStream& rng);

/// Engine path: writes into reusable buffers (flat or grouped per
/// shape.grouped) and reports the effective parameter actually used, which
/// for hierarchical new-group replication includes the freshly drawn group
/// means.
void sample_predictive_into(const Model& model, const ParamDraw& draw,
                            const PredictiveShape& shape, RngStream& rng,
                            std::vector<double>& flat, GroupedDataset& grouped,
                            ParamDraw* effective);

/// E[X | theta] for the scalar-parameter models; hierarchical conditional
/// means live in HierParam::group_means.
double conditional_mean(const Model& model, const ParamDraw& draw);

/// Realized discrepancy T(data, theta): currently the MSE statistic.
double evaluate_discrepancy(const StatisticSpec& spec, const Dataset& data,
                            const ParamDraw& draw, const Model& model);

// ---------------------------------------------------------------------------
// Data-generating truths
// ---------------------------------------------------------------------------

struct PoissonTruth { double rate = 2.0; };
/// Mean/dispersion parameterization: variance = mean + mean^2 / dispersion.
struct NegBinTruth { double mean = 2.0; double dispersion = 0.01; };
struct BinomialTruth { long trials = 30; double prob = 0.5; };
struct NormalTruth { double mean = 0.0; double sd = 1.0; };
struct GeometricTruthSpec { double theta = 0.5; };
/// S1: eta ~ N(0,1), X ~ N(eta, 4).  S2: eta ~ Gamma(0.6, 0.2) (shape, rate).
/// S3: eta ~ N(0,1), X ~ N(eta, 8).  S4: eta ~ N(0,1), ln X ~ N(eta, 4).
enum class HierScenario { S1, S2, S3, S4 };
struct HierTruth { HierScenario scenario = HierScenario::S1; };

using TruthSpec = std::variant<PoissonTruth, NegBinTruth, BinomialTruth,
                               NormalTruth, GeometricTruthSpec, HierTruth>;

Dataset sample_truth(const TruthSpec& truth, const PredictiveShape& shape, RngStream& rng);

// ---------------------------------------------------------------------------
// Prior effective sample size helpers (Poisson-Gamma only)
// ---------------------------------------------------------------------------

double prior_ess(const Model& model);                      // N0 = prior rate
double relative_ess(double n0, double n_star);             // r = N0 / (N0 + N*)
double beta_for_target_r(double r, double n_star);         // rate = r/(1-r) N*

/// Gamma prior shape alpha such that theta_star sits at the given prior
/// quantile for fixed rate; monotone bisection to 1e-8 in quantile space.
double prior_shape_for_quantile(double rate, double theta_star, double prob);

namespace detail {

/// Proper normal-inverse-gamma prior over (mu0, sigma0^2):
///   sigma0^2 ~ InvGamma(a0, b0), mu0 | sigma0^2 ~ N(m0, sigma0^2 / kappa0).
/// All-zero hyperparameters give the improper sigma0^-2 prior used in
/// production; the proper setting exists so forward simulation (Geweke
/// checks) can exercise the identical kernel.
struct HierPriorSpec {
  double kappa0 = 0.0, m0 = 0.0, a0 = 0.0, b0 = 0.0;
};

struct HierSuffStats {
  std::vector<double> group_means;
  std::vector<std::size_t> group_sizes;
};

struct HierState {
  double mu0 = 0.0;
  double sigma0_sq = 1.0;
  std::vector<double> eta;
};

HierSuffStats hier_suff_stats(const GroupedDataset& data);
void hier_gibbs_init(HierState& state, const HierSuffStats& stats);
void hier_gibbs_step(HierState& state, const HierSuffStats& stats,
                     const HierPriorSpec& prior, double obs_var, RngStream& rng);

}  // namespace detail

}  // namespace spc
