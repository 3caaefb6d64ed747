#include <cmath>
#include <vector>

#include "doctest.h"
#include "spc/models.hpp"

using namespace spc;

namespace {

GroupedDataset scenario_s1(std::size_t groups, std::size_t j, RngStream& rng) {
  PredictiveShape shape;
  shape.grouped = true;
  shape.group_sizes.assign(groups, j);
  return std::get<GroupedDataset>(sample_truth(HierTruth{HierScenario::S1}, shape, rng));
}

double batch_mean_se(const std::vector<double>& chain, std::size_t batches = 40) {
  const std::size_t len = chain.size() / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += chain[b * len + i];
    means.push_back(s / static_cast<double>(len));
  }
  double m = 0.0;
  for (const double v : means) m += v;
  m /= static_cast<double>(batches);
  double var = 0.0;
  for (const double v : means) var += (v - m) * (v - m);
  var /= static_cast<double>(batches - 1);
  return std::sqrt(var / static_cast<double>(batches));
}

}  // namespace

TEST_CASE("group-mean conditional collapses onto ybar as obs_var -> 0") {
  detail::HierSuffStats stats;
  stats.group_means = {1.5, -2.0, 4.0};
  stats.group_sizes = {5, 5, 5};
  detail::HierState state;
  detail::hier_gibbs_init(state, stats);
  state.sigma0_sq = 1e6;  // pinned large
  RngStream rng(SeedSpec{31, {}});
  detail::hier_gibbs_step(state, stats, detail::HierPriorSpec{}, 1e-10, rng);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(state.eta[i] == doctest::Approx(stats.group_means[i]).epsilon(1e-5));
}

TEST_CASE("gibbs recovers the S1 generating parameters") {
  RngStream data_rng(SeedSpec{32, {0}});
  const auto data = scenario_s1(200, 8, data_rng);
  GaussianHierarchical model;
  model.gibbs.burn_in = 500;
  RngStream rng(SeedSpec{32, {1}});
  const auto draws = gibbs_hierarchical(model, data, 4000, rng);
  std::vector<double> mu0s, s0s;
  for (const auto& d : draws) {
    mu0s.push_back(d.mu0);
    s0s.push_back(d.sigma0_sq);
  }
  double mu_mean = 0.0, s0_mean = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    mu_mean += mu0s[i];
    s0_mean += s0s[i];
  }
  mu_mean /= static_cast<double>(draws.size());
  s0_mean /= static_cast<double>(draws.size());
  // mu0 posterior centers on the realized group-mean average, which
  // fluctuates around 0 with sd sqrt((sigma0^2 + v/J)/I) ~ 0.087; add the
  // chain's own Monte Carlo error.
  const double mu_tol = 4.0 * std::sqrt((1.0 + 0.5) / 200.0) + 4.0 * batch_mean_se(mu0s);
  CHECK(std::fabs(mu_mean - 0.0) < mu_tol);
  // sigma0^2 concentrates near 1 with sampling sd ~ sqrt(2/I) plus chain error
  const double s0_tol = 4.0 * std::sqrt(2.0 / 200.0) * 1.3 + 4.0 * batch_mean_se(s0s);
  CHECK(std::fabs(s0_mean - 1.0) < s0_tol);
}

TEST_CASE("gibbs is deterministic given the seed") {
  RngStream data_rng(SeedSpec{33, {0}});
  const auto data = scenario_s1(12, 5, data_rng);
  GaussianHierarchical model;
  model.gibbs.burn_in = 50;
  RngStream r1(SeedSpec{33, {1}}), r2(SeedSpec{33, {1}});
  const auto a = gibbs_hierarchical(model, data, 20, r1);
  const auto b = gibbs_hierarchical(model, data, 20, r2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mu0 == b[i].mu0);
    CHECK(a[i].sigma0_sq == b[i].sigma0_sq);
    CHECK(a[i].group_means == b[i].group_means);
  }
  CHECK_THROWS_AS(gibbs_hierarchical(model, GroupedDataset{{{1.0}, {2.0}}}, 5, r1), Error);
}

TEST_CASE("geweke: forward and successive-conditional simulators agree") {
  // The improper prior cannot be forward-simulated, so the check runs the
  // same kernel under a proper normal-inverse-gamma prior.
  const detail::HierPriorSpec prior{2.0, 0.5, 4.0, 6.0};
  const double obs_var = 4.0;
  const std::size_t groups = 12, j = 5;

  RngStream rng(SeedSpec{34, {}});
  const auto draw_prior_state = [&](detail::HierState& st) {
    st.sigma0_sq = rng.inv_gamma(prior.a0, prior.b0);
    st.mu0 = rng.normal(prior.m0, std::sqrt(st.sigma0_sq / prior.kappa0));
    st.eta.resize(groups);
    for (auto& e : st.eta) e = rng.normal(st.mu0, std::sqrt(st.sigma0_sq));
  };

  // forward: iid draws from the prior
  const std::size_t m_fwd = 60000;
  double f_mu = 0.0, f_s0 = 0.0, f_eta2 = 0.0;
  double f_mu2 = 0.0, f_s02 = 0.0, f_eta22 = 0.0;
  detail::HierState st;
  for (std::size_t i = 0; i < m_fwd; ++i) {
    draw_prior_state(st);
    double eta2 = 0.0;
    for (const double e : st.eta) eta2 += e * e;
    f_mu += st.mu0; f_mu2 += st.mu0 * st.mu0;
    f_s0 += st.sigma0_sq; f_s02 += st.sigma0_sq * st.sigma0_sq;
    f_eta2 += eta2; f_eta22 += eta2 * eta2;
  }
  const double n_f = static_cast<double>(m_fwd);
  const double fm[3] = {f_mu / n_f, f_s0 / n_f, f_eta2 / n_f};
  const double fse[3] = {std::sqrt((f_mu2 / n_f - fm[0] * fm[0]) / n_f),
                         std::sqrt((f_s02 / n_f - fm[1] * fm[1]) / n_f),
                         std::sqrt((f_eta22 / n_f - fm[2] * fm[2]) / n_f)};

  // successive-conditional: y | theta then theta | y through the kernel
  const std::size_t m_sc = 120000;
  draw_prior_state(st);
  std::vector<double> c_mu, c_s0, c_eta2;
  c_mu.reserve(m_sc);
  GroupedDataset y;
  y.groups.assign(groups, std::vector<double>(j));
  for (std::size_t it = 0; it < m_sc; ++it) {
    for (std::size_t g = 0; g < groups; ++g)
      for (std::size_t i = 0; i < j; ++i)
        y.groups[g][i] = rng.normal(st.eta[g], std::sqrt(obs_var));
    const auto stats = detail::hier_suff_stats(y);
    detail::hier_gibbs_step(st, stats, prior, obs_var, rng);
    double eta2 = 0.0;
    for (const double e : st.eta) eta2 += e * e;
    c_mu.push_back(st.mu0);
    c_s0.push_back(st.sigma0_sq);
    c_eta2.push_back(eta2);
  }
  const auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double cm[3] = {mean_of(c_mu), mean_of(c_s0), mean_of(c_eta2)};
  const double cse[3] = {batch_mean_se(c_mu), batch_mean_se(c_s0), batch_mean_se(c_eta2)};

  for (int t = 0; t < 3; ++t) {
    const double se = std::sqrt(fse[t] * fse[t] + cse[t] * cse[t]);
    INFO("test function ", t, ": forward ", fm[t], " successive ", cm[t], " se ", se);
    CHECK(std::fabs(fm[t] - cm[t]) < 4.0 * se);
  }
}
