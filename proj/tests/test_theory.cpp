#include <cmath>

#include "doctest.h"
#include "spc/rng.hpp"
#include "spc/theory.hpp"

using namespace spc;

namespace {

RhoInputs scalar_gaussian(double q, double sigma_true, double sigma_model) {
  // mean statistic in the Gaussian location model with known variance:
  // grad = 1, J* = 1/sigma^2, Sigma* = sigma*^2 / sigma^4
  RhoInputs in;
  in.q = q;
  in.sigma_true_sq = sigma_true * sigma_true;
  in.sigma_model_sq = sigma_model * sigma_model;
  in.grad = {1.0};
  in.j_star = {1.0 / (sigma_model * sigma_model)};
  in.sigma_star_mat = {sigma_true * sigma_true /
                       (sigma_model * sigma_model * sigma_model * sigma_model)};
  return in;
}

}  // namespace

TEST_CASE("rho_squared closed forms") {
  // well specified: numerator equals denominator for every q
  for (const double q : {0.1, 0.3, 0.5, 0.9}) {
    RhoInputs in = scalar_gaussian(q, 2.0, 2.0);
    CHECK(rho_squared(in) == doctest::Approx(1.0).epsilon(1e-12));
  }
  // scalar Gaussian mean statistic reduces to sigma*^2 / sigma^2 for every q
  RngStream rng(SeedSpec{55, {}});
  for (int rep = 0; rep < 1000; ++rep) {
    const double st = 0.2 + 3.0 * rng.uniform();
    const double sm = 0.2 + 3.0 * rng.uniform();
    const double q = 0.05 + 0.9 * rng.uniform();
    const double r2 = rho_squared(scalar_gaussian(q, st, sm));
    CHECK(std::fabs(r2 - st * st / (sm * sm)) < 1e-12 * (1.0 + r2));
  }
  // q = 1: matrix terms vanish
  RhoInputs in = scalar_gaussian(1.0, 3.0, 1.5);
  in.j_star = {123.0};
  in.sigma_star_mat = {456.0};
  CHECK(rho_squared(in) == doctest::Approx(9.0 / 2.25));

  // 2-d case against a hand-inverted matrix
  RhoInputs two;
  two.q = 0.4;
  two.sigma_true_sq = 1.3;
  two.sigma_model_sq = 1.1;
  two.grad = {1.0, 2.0};
  two.j_star = {2.0, 0.5, 0.5, 1.0};        // inverse: [1, -0.5; -0.5, 2] / 1.75 * ...
  two.sigma_star_mat = {1.5, 0.2, 0.2, 0.8};
  // J^-1 = (1/1.75) [1 -0.5; -0.5 2]; J^-1 g = (1/1.75) [0; 3.5] = [0; 2]
  // g' J^-1 g = 4; sandwich = [0 2] Sigma [0;2] = 4 * 0.8 = 3.2
  const double num = 0.4 * 1.3 + 0.6 * 3.2;
  const double den = 0.4 * 1.1 + 0.6 * 4.0;
  CHECK(rho_squared(two) == doctest::Approx(num / den).epsilon(1e-12));

  // non-positive-definite J* is rejected
  RhoInputs bad = scalar_gaussian(0.5, 1.0, 1.0);
  bad.j_star = {-1.0};
  CHECK_THROWS_AS(rho_squared(bad), Error);
  bad = two;
  bad.j_star = {2.0, 0.6, 0.5, 1.0};  // asymmetric
  CHECK_THROWS_AS(rho_squared(bad), Error);
}

TEST_CASE("asymptotic rejection probability") {
  for (const double alpha : {0.001, 0.01, 0.05, 0.1, 0.5})
    CHECK(asym_rejection_prob(alpha, 1.0) == doctest::Approx(alpha).epsilon(1e-14));
  // frozen from an mpmath oracle: Phi(Phi^-1(0.05)/0.5) = Phi(-3.28971...)
  CHECK(asym_rejection_prob(0.05, 0.5) == doctest::Approx(5.014534393294e-4).epsilon(1e-9));
  CHECK(asym_rejection_prob(0.05, 1e12) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("asymptotic two-sided power") {
  for (const double alpha : {0.01, 0.05, 0.2})
    CHECK(asym_power_two_sided(alpha, 1.0) == doctest::Approx(alpha).epsilon(1e-14));
  // frozen from an mpmath oracle: 2 Phi(Phi^-1(0.025)/sqrt(201))
  CHECK(asym_power_two_sided(0.05, std::sqrt(201.0)) ==
        doctest::Approx(0.8900466332936794).epsilon(1e-12));
  CHECK(asym_power_two_sided(0.05, 1e9) == doctest::Approx(1.0).epsilon(1e-6));

  // monotonicity: nondecreasing in rho for rho >= 1 and in alpha for fixed rho
  double prev = 0.0;
  for (double rho = 1.0; rho < 40.0; rho *= 1.17) {
    const double v = asym_power_two_sided(0.05, rho);
    CHECK(v >= prev);
    prev = v;
  }
  prev = 0.0;
  for (double alpha = 0.001; alpha < 0.9; alpha *= 1.6) {
    const double v = asym_power_two_sided(alpha, 3.0);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("scenario rho catalogue") {
  CHECK(rho_scenario({RhoScenarioKind::NegBinMean, 2.0, 0.01, 0, 0, 0}) ==
        doctest::Approx(std::sqrt(201.0)));
  RhoScenario b;
  b.kind = RhoScenarioKind::BinomialMean;
  b.p = 0.8;
  CHECK(rho_scenario(b) * rho_scenario(b) == doctest::Approx(0.2));
  RhoScenario g;
  g.kind = RhoScenarioKind::GaussianMean;
  g.sigma_true = 15.0;
  g.sigma_model = 1.0;
  CHECK(rho_scenario(g) == doctest::Approx(15.0));
  g.kind = RhoScenarioKind::GaussianMse;
  CHECK(rho_scenario(g) == doctest::Approx(225.0));

  const auto parsed = parse_rho_scenario("negbin:0.1");
  CHECK(rho_scenario(parsed) * rho_scenario(parsed) == doctest::Approx(21.0));
  CHECK(parse_rho_scenario("binomial:0.5").p == doctest::Approx(0.5));
  CHECK(parse_rho_scenario("gaussian_mse:15,1").sigma_true == doctest::Approx(15.0));
  CHECK_THROWS_AS(parse_rho_scenario("weibull:1"), Error);
  CHECK_THROWS_AS(rho_scenario({RhoScenarioKind::BinomialMean, 0, 0, 1.5, 0, 0}), Error);
}
