#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "spc/math.hpp"

namespace spc {

/// Inputs to the asymptotic miscalibration ratio:
/// rho^2 = (q s*^2 + (1-q) g' J^-1 Sig J^-1 g) / (q s(t*)^2 + (1-q) g' J^-1 g).
struct RhoInputs {
  double q = 0.5;
  double sigma_true_sq = 1.0;   // asymptotic statistic variance under the truth
  double sigma_model_sq = 1.0;  // under the KL-optimal model
  std::vector<double> grad;                 // gradient of the asymptotic mean, length d
  std::vector<double> j_star;               // expected negative Hessian, row-major d x d
  std::vector<double> sigma_star_mat;       // score covariance, row-major d x d
};

double rho_squared(const RhoInputs& inputs);

/// Limiting one-sided rejection probability Phi(Phi^-1(alpha) / rho).
double asym_rejection_prob(double alpha, double rho);

/// Limiting two-sided power 2 Phi(Phi^-1(alpha/2) / rho).
double asym_power_two_sided(double alpha, double rho);

/// Closed-form rho for the paper's scenarios (mean statistic unless noted).
enum class RhoScenarioKind {
  NegBinMean,    // rho = sqrt(1 + mean / dispersion)
  BinomialMean,  // rho = sqrt(1 - p)
  GaussianMean,  // rho = sigma* / sigma
  GaussianMse,   // rho = sigma*^2 / sigma^2
};

struct RhoScenario {
  RhoScenarioKind kind = RhoScenarioKind::GaussianMean;
  double mean = 2.0;        // NegBinMean
  double dispersion = 0.01; // NegBinMean
  double p = 0.5;           // BinomialMean
  double sigma_true = 1.0;  // Gaussian*
  double sigma_model = 1.0; // Gaussian*
};

double rho_scenario(const RhoScenario& scenario);

/// Parse CLI names: negbin:<tau>[,<mu>], binomial:<p>,
/// gaussian_mean:<sigma*>,<sigma>, gaussian_mse:<sigma*>,<sigma>.
RhoScenario parse_rho_scenario(std::string_view name);
std::string rho_scenario_name(const RhoScenario& scenario);

}  // namespace spc
