#include "spc/theory.hpp"

#include <cmath>

#include "spc/error.hpp"

namespace spc {

namespace {

// Cholesky factor of a small SPD matrix (row-major). Throws on failure.
std::vector<double> cholesky(const std::vector<double>& a, std::size_t d) {
  std::vector<double> l(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * d + k] * l[j * d + k];
      if (i == j) {
        if (!(s > 0.0))
          throw Error(ErrorCode::SingularMatrix, "J* is not positive definite");
        l[i * d + i] = std::sqrt(s);
      } else {
        l[i * d + j] = s / l[j * d + j];
      }
    }
  }
  return l;
}

// Solve L L' x = b in place of b.
void cholesky_solve(const std::vector<double>& l, std::size_t d, std::vector<double>& b) {
  for (std::size_t i = 0; i < d; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * d + k] * b[k];
    b[i] = s / l[i * d + i];
  }
  for (std::size_t ii = d; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < d; ++k) s -= l[k * d + ii] * b[k];
    b[ii] = s / l[ii * d + ii];
  }
}

void check_symmetric(const std::vector<double>& a, std::size_t d, const char* what) {
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (std::fabs(a[i * d + j] - a[j * d + i]) >
          1e-10 * (1.0 + std::fabs(a[i * d + j])))
        throw Error(ErrorCode::InvalidParameter, std::string(what) + " must be symmetric");
}

}  // namespace

double rho_squared(const RhoInputs& in) {
  const std::size_t d = in.grad.size();
  if (d == 0 || in.j_star.size() != d * d || in.sigma_star_mat.size() != d * d)
    throw Error(ErrorCode::InvalidParameter, "rho_squared dimension mismatch");
  if (!(in.q > 0.0 && in.q <= 1.0))
    throw Error(ErrorCode::InvalidParameter, "rho_squared needs q in (0,1]");
  if (!(in.sigma_true_sq > 0.0) || !(in.sigma_model_sq > 0.0))
    throw Error(ErrorCode::InvalidParameter, "rho_squared needs positive variances");
  check_symmetric(in.j_star, d, "J*");
  check_symmetric(in.sigma_star_mat, d, "Sigma*");

  const auto l = cholesky(in.j_star, d);
  std::vector<double> jinv_g = in.grad;   // J^-1 g
  cholesky_solve(l, d, jinv_g);

  double g_jinv_g = 0.0;
  for (std::size_t i = 0; i < d; ++i) g_jinv_g += in.grad[i] * jinv_g[i];

  double sandwich = 0.0;  // (J^-1 g)' Sigma (J^-1 g)
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      sandwich += jinv_g[i] * in.sigma_star_mat[i * d + j] * jinv_g[j];

  const double num = in.q * in.sigma_true_sq + (1.0 - in.q) * sandwich;
  const double den = in.q * in.sigma_model_sq + (1.0 - in.q) * g_jinv_g;
  if (!(den > 0.0)) throw Error(ErrorCode::SingularMatrix, "rho_squared denominator <= 0");
  return num / den;
}

double asym_rejection_prob(double alpha, double rho) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(rho > 0.0))
    throw Error(ErrorCode::InvalidParameter, "asym_rejection_prob needs alpha in (0,1), rho > 0");
  return normal_cdf(normal_quantile(alpha) / rho);
}

double asym_power_two_sided(double alpha, double rho) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(rho > 0.0))
    throw Error(ErrorCode::InvalidParameter, "asym_power_two_sided needs alpha in (0,1), rho > 0");
  return 2.0 * normal_cdf(normal_quantile(alpha / 2.0) / rho);
}

double rho_scenario(const RhoScenario& sc) {
  switch (sc.kind) {
    case RhoScenarioKind::NegBinMean:
      if (!(sc.mean > 0.0) || !(sc.dispersion > 0.0))
        throw Error(ErrorCode::InvalidParameter, "negbin scenario needs mean, dispersion > 0");
      return std::sqrt(1.0 + sc.mean / sc.dispersion);
    case RhoScenarioKind::BinomialMean:
      if (!(sc.p > 0.0 && sc.p < 1.0))
        throw Error(ErrorCode::InvalidParameter, "binomial scenario needs p in (0,1)");
      return std::sqrt(1.0 - sc.p);
    case RhoScenarioKind::GaussianMean:
      if (!(sc.sigma_true > 0.0) || !(sc.sigma_model > 0.0))
        throw Error(ErrorCode::InvalidParameter, "gaussian scenario needs positive sds");
      return sc.sigma_true / sc.sigma_model;
    case RhoScenarioKind::GaussianMse:
      if (!(sc.sigma_true > 0.0) || !(sc.sigma_model > 0.0))
        throw Error(ErrorCode::InvalidParameter, "gaussian scenario needs positive sds");
      return (sc.sigma_true * sc.sigma_true) / (sc.sigma_model * sc.sigma_model);
  }
  throw Error(ErrorCode::InvalidParameter, "unknown rho scenario");
}

namespace {

std::vector<double> parse_args(std::string_view arg) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= arg.size() && !arg.empty()) {
    const auto comma = arg.find(',', pos);
    const auto piece = arg.substr(pos, comma == std::string_view::npos ? arg.npos : comma - pos);
    try {
      out.push_back(std::stod(std::string(piece)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidParameter, "bad scenario argument: " + std::string(piece));
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

RhoScenario parse_rho_scenario(std::string_view name) {
  std::string_view head = name;
  std::string_view arg;
  if (const auto pos = name.find(':'); pos != std::string_view::npos) {
    head = name.substr(0, pos);
    arg = name.substr(pos + 1);
  }
  const auto args = parse_args(arg);
  RhoScenario sc;
  if (head == "negbin") {
    sc.kind = RhoScenarioKind::NegBinMean;
    if (args.empty()) throw Error(ErrorCode::InvalidParameter, "negbin:<tau>[,<mu>]");
    sc.dispersion = args[0];
    sc.mean = args.size() > 1 ? args[1] : 2.0;
  } else if (head == "binomial") {
    sc.kind = RhoScenarioKind::BinomialMean;
    if (args.empty()) throw Error(ErrorCode::InvalidParameter, "binomial:<p>");
    sc.p = args[0];
  } else if (head == "gaussian_mean" || head == "gaussian_mse") {
    sc.kind = head == "gaussian_mean" ? RhoScenarioKind::GaussianMean
                                      : RhoScenarioKind::GaussianMse;
    if (args.size() != 2)
      throw Error(ErrorCode::InvalidParameter, std::string(head) + ":<sigma*>,<sigma>");
    sc.sigma_true = args[0];
    sc.sigma_model = args[1];
  } else {
    throw Error(ErrorCode::InvalidParameter, "unknown scenario: " + std::string(name));
  }
  return sc;
}

std::string rho_scenario_name(const RhoScenario& sc) {
  char buf[96];
  switch (sc.kind) {
    case RhoScenarioKind::NegBinMean:
      std::snprintf(buf, sizeof(buf), "negbin:%g,%g", sc.dispersion, sc.mean);
      break;
    case RhoScenarioKind::BinomialMean:
      std::snprintf(buf, sizeof(buf), "binomial:%g", sc.p);
      break;
    case RhoScenarioKind::GaussianMean:
      std::snprintf(buf, sizeof(buf), "gaussian_mean:%g,%g", sc.sigma_true, sc.sigma_model);
      break;
    case RhoScenarioKind::GaussianMse:
      std::snprintf(buf, sizeof(buf), "gaussian_mse:%g,%g", sc.sigma_true, sc.sigma_model);
      break;
  }
  return buf;
}

}  // namespace spc
