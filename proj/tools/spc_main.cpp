#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "spc/harness.hpp"
#include "spc/theory.hpp"

namespace {

int run_simulate(const std::string& config_path, const std::string& out_dir) {
  const auto cfg = spc::load_config_file(config_path);
  const auto report = spc::run_experiment(cfg);
  spc::write_report(report, cfg, out_dir);
  std::printf("wrote %zu report rows to %s\n", report.rows.size(), out_dir.c_str());
  if (!report.errors.empty())
    std::printf("%zu replication errors recorded in errors.csv\n", report.errors.size());
  return 0;
}

int run_check_cmd(const std::string& data_path, const std::string& schema_name,
                  const std::string& model_spec, const std::string& statistic,
                  const std::string& method, double q, long k, double b, double beta,
                  const std::string& split_name, const std::string& outer_name,
                  const std::string& tie_mode, std::uint64_t seed, std::size_t mc) {
  spc::CheckConfig cfg;
  cfg.method = spc::parse_method(method);
  cfg.statistic = spc::parse_statistic(statistic);
  cfg.q = q;
  const auto strategy = spc::parse_split(split_name, q);
  cfg.inner_split = strategy.kind;
  cfg.ts_block = strategy.block;
  cfg.outer_split = spc::parse_fold_kind(outer_name);
  if (k > 0) cfg.k = static_cast<std::size_t>(k);
  cfg.fold_rule = spc::FoldRule{b, beta};
  cfg.mc_samples = mc;
  cfg.tie_mode = tie_mode == "midp" ? spc::TieMode::MidP : spc::TieMode::Strict;

  const auto model = spc::parse_model_spec(model_spec);
  const auto schema = spc::parse_csv_schema(schema_name);
  const auto res = spc::check_csv(data_path, schema, model, cfg, spc::SeedSpec{seed, {}});

  std::printf("p            = %.6g\n", res.p.value);
  std::printf("p_two_sided  = %.6g\n", res.p_two_sided.value);
  if (res.fold_pvalues) {
    std::printf("fold p-values (k = %zu):", res.fold_pvalues->size());
    for (const auto& fp : *res.fold_pvalues) std::printf(" %.4g", fp.value);
    std::printf("\n");
  }
  std::printf("n_observed   = %zu\nn_heldout    = %zu\nmc_samples   = %zu\n",
              res.diagnostics.n_observed, res.diagnostics.n_heldout,
              res.diagnostics.mc_samples);
  std::printf("seed trail   = %s\n", res.diagnostics.seed_trail.c_str());
  for (const auto& w : res.diagnostics.warnings)
    std::printf("warning      : %s\n", w.c_str());
  return 0;
}

int run_theory(const std::string& scenario_name, double alpha, double q) {
  const auto scenario = spc::parse_rho_scenario(scenario_name);
  const double rho = spc::rho_scenario(scenario);
  std::printf("scenario            = %s\n", spc::rho_scenario_name(scenario).c_str());
  std::printf("q                   = %.6g (the closed-form rho here is q-invariant)\n", q);
  std::printf("rho                 = %.10g\n", rho);
  std::printf("rho^2               = %.10g\n", rho * rho);
  std::printf("one-sided Pr[p<a]   = %.10g\n", spc::asym_rejection_prob(alpha, rho));
  std::printf("two-sided power     = %.10g\n", spc::asym_power_two_sided(alpha, rho));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"split predictive checks"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "run a Monte Carlo experiment grid");
  std::string config_path, out_dir = "out";
  sim->add_option("--config", config_path, "experiment config JSON")->required();
  sim->add_option("--out", out_dir, "output directory");

  auto* chk = app.add_subcommand("check", "run one predictive check on a CSV");
  std::string data_path, model_spec, statistic = "mean", method = "single_spc";
  std::string split = "iid_random", outer = "iid_random", schema = "auto", tie = "strict";
  double q = 0.5, b = 1.0, beta = 0.49;
  long k = 0;
  std::uint64_t seed = 0;
  std::size_t mc = 1000;
  chk->add_option("--data", data_path, "CSV file (columns: value[,group|,time])")->required();
  chk->add_option("--model", model_spec, "model spec, e.g. poisson_gamma:0.1,0.2")->required();
  chk->add_option("--statistic", statistic, "statistic name");
  chk->add_option("--method", method, "ppc | single_spc | divided_spc");
  chk->add_option("--q", q, "split proportion");
  chk->add_option("--k", k, "explicit fold count (divided)");
  chk->add_option("--b", b, "fold rule coefficient");
  chk->add_option("--beta", beta, "fold rule exponent");
  chk->add_option("--split", split, "inner split strategy");
  chk->add_option("--outer-split", outer, "fold formation strategy (divided)");
  chk->add_option("--schema", schema, "auto | iid | grouped | timeseries");
  chk->add_option("--tie-mode", tie, "strict | midp");
  chk->add_option("--seed", seed, "master seed");
  chk->add_option("--mc", mc, "Monte Carlo samples S");

  auto* thy = app.add_subcommand("theory", "closed-form asymptotics for a scenario");
  std::string scenario;
  double alpha = 0.05, tq = 0.5;
  thy->add_option("--scenario", scenario,
                  "negbin:<tau>[,<mu>] | binomial:<p> | gaussian_mean:<s*>,<s> | "
                  "gaussian_mse:<s*>,<s>")->required();
  thy->add_option("--alpha", alpha, "significance level");
  thy->add_option("--q", tq, "split proportion (echoed)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(config_path, out_dir);
    if (chk->parsed())
      return run_check_cmd(data_path, schema, model_spec, statistic, method, q, k, b,
                           beta, split, outer, tie, seed, mc);
    if (thy->parsed()) return run_theory(scenario, alpha, tq);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
