#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "spc/harness.hpp"

using namespace spc;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

const char* kTinyConfig = R"({
  "model": {"type": "poisson_gamma", "shape": 0.1, "rate": 0.2},
  "truths": [{"name": "null", "type": "poisson", "rate": 2.0},
             {"name": "over", "type": "negbin", "mean": 2.0, "dispersion": 0.01}],
  "statistics": ["mean"],
  "methods": [{"label": "single_0.5", "method": "single_spc", "q": 0.5, "mc_samples": 120},
              {"label": "ppc", "method": "ppc", "mc_samples": 120}],
  "sizes": [60],
  "replications": 50,
  "alpha": 0.05,
  "master_seed": 31415,
  "parallelism": 1,
  "save_pvalues": true,
  "save_qq": true
})";

}  // namespace

TEST_CASE("estimate_rate with the Wilson interval") {
  std::vector<double> ps(1000, 0.5);
  for (int i = 0; i < 50; ++i) ps[static_cast<std::size_t>(i)] = 0.01;
  const auto est = estimate_rate(ps, 0.05);
  CHECK(est.rate == doctest::Approx(0.05));
  // frozen from the Wilson formula oracle
  CHECK(est.ci_low == doctest::Approx(0.03813026239274882).epsilon(1e-9));
  CHECK(est.ci_high == doctest::Approx(0.06531382024425081).epsilon(1e-9));

  CHECK(estimate_rate(std::vector<double>(10, 1.0), 0.05).rate == 0.0);
  CHECK(estimate_rate(std::vector<double>(10, 0.0), 0.05).rate == 1.0);
  CHECK_THROWS_AS(estimate_rate(std::vector<double>{}, 0.05), Error);
}

TEST_CASE("qq plotting positions") {
  const auto one = qq_points(std::vector<double>{0.42});
  REQUIRE(one.size() == 1);
  CHECK(one[0].first == doctest::Approx(0.5));
  CHECK(one[0].second == doctest::Approx(0.42));

  const auto four = qq_points(std::vector<double>{0.2, 0.4, 0.1, 0.3});
  const double xs[] = {0.125, 0.375, 0.625, 0.875};
  const double ys[] = {0.1, 0.2, 0.3, 0.4};
  for (int i = 0; i < 4; ++i) {
    CHECK(four[static_cast<std::size_t>(i)].first == doctest::Approx(xs[i]));
    CHECK(four[static_cast<std::size_t>(i)].second == doctest::Approx(ys[i]));
  }

  // perfect uniform grid sits on the diagonal within 1/(2n)
  std::vector<double> grid;
  for (int i = 1; i <= 40; ++i) grid.push_back(i / 41.0);
  for (const auto& [u, p] : qq_points(grid)) CHECK(std::fabs(u - p) <= 0.5 / 40.0 + 1e-12);
}

TEST_CASE("config parsing is strict") {
  CHECK_NOTHROW(load_config_json(kTinyConfig));
  std::string bad = kTinyConfig;
  bad.insert(bad.rfind('}'), ", \"typo_field\": 1");
  CHECK_THROWS_AS(load_config_json(bad), Error);

  std::string bad_method = kTinyConfig;
  bad_method.replace(bad_method.find("\"single_spc\""), 12, "\"double_spc\"");
  CHECK_THROWS_AS(load_config_json(bad_method), Error);

  std::string few_reps = kTinyConfig;
  few_reps.replace(few_reps.find("\"replications\": 50"), 18, "\"replications\": 10");
  CHECK_THROWS_AS(load_config_json(few_reps), Error);

  // round trip through the serializer
  const auto cfg = load_config_json(kTinyConfig);
  const auto echoed = load_config_json(config_to_json(cfg));
  CHECK(echoed.truths.size() == 2);
  CHECK(echoed.methods[0].label == "single_0.5");
  CHECK(echoed.master_seed == 31415);
}

TEST_CASE("run_experiment is deterministic across parallelism") {
  auto cfg = load_config_json(kTinyConfig);
  cfg.parallelism = 1;
  const auto rep1 = run_experiment(cfg);
  cfg.parallelism = 4;
  const auto rep4 = run_experiment(cfg);

  const auto dir1 = (std::filesystem::temp_directory_path() / "spc_par1").string();
  const auto dir4 = (std::filesystem::temp_directory_path() / "spc_par4").string();
  write_report(rep1, cfg, dir1);
  write_report(rep4, cfg, dir4);
  CHECK(slurp(dir1 + "/report.csv") == slurp(dir4 + "/report.csv"));
  CHECK(slurp(dir1 + "/pvalues.csv") == slurp(dir4 + "/pvalues.csv"));
  CHECK(slurp(dir1 + "/qq.csv") == slurp(dir4 + "/qq.csv"));

  const auto header = slurp(dir1 + "/report.csv").substr(0, 66);
  CHECK(header == "method,statistic,N,q,k,alpha,estimate,ci_low,ci_high,reps,seed\n");

  // every row's estimate is reproducible from the raw p-value matrix
  REQUIRE(rep1.rows.size() == rep1.pvalues_ts.size());
  for (std::size_t row = 0; row < rep1.rows.size(); ++row) {
    std::vector<double> usable;
    for (const double p : rep1.pvalues_ts[row])
      if (!std::isnan(p)) usable.push_back(p);
    REQUIRE(usable.size() == rep1.rows[row].reps);
    CHECK(estimate_rate(usable, cfg.alpha).rate == doctest::Approx(rep1.rows[row].estimate));
  }

  // with two truths the method column is truth-qualified
  CHECK(rep1.rows[0].method.find("null/") == 0);
}

TEST_CASE("segmentation covers disjoint indices and estimates rates") {
  RngStream rng(SeedSpec{77, {1}});
  IidDataset data;
  for (int i = 0; i < 2000; ++i)
    data.values.push_back(static_cast<double>(rng.geometric_from_zero(0.4)));

  std::vector<MethodEntry> methods(1);
  methods[0].label = "single";
  methods[0].cfg.method = CheckMethod::SingleSpc;
  methods[0].cfg.statistic = parse_statistic("mean");
  methods[0].cfg.mc_samples = 150;

  const Model model = GeometricBeta{0.1, 0.2};
  const auto res =
      run_airline_style_segmentation(data, model, 200, methods, 0.05, SeedSpec{77, {2}});
  CHECK(res.segments == 10);
  CHECK(res.pvalues[0].size() == 10);
  std::set<std::size_t> seen(res.used_indices.begin(), res.used_indices.end());
  CHECK(seen.size() == 2000);  // no repeats, full coverage of 10 * 200
  CHECK(res.rates[0].rate <= 1.0);

  // n_sub > N/2 is rejected; < 10 segments warns but runs
  CHECK_THROWS_AS(
      run_airline_style_segmentation(data, model, 1500, methods, 0.05, SeedSpec{1, {}}),
      Error);
  const auto coarse =
      run_airline_style_segmentation(data, model, 500, methods, 0.05, SeedSpec{1, {}});
  CHECK(coarse.segments == 4);
  CHECK(!coarse.warnings.empty());
}

TEST_CASE("csv ingestion and check_csv") {
  const auto iid_path = write_temp("spc_iid.csv", "value\n1.0\n2.5\n3.5\n-0.5\n");
  const auto data = read_csv_dataset(iid_path, CsvSchema::Auto);
  CHECK(std::get<IidDataset>(data).values.size() == 4);

  const auto grp_path =
      write_temp("spc_grp.csv", "value,group\n1.0,a\n2.0,b\n3.0,a\n4.0,b\n");
  const auto grp = std::get<GroupedDataset>(read_csv_dataset(grp_path, CsvSchema::Grouped));
  REQUIRE(grp.groups.size() == 2);
  CHECK(grp.groups[0] == std::vector<double>{1.0, 3.0});

  const auto ts_path = write_temp("spc_ts.csv", "value,time\n1.0,0.5\n2.0,1.5\n3.0,2.0\n");
  CHECK(std::get<TimeSeriesDataset>(read_csv_dataset(ts_path, CsvSchema::Auto)).times[2] ==
        doctest::Approx(2.0));

  // parse errors carry line numbers
  const auto bad_path = write_temp("spc_bad.csv", "value\n1.0\nnope\n");
  try {
    read_csv_dataset(bad_path, CsvSchema::Auto);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(e.position() == 3);
  }
  const auto nonmono =
      write_temp("spc_nonmono.csv", "value,time\n1.0,0.0\n2.0,2.0\n3.0,1.0\n");
  try {
    read_csv_dataset(nonmono, CsvSchema::Auto);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(e.position() == 4);
  }
  const auto odd = write_temp("spc_odd.csv", "value,weight\n1.0,2.0\n");
  CHECK_THROWS_AS(read_csv_dataset(odd, CsvSchema::Auto), Error);
  CHECK_THROWS_AS(read_csv_dataset(iid_path, CsvSchema::Grouped), Error);

  // a 66-row single-column file under the improper normal model
  std::string sixty_six = "value\n";
  RngStream rng(SeedSpec{66, {}});
  for (int i = 0; i < 66; ++i)
    sixty_six += std::to_string(rng.normal(26.0, 5.0)) + "\n";
  const auto light = write_temp("spc_light.csv", sixty_six);
  CheckConfig cfg;
  cfg.method = CheckMethod::SingleSpc;
  cfg.statistic = parse_statistic("mean");
  cfg.mc_samples = 400;
  const auto res = check_csv(light, CsvSchema::Auto, NormalImproper{}, cfg, SeedSpec{9, {}});
  CHECK(res.p.value >= 0.0);
  CHECK(res.p.value <= 1.0);

  // group column with a non-hierarchical model is a schema mismatch
  try {
    check_csv(grp_path, CsvSchema::Auto, PoissonGamma{0.1, 0.2}, cfg, SeedSpec{9, {}});
    FAIL("expected SchemaMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaMismatch);
  }
}

TEST_CASE("model spec strings") {
  const auto pg = std::get<PoissonGamma>(parse_model_spec("poisson_gamma:0.1,0.2"));
  CHECK(pg.shape == doctest::Approx(0.1));
  CHECK(model_spec_name(parse_model_spec("gaussian_hier:4")) == "gaussian_hier:4,1000,1");
  CHECK(std::holds_alternative<NormalImproper>(parse_model_spec("normal_improper")));
  CHECK_THROWS_AS(parse_model_spec("poisson_gamma:0.1"), Error);
  CHECK_THROWS_AS(parse_model_spec("weibull:1,2"), Error);
}
