#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "spc/models.hpp"
#include "spc/rng.hpp"
#include "spc/statistics.hpp"

using namespace spc;

namespace {

// Independent oracle: full sort, 1-based order statistic at ceil(c n).
double quantile_oracle(std::vector<double> v, double c) {
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(c * static_cast<double>(v.size())));
  return v[rank - 1];
}

}  // namespace

TEST_CASE("statistic name parsing round-trips") {
  for (const char* name :
       {"mean", "moment2", "moment3", "quantile:0.75", "std_dev", "success_rate",
        "autocorr:3", "grand_mean", "mean_group_quantiles:0.75",
        "quantile_group_means:0.9", "mse"}) {
    const auto spec = parse_statistic(name);
    CHECK(statistic_name(spec) == name);
  }
  CHECK_THROWS_AS(parse_statistic("median"), Error);
  CHECK_THROWS_AS(parse_statistic("quantile:1.5"), Error);
  CHECK_THROWS_AS(parse_statistic("autocorr:-1"), Error);
  CHECK(is_parameter_dependent(parse_statistic("mse")));
  CHECK(needs_grouped(parse_statistic("grand_mean")));
}

TEST_CASE("flat statistics match their definitions") {
  const Dataset d123 = IidDataset{{1.0, 2.0, 3.0}};
  CHECK(evaluate(parse_statistic("mean"), d123) == doctest::Approx(2.0));
  CHECK(evaluate(parse_statistic("moment2"), d123) == doctest::Approx(14.0 / 3.0));
  CHECK(evaluate(parse_statistic("moment3"), d123) == doctest::Approx(36.0 / 3.0));

  // success rate N / sum(x) = 3/4
  CHECK(evaluate(parse_statistic("success_rate"), IidDataset{{1.0, 1.0, 2.0}}) ==
        doctest::Approx(0.75));
  CHECK_THROWS_AS(evaluate(parse_statistic("success_rate"), IidDataset{{0.0, 0.0}}), Error);

  // std dev with divisor N
  CHECK(evaluate(parse_statistic("std_dev"), IidDataset{{1.0, 3.0}}) == doctest::Approx(1.0));

  // autocorrelation
  const Dataset ts = TimeSeriesDataset{{1.0, 2.0, 1.5, 3.0, 0.5}, {0, 1, 2, 3, 4}};
  CHECK(evaluate(parse_statistic("autocorr:0"), ts) == doctest::Approx(1.0));
  CHECK_THROWS_AS(evaluate(parse_statistic("autocorr:9"), ts), Error);
  CHECK_THROWS_AS(evaluate(parse_statistic("autocorr:0"), IidDataset{{2.0, 2.0}}), Error);

  // shape mismatches
  CHECK_THROWS_AS(evaluate(parse_statistic("mean"), GroupedDataset{{{1.0}, {2.0}}}), Error);
  CHECK_THROWS_AS(evaluate(parse_statistic("grand_mean"), d123), Error);
}

TEST_CASE("grouped statistics") {
  const GroupedDataset grp{{{0.0}, {2.0}, {4.0}, {6.0}}};
  // order statistic at ceil(0.75 * 4) = 3rd of the sorted means {0,2,4,6} -> 4
  CHECK(evaluate(parse_statistic("quantile_group_means:0.75"), grp) == doctest::Approx(4.0));
  CHECK(quantile_oracle({0.0, 2.0, 4.0, 6.0}, 0.75) == doctest::Approx(4.0));

  const GroupedDataset g2{{{1.0, 5.0}, {2.0, 2.0, 2.0}}};
  CHECK(evaluate(parse_statistic("grand_mean"), g2) ==
        doctest::Approx(evaluate(parse_statistic("mean"), IidDataset{flatten(g2)})));
  // per-group 75th quantiles: ceil(.75*2)=2nd of {1,5} -> 5; ceil(.75*3)=3rd of {2,2,2} -> 2
  CHECK(evaluate(parse_statistic("mean_group_quantiles:0.75"), g2) == doctest::Approx(3.5));
}

TEST_CASE("quantile agrees with a brute-force sort oracle") {
  RngStream rng(SeedSpec{99, {}});
  std::vector<double> scratch;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.next_u64() % 40);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    const double c = 0.02 + 0.96 * rng.uniform();
    CHECK(order_statistic(v, c, scratch) == doctest::Approx(quantile_oracle(v, c)));
  }
}

TEST_CASE("translation and affine invariance properties") {
  RngStream rng(SeedSpec{100, {}});
  std::vector<double> v(40);
  for (auto& x : v) x = rng.normal(1.0, 2.0);
  const Dataset base = IidDataset{v};

  std::vector<double> shifted = v;
  for (auto& x : shifted) x += 3.25;
  CHECK(evaluate(parse_statistic("mean"), IidDataset{shifted}) ==
        doctest::Approx(evaluate(parse_statistic("mean"), base) + 3.25));

  std::vector<double> affine = v;
  for (auto& x : affine) x = 2.5 * x + 7.0;
  const auto ac = parse_statistic("autocorr:2");
  CHECK(evaluate(ac, IidDataset{affine}) == doctest::Approx(evaluate(ac, base)));
}

TEST_CASE("mse discrepancy") {
  const Model model = NormalKnownVar{1.0, 0.0, 1.0};
  const auto mse = parse_statistic("mse");
  CHECK(evaluate_discrepancy(mse, IidDataset{{1.0, 3.0}}, ScalarParam{2.0}, model) ==
        doctest::Approx(1.0));
  CHECK(evaluate_discrepancy(mse, IidDataset{{2.0, 2.0, 2.0}}, ScalarParam{2.0}, model) ==
        doctest::Approx(0.0));
  CHECK(evaluate_discrepancy(mse, IidDataset{{0.0, 2.0, 4.0}}, ScalarParam{1.0}, model) ==
        doctest::Approx(11.0 / 3.0));
  // grouped data needs per-group means
  const GroupedDataset grp{{{1.0, 2.0}, {3.0}}};
  const HierParam h{0.0, 1.0, {1.5, 3.0}};
  CHECK(evaluate_discrepancy(mse, grp, h, GaussianHierarchical{}) ==
        doctest::Approx((0.25 + 0.25 + 0.0) / 3.0));
  CHECK_THROWS_AS(evaluate(mse, IidDataset{{1.0}}), Error);
}
