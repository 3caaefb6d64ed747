#include "spc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <thread>

#include "json.hpp"

namespace spc {

using nlohmann::json;

std::string SizeSpec::label() const {
  if (grouped())
    return "I" + std::to_string(groups) + "xJ" + std::to_string(group_size);
  if (time_series) return "T" + std::to_string(n);
  return std::to_string(n);
}

// ---------------------------------------------------------------------------
// Rate estimation and QQ points
// ---------------------------------------------------------------------------

RateEstimate estimate_rate(std::span<const double> pvalues, double alpha) {
  if (pvalues.empty()) throw Error(ErrorCode::EmptyData, "estimate_rate on empty input");
  std::size_t rejections = 0;
  for (const double p : pvalues)
    if (p < alpha) ++rejections;
  const auto ci = wilson_interval(rejections, pvalues.size());
  return RateEstimate{static_cast<double>(rejections) / static_cast<double>(pvalues.size()),
                      ci.low, ci.high};
}

std::vector<std::pair<double, double>> qq_points(std::span<const double> pvalues) {
  if (pvalues.empty()) throw Error(ErrorCode::EmptyData, "qq_points on empty input");
  std::vector<double> sorted(pvalues.begin(), pvalues.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(sorted.size());
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    out.emplace_back((static_cast<double>(i) + 0.5) / n, sorted[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Model spec strings
// ---------------------------------------------------------------------------

namespace {

std::vector<double> numeric_args(std::string_view arg) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (!arg.empty()) {
    const auto comma = arg.find(',', pos);
    const auto piece =
        arg.substr(pos, comma == std::string_view::npos ? arg.npos : comma - pos);
    try {
      out.push_back(std::stod(std::string(piece)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidParameter, "bad model argument: " + std::string(piece));
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

Model parse_model_spec(std::string_view spec) {
  std::string_view head = spec;
  std::string_view arg;
  if (const auto pos = spec.find(':'); pos != std::string_view::npos) {
    head = spec.substr(0, pos);
    arg = spec.substr(pos + 1);
  }
  const auto args = numeric_args(arg);
  const auto need = [&](std::size_t lo, std::size_t hi, const char* usage) {
    if (args.size() < lo || args.size() > hi)
      throw Error(ErrorCode::InvalidParameter, std::string("usage: ") + usage);
  };
  if (head == "poisson_gamma") {
    need(2, 2, "poisson_gamma:<shape>,<rate>");
    return PoissonGamma{args[0], args[1]};
  }
  if (head == "normal_known_var") {
    need(3, 3, "normal_known_var:<sigma>,<prior_mean>,<prior_sd>");
    return NormalKnownVar{args[0], args[1], args[2]};
  }
  if (head == "normal_improper") {
    need(0, 0, "normal_improper");
    return NormalImproper{};
  }
  if (head == "geometric_beta") {
    need(2, 2, "geometric_beta:<a>,<b>");
    return GeometricBeta{args[0], args[1]};
  }
  if (head == "gaussian_hier") {
    need(1, 3, "gaussian_hier:<obs_var>[,<burn_in>[,<thinning>]]");
    GaussianHierarchical gh;
    gh.obs_var = args[0];
    if (args.size() > 1) gh.gibbs.burn_in = static_cast<std::size_t>(args[1]);
    if (args.size() > 2) gh.gibbs.thinning = static_cast<std::size_t>(args[2]);
    return gh;
  }
  throw Error(ErrorCode::InvalidParameter, "unknown model: " + std::string(spec));
}

std::string model_spec_name(const Model& model) {
  char buf[128];
  if (const auto* pg = std::get_if<PoissonGamma>(&model)) {
    std::snprintf(buf, sizeof(buf), "poisson_gamma:%g,%g", pg->shape, pg->rate);
  } else if (const auto* nk = std::get_if<NormalKnownVar>(&model)) {
    std::snprintf(buf, sizeof(buf), "normal_known_var:%g,%g,%g", nk->sigma, nk->prior_mean,
                  nk->prior_sd);
  } else if (std::get_if<NormalImproper>(&model)) {
    std::snprintf(buf, sizeof(buf), "normal_improper");
  } else if (const auto* gb = std::get_if<GeometricBeta>(&model)) {
    std::snprintf(buf, sizeof(buf), "geometric_beta:%g,%g", gb->a, gb->b);
  } else {
    const auto& gh = std::get<GaussianHierarchical>(model);
    std::snprintf(buf, sizeof(buf), "gaussian_hier:%g,%zu,%zu", gh.obs_var,
                  gh.gibbs.burn_in, gh.gibbs.thinning);
  }
  return buf;
}

// ---------------------------------------------------------------------------
// JSON config
// ---------------------------------------------------------------------------

namespace {

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& ctx) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end())
      throw Error(ErrorCode::ConfigError, "unknown field '" + key + "' in " + ctx);
  }
}

Model model_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "poisson_gamma") {
    require_keys(j, {"type", "shape", "rate"}, "model");
    return PoissonGamma{j.at("shape").get<double>(), j.at("rate").get<double>()};
  }
  if (type == "normal_known_var") {
    require_keys(j, {"type", "sigma", "prior_mean", "prior_sd"}, "model");
    return NormalKnownVar{j.at("sigma").get<double>(), j.at("prior_mean").get<double>(),
                          j.at("prior_sd").get<double>()};
  }
  if (type == "normal_improper") {
    require_keys(j, {"type"}, "model");
    return NormalImproper{};
  }
  if (type == "geometric_beta") {
    require_keys(j, {"type", "a", "b"}, "model");
    return GeometricBeta{j.at("a").get<double>(), j.at("b").get<double>()};
  }
  if (type == "gaussian_hier") {
    require_keys(j, {"type", "obs_var", "burn_in", "thinning"}, "model");
    GaussianHierarchical gh;
    gh.obs_var = j.at("obs_var").get<double>();
    if (j.contains("burn_in")) gh.gibbs.burn_in = j.at("burn_in").get<std::size_t>();
    if (j.contains("thinning")) gh.gibbs.thinning = j.at("thinning").get<std::size_t>();
    return gh;
  }
  throw Error(ErrorCode::ConfigError, "unknown model type '" + type + "'");
}

json model_to_json(const Model& model) {
  json j;
  if (const auto* pg = std::get_if<PoissonGamma>(&model)) {
    j = {{"type", "poisson_gamma"}, {"shape", pg->shape}, {"rate", pg->rate}};
  } else if (const auto* nk = std::get_if<NormalKnownVar>(&model)) {
    j = {{"type", "normal_known_var"},
         {"sigma", nk->sigma},
         {"prior_mean", nk->prior_mean},
         {"prior_sd", nk->prior_sd}};
  } else if (std::get_if<NormalImproper>(&model)) {
    j = {{"type", "normal_improper"}};
  } else if (const auto* gb = std::get_if<GeometricBeta>(&model)) {
    j = {{"type", "geometric_beta"}, {"a", gb->a}, {"b", gb->b}};
  } else {
    const auto& gh = std::get<GaussianHierarchical>(model);
    j = {{"type", "gaussian_hier"},
         {"obs_var", gh.obs_var},
         {"burn_in", gh.gibbs.burn_in},
         {"thinning", gh.gibbs.thinning}};
  }
  return j;
}

TruthSpec truth_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "poisson") {
    require_keys(j, {"type", "name", "rate"}, "truth");
    return PoissonTruth{j.at("rate").get<double>()};
  }
  if (type == "negbin") {
    require_keys(j, {"type", "name", "mean", "dispersion"}, "truth");
    return NegBinTruth{j.at("mean").get<double>(), j.at("dispersion").get<double>()};
  }
  if (type == "binomial") {
    require_keys(j, {"type", "name", "trials", "prob"}, "truth");
    return BinomialTruth{j.at("trials").get<long>(), j.at("prob").get<double>()};
  }
  if (type == "normal") {
    require_keys(j, {"type", "name", "mean", "sd"}, "truth");
    return NormalTruth{j.at("mean").get<double>(), j.at("sd").get<double>()};
  }
  if (type == "geometric") {
    require_keys(j, {"type", "name", "theta"}, "truth");
    return GeometricTruthSpec{j.at("theta").get<double>()};
  }
  if (type == "hier_scenario") {
    require_keys(j, {"type", "name", "scenario"}, "truth");
    const std::string sc = j.at("scenario").get<std::string>();
    HierScenario s;
    if (sc == "s1") s = HierScenario::S1;
    else if (sc == "s2") s = HierScenario::S2;
    else if (sc == "s3") s = HierScenario::S3;
    else if (sc == "s4") s = HierScenario::S4;
    else throw Error(ErrorCode::ConfigError, "unknown scenario '" + sc + "'");
    return HierTruth{s};
  }
  throw Error(ErrorCode::ConfigError, "unknown truth type '" + type + "'");
}

json truth_to_json(const TruthEntry& entry) {
  json j;
  if (const auto* p = std::get_if<PoissonTruth>(&entry.truth)) {
    j = {{"type", "poisson"}, {"rate", p->rate}};
  } else if (const auto* nb = std::get_if<NegBinTruth>(&entry.truth)) {
    j = {{"type", "negbin"}, {"mean", nb->mean}, {"dispersion", nb->dispersion}};
  } else if (const auto* bn = std::get_if<BinomialTruth>(&entry.truth)) {
    j = {{"type", "binomial"}, {"trials", bn->trials}, {"prob", bn->prob}};
  } else if (const auto* nm = std::get_if<NormalTruth>(&entry.truth)) {
    j = {{"type", "normal"}, {"mean", nm->mean}, {"sd", nm->sd}};
  } else if (const auto* g = std::get_if<GeometricTruthSpec>(&entry.truth)) {
    j = {{"type", "geometric"}, {"theta", g->theta}};
  } else {
    const auto& h = std::get<HierTruth>(entry.truth);
    const char* names[] = {"s1", "s2", "s3", "s4"};
    j = {{"type", "hier_scenario"}, {"scenario", names[static_cast<int>(h.scenario)]}};
  }
  j["name"] = entry.name;
  return j;
}

MethodEntry method_from_json(const json& j) {
  require_keys(j,
               {"label", "method", "q", "split", "outer_split", "k", "fold_rule",
                "mc_samples", "tie_mode", "pop_outer_reps"},
               "method");
  MethodEntry entry;
  entry.cfg.method = parse_method(j.at("method").get<std::string>());
  if (j.contains("q")) entry.cfg.q = j.at("q").get<double>();
  if (j.contains("split")) {
    const auto st = parse_split(j.at("split").get<std::string>(), entry.cfg.q);
    entry.cfg.inner_split = st.kind;
    entry.cfg.ts_block = st.block;
  }
  if (j.contains("outer_split"))
    entry.cfg.outer_split = parse_fold_kind(j.at("outer_split").get<std::string>());
  if (j.contains("k")) entry.cfg.k = j.at("k").get<std::size_t>();
  if (j.contains("fold_rule")) {
    const auto& fr = j.at("fold_rule");
    require_keys(fr, {"b", "beta"}, "fold_rule");
    if (fr.contains("b")) entry.cfg.fold_rule.b = fr.at("b").get<double>();
    if (fr.contains("beta")) entry.cfg.fold_rule.beta = fr.at("beta").get<double>();
  }
  if (j.contains("mc_samples")) entry.cfg.mc_samples = j.at("mc_samples").get<std::size_t>();
  if (j.contains("tie_mode")) {
    const std::string t = j.at("tie_mode").get<std::string>();
    if (t == "strict") entry.cfg.tie_mode = TieMode::Strict;
    else if (t == "midp") entry.cfg.tie_mode = TieMode::MidP;
    else throw Error(ErrorCode::ConfigError, "tie_mode must be strict or midp");
  }
  if (j.contains("pop_outer_reps"))
    entry.cfg.pop_outer_reps = j.at("pop_outer_reps").get<std::size_t>();
  entry.label = j.contains("label") ? j.at("label").get<std::string>()
                                    : method_name(entry.cfg.method);
  return entry;
}

json method_to_json(const MethodEntry& entry) {
  json j;
  j["label"] = entry.label;
  j["method"] = method_name(entry.cfg.method);
  j["q"] = entry.cfg.q;
  SplitStrategy st;
  st.kind = entry.cfg.inner_split;
  st.q = entry.cfg.q;
  st.block = entry.cfg.ts_block;
  j["split"] = split_name(st);
  j["outer_split"] = fold_kind_name(entry.cfg.outer_split);
  if (entry.cfg.k) j["k"] = *entry.cfg.k;
  j["fold_rule"] = {{"b", entry.cfg.fold_rule.b}, {"beta", entry.cfg.fold_rule.beta}};
  j["mc_samples"] = entry.cfg.mc_samples;
  j["tie_mode"] = entry.cfg.tie_mode == TieMode::Strict ? "strict" : "midp";
  j["pop_outer_reps"] = entry.cfg.pop_outer_reps;
  return j;
}

SizeSpec size_from_json(const json& j) {
  SizeSpec s;
  if (j.is_number_unsigned() || j.is_number_integer()) {
    s.n = j.get<std::size_t>();
    return s;
  }
  require_keys(j, {"n", "groups", "group_size", "time_series"}, "size");
  if (j.contains("groups") != j.contains("group_size"))
    throw Error(ErrorCode::ConfigError, "grouped size needs both groups and group_size");
  if (j.contains("groups")) {
    s.groups = j.at("groups").get<std::size_t>();
    s.group_size = j.at("group_size").get<std::size_t>();
  } else {
    s.n = j.at("n").get<std::size_t>();
  }
  if (j.contains("time_series")) s.time_series = j.at("time_series").get<bool>();
  if (s.time_series && s.grouped())
    throw Error(ErrorCode::ConfigError, "a size is either grouped or a time series");
  return s;
}

json size_to_json(const SizeSpec& s) {
  if (s.grouped()) return json{{"groups", s.groups}, {"group_size", s.group_size}};
  if (s.time_series) return json{{"n", s.n}, {"time_series", true}};
  return json(s.n);
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.truths.empty() || cfg.statistics.empty() || cfg.methods.empty() ||
      cfg.sizes.empty())
    throw Error(ErrorCode::ConfigError, "truths, statistics, methods and sizes must be nonempty");
  if (cfg.replications < 50)
    throw Error(ErrorCode::ConfigError, "replications must be at least 50");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw Error(ErrorCode::ConfigError, "alpha must be in (0,1)");
  for (const auto& s : cfg.sizes)
    if (s.total() == 0) throw Error(ErrorCode::ConfigError, "empty size entry");
}

}  // namespace

ExperimentConfig load_config_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config JSON: ") + e.what());
  }
  try {
    require_keys(j,
                 {"model", "truths", "statistics", "methods", "sizes", "replications",
                  "alpha", "one_sided", "master_seed", "parallelism", "save_pvalues",
                  "save_qq"},
                 "config");
    ExperimentConfig cfg;
    cfg.model = model_from_json(j.at("model"));
    for (const auto& t : j.at("truths")) {
      TruthEntry entry;
      entry.truth = truth_from_json(t);
      entry.name = t.contains("name") ? t.at("name").get<std::string>()
                                      : "truth" + std::to_string(cfg.truths.size());
      cfg.truths.push_back(std::move(entry));
    }
    for (const auto& s : j.at("statistics"))
      cfg.statistics.push_back(parse_statistic(s.get<std::string>()));
    for (const auto& m : j.at("methods")) cfg.methods.push_back(method_from_json(m));
    for (const auto& s : j.at("sizes")) cfg.sizes.push_back(size_from_json(s));
    cfg.replications = j.at("replications").get<std::size_t>();
    if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
    if (j.contains("one_sided")) cfg.one_sided = j.at("one_sided").get<bool>();
    if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("parallelism")) cfg.parallelism = j.at("parallelism").get<std::size_t>();
    if (j.contains("save_pvalues")) cfg.save_pvalues = j.at("save_pvalues").get<bool>();
    if (j.contains("save_qq")) cfg.save_qq = j.at("save_qq").get<bool>();
    validate_config(cfg);
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open config " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_config_json(text);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["model"] = model_to_json(cfg.model);
  j["truths"] = json::array();
  for (const auto& t : cfg.truths) j["truths"].push_back(truth_to_json(t));
  j["statistics"] = json::array();
  for (const auto& s : cfg.statistics) j["statistics"].push_back(statistic_name(s));
  j["methods"] = json::array();
  for (const auto& m : cfg.methods) j["methods"].push_back(method_to_json(m));
  j["sizes"] = json::array();
  for (const auto& s : cfg.sizes) j["sizes"].push_back(size_to_json(s));
  j["replications"] = cfg.replications;
  j["alpha"] = cfg.alpha;
  j["one_sided"] = cfg.one_sided;
  j["master_seed"] = cfg.master_seed;
  j["parallelism"] = cfg.parallelism;
  j["save_pvalues"] = cfg.save_pvalues;
  j["save_qq"] = cfg.save_qq;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

namespace {

void parallel_for(std::size_t n_items, std::size_t width,
                  const std::function<void(std::size_t)>& fn) {
  if (width == 0) width = std::max(1u, std::thread::hardware_concurrency());
  width = std::min(width, n_items);
  if (width <= 1) {
    for (std::size_t i = 0; i < n_items; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(width);
  for (std::size_t w = 0; w < width; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n_items) return;
        fn(i);
      }
    });
  }
  for (auto& t : workers) t.join();
}

PredictiveShape shape_from_size(const SizeSpec& size) {
  PredictiveShape shape;
  if (size.grouped()) {
    shape.grouped = true;
    shape.group_sizes.assign(size.groups, size.group_size);
  } else {
    shape.n = size.n;
  }
  return shape;
}

Dataset dataset_for(const TruthSpec& truth, const SizeSpec& size, RngStream& rng) {
  Dataset data = sample_truth(truth, shape_from_size(size), rng);
  if (size.time_series) {
    auto& iid = std::get<IidDataset>(data);
    TimeSeriesDataset ts;
    ts.values = std::move(iid.values);
    ts.times.resize(ts.values.size());
    for (std::size_t i = 0; i < ts.times.size(); ++i) ts.times[i] = static_cast<double>(i);
    return ts;
  }
  return data;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const std::size_t n_truth = cfg.truths.size();
  const std::size_t n_size = cfg.sizes.size();
  const std::size_t n_method = cfg.methods.size();
  const std::size_t n_stat = cfg.statistics.size();
  const std::size_t n_rows = n_truth * n_size * n_method * n_stat;
  const std::size_t reps = cfg.replications;

  ExperimentReport report;
  report.pvalues.assign(n_rows, std::vector<double>(reps, std::numeric_limits<double>::quiet_NaN()));
  report.pvalues_ts.assign(n_rows, std::vector<double>(reps, std::numeric_limits<double>::quiet_NaN()));
  std::vector<std::size_t> row_k(n_rows, 0);
  std::vector<std::vector<std::string>> item_errors(n_truth * n_size * reps);

  const auto row_index = [&](std::size_t ti, std::size_t si, std::size_t mi, std::size_t gi) {
    return ((ti * n_size + si) * n_method + mi) * n_stat + gi;
  };
  const auto cell_id = [&](std::size_t ti, std::size_t si, std::size_t mi, std::size_t gi) {
    return cfg.truths[ti].name + "/" + cfg.methods[mi].label + "/" +
           statistic_name(cfg.statistics[gi]) + "/" + cfg.sizes[si].label();
  };

  // One work item = (truth, size, replication): the dataset is generated once
  // and every method/statistic runs on it.
  const std::size_t n_items = n_truth * n_size * reps;
  parallel_for(n_items, cfg.parallelism, [&](std::size_t item) {
    const std::size_t r = item % reps;
    const std::size_t si = (item / reps) % n_size;
    const std::size_t ti = item / (reps * n_size);
    SeedSpec data_seed{cfg.master_seed, {0, ti, si, r}};
    Dataset data;
    try {
      RngStream data_stream(data_seed);
      data = dataset_for(cfg.truths[ti].truth, cfg.sizes[si], data_stream);
    } catch (const std::exception& e) {
      item_errors[item].push_back("data: " + std::string(e.what()));
      return;
    }
    for (std::size_t mi = 0; mi < n_method; ++mi) {
      for (std::size_t gi = 0; gi < n_stat; ++gi) {
        CheckConfig check_cfg = cfg.methods[mi].cfg;
        check_cfg.statistic = cfg.statistics[gi];
        const SeedSpec check_seed{cfg.master_seed, {1, ti, si, r, mi, gi}};
        const std::size_t row = row_index(ti, si, mi, gi);
        try {
          const CheckResult res =
              run_check(cfg.model, data, cfg.truths[ti].truth, check_cfg, check_seed);
          report.pvalues[row][r] = res.p.value;
          report.pvalues_ts[row][r] = res.p_two_sided.value;
          if (res.diagnostics.k > 0) row_k[row] = res.diagnostics.k;
        } catch (const std::exception& e) {
          item_errors[item].push_back(cell_id(ti, si, mi, gi) + "@" + std::to_string(r) +
                                      ": " + e.what());
        }
      }
    }
  });

  for (std::size_t item = 0; item < n_items; ++item) {
    const std::size_t r = item % reps;
    for (const auto& msg : item_errors[item]) {
      CellError err;
      err.cell_id = msg.substr(0, msg.find(':'));
      err.replication = r;
      err.message = msg;
      report.errors.push_back(std::move(err));
    }
  }

  for (std::size_t ti = 0; ti < n_truth; ++ti) {
    for (std::size_t si = 0; si < n_size; ++si) {
      for (std::size_t mi = 0; mi < n_method; ++mi) {
        for (std::size_t gi = 0; gi < n_stat; ++gi) {
          const std::size_t row = row_index(ti, si, mi, gi);
          ReportRow out;
          out.method = n_truth > 1
                           ? cfg.truths[ti].name + "/" + cfg.methods[mi].label
                           : cfg.methods[mi].label;
          out.statistic = statistic_name(cfg.statistics[gi]);
          out.n = cfg.sizes[si].total();
          out.size_label = cfg.sizes[si].label();
          const auto method = cfg.methods[mi].cfg.method;
          out.q = (method == CheckMethod::SingleSpc || method == CheckMethod::DividedSpc)
                      ? cfg.methods[mi].cfg.q
                      : 0.0;
          out.k = row_k[row];
          out.alpha = cfg.alpha;
          out.seed = cfg.master_seed;
          out.cell_id = cell_id(ti, si, mi, gi);
          std::vector<double> usable;
          usable.reserve(reps);
          const auto& source = cfg.one_sided ? report.pvalues[row] : report.pvalues_ts[row];
          for (const double p : source)
            if (!std::isnan(p)) usable.push_back(p);
          out.reps = usable.size();
          if (!usable.empty()) {
            const auto rate = estimate_rate(usable, cfg.alpha);
            out.estimate = rate.rate;
            out.ci_low = rate.ci_low;
            out.ci_high = rate.ci_high;
          } else {
            out.estimate = out.ci_low = out.ci_high =
                std::numeric_limits<double>::quiet_NaN();
          }
          report.rows.push_back(std::move(out));
        }
      }
    }
  }
  return report;
}

void write_report(const ExperimentReport& report, const ExperimentConfig& cfg,
                  const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream f(out_dir + "/report.csv");
    f << "method,statistic,N,q,k,alpha,estimate,ci_low,ci_high,reps,seed\n";
    char buf[320];
    for (const auto& row : report.rows) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%.10g,%zu,%.10g,%.10g,%.10g,%.10g,%zu,%llu\n",
                    row.method.c_str(), row.statistic.c_str(), row.n, row.q, row.k,
                    row.alpha, row.estimate, row.ci_low, row.ci_high, row.reps,
                    static_cast<unsigned long long>(row.seed));
      f << buf;
    }
  }
  if (cfg.save_pvalues) {
    std::ofstream f(out_dir + "/pvalues.csv");
    f << "cell_id,replication,p,p_two_sided\n";
    char buf[256];
    for (std::size_t row = 0; row < report.rows.size(); ++row) {
      for (std::size_t r = 0; r < report.pvalues[row].size(); ++r) {
        if (std::isnan(report.pvalues[row][r])) continue;
        std::snprintf(buf, sizeof(buf), "%s,%zu,%.10g,%.10g\n",
                      report.rows[row].cell_id.c_str(), r, report.pvalues[row][r],
                      report.pvalues_ts[row][r]);
        f << buf;
      }
    }
  }
  if (cfg.save_qq) {
    std::ofstream f(out_dir + "/qq.csv");
    f << "cell_id,u,p_sorted\n";
    char buf[256];
    for (std::size_t row = 0; row < report.rows.size(); ++row) {
      std::vector<double> usable;
      for (const double p : report.pvalues[row])
        if (!std::isnan(p)) usable.push_back(p);
      if (usable.empty()) continue;
      for (const auto& [u, p] : qq_points(usable)) {
        std::snprintf(buf, sizeof(buf), "%s,%.10g,%.10g\n",
                      report.rows[row].cell_id.c_str(), u, p);
        f << buf;
      }
    }
  }
  if (!report.errors.empty()) {
    std::ofstream f(out_dir + "/errors.csv");
    f << "cell_id,replication,message\n";
    for (const auto& err : report.errors) {
      std::string msg = err.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      f << err.cell_id << ',' << err.replication << ',' << msg << '\n';
    }
  }
  {
    std::ofstream f(out_dir + "/run.json");
    f << config_to_json(cfg) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Segmentation study and CSV checks
// ---------------------------------------------------------------------------

SegmentationResult run_airline_style_segmentation(const IidDataset& data, const Model& model,
                                                  std::size_t n_sub,
                                                  const std::vector<MethodEntry>& methods,
                                                  double alpha, const SeedSpec& seed) {
  validate(Dataset{data});
  const std::size_t n = data.values.size();
  if (n_sub == 0 || n_sub > n / 2)
    throw Error(ErrorCode::InvalidParameter, "segment size must satisfy n_sub <= N/2");
  if (methods.empty()) throw Error(ErrorCode::ConfigError, "no methods given");

  SegmentationResult out;
  out.segments = n / n_sub;
  if (out.segments < 10)
    out.warnings.push_back("only " + std::to_string(out.segments) +
                           " segments; power estimates will be coarse");

  RngStream perm_stream{SeedSpec(seed).child(0)};
  const auto perm = perm_stream.permutation(n);

  const SeedSpec run_seed = seed.child(1);
  out.pvalues.assign(methods.size(), {});
  out.pvalues_ts.assign(methods.size(), {});
  out.used_indices.reserve(out.segments * n_sub);
  for (std::size_t s = 0; s < out.segments; ++s) {
    IidDataset segment;
    segment.values.reserve(n_sub);
    for (std::size_t i = 0; i < n_sub; ++i) {
      out.used_indices.push_back(perm[s * n_sub + i]);
      segment.values.push_back(data.values[perm[s * n_sub + i]]);
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const CheckResult res = run_check(model, segment, std::nullopt, methods[m].cfg,
                                        run_seed.child(s).child(m));
      out.pvalues[m].push_back(res.p.value);
      out.pvalues_ts[m].push_back(res.p_two_sided.value);
    }
  }
  for (std::size_t m = 0; m < methods.size(); ++m) {
    out.labels.push_back(methods[m].label);
    out.rates.push_back(estimate_rate(out.pvalues_ts[m], alpha));
  }
  return out;
}

CheckResult check_csv(const std::string& path, CsvSchema schema, const Model& model,
                      const CheckConfig& cfg, const SeedSpec& seed) {
  const Dataset data = read_csv_dataset(path, schema);
  const bool is_grouped = std::holds_alternative<GroupedDataset>(data);
  const bool hier = std::holds_alternative<GaussianHierarchical>(model);
  if (is_grouped != hier)
    throw Error(ErrorCode::SchemaMismatch,
                hier ? "hierarchical model needs a group column"
                     : "grouped data needs the hierarchical model");
  return run_check(model, data, std::nullopt, cfg, seed);
}

}  // namespace spc
