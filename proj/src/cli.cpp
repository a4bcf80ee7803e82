#include "divmkt/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "divmkt/classify.hpp"
#include "divmkt/config.hpp"
#include "divmkt/errors.hpp"
#include "divmkt/expression.hpp"
#include "divmkt/feller.hpp"
#include "divmkt/output.hpp"
#include "divmkt/rng.hpp"
#include "divmkt/simulate.hpp"

namespace divmkt {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> formats;
  bool quiet = false;
};

struct Context {
  Options opts;
  std::ostream& out;
  std::ostream& err;

  void info(const std::string& line) const {
    if (!opts.quiet) err << line << '\n';
  }
};

ExperimentConfig load(const Options& o) {
  if (o.config_path.empty()) throw ConfigError("--config <path> is required");
  ExperimentConfig cfg = load_config(o.config_path);
  if (o.seed) cfg.sim.seed = *o.seed;
  if (o.out_dir) cfg.outputs.directory = *o.out_dir;
  if (o.formats) cfg.outputs.formats = parse_formats(*o.formats);
  return cfg;
}

const ModelSection& require_model(const ExperimentConfig& cfg) {
  if (!cfg.model) throw ConfigError("a [model] section is required");
  return *cfg.model;
}

std::set<std::string> formats_or(const ExperimentConfig& cfg, std::set<std::string> fallback) {
  return cfg.outputs.formats ? *cfg.outputs.formats : std::move(fallback);
}

fs::path prepare_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir + "'");
  }
  return fs::path(dir);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << content;
  f.close();
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json model_json(const ModelSection& m) {
  json j = {{"n", m.n}, {"delta", m.delta}, {"family", m.family}};
  if (m.family == "custom") {
    j["g"] = m.g;
  } else {
    j["p"] = m.p;
    j["q"] = m.q;
    if (m.family == "patched_power_law") {
      j["c"] = m.c;
      j["x_switch"] = m.x_switch;
    }
  }
  if (m.initial_weights) j["initial_weights"] = *m.initial_weights;
  return j;
}

json constants_json(int n, double delta) {
  const CriterionConstants k = A_coeffs(n, delta);
  json thresholds = {{"weight_threshold", 1.0 - delta}};
  if (n == 2) {
    thresholds["q1_diverse_iff_p_at_least"] = 1.0 / k.a2;
  } else {
    thresholds["q1_not_diverse_below_p"] = 1.0 / k.a1;
    thresholds["q1_diverse_at_or_above_p"] = 1.0 / k.a2;
  }
  return {{"a1", k.a1}, {"a2", k.a2}, {"x0", k.x0}, {"thresholds", thresholds}};
}

int cmd_classify(const Context& ctx) {
  const ExperimentConfig cfg = load(ctx.opts);
  const ModelSection& m = require_model(cfg);
  const DriftSpec spec = make_spec(m);
  const DiversityVerdict verdict = classify_diversity(m.n, spec);
  const DiversityVerdict corollary = classify_by_corollary(m.n, spec);

  json j = to_json(verdict);
  j["model"] = model_json(m);
  j["constants"] = constants_json(m.n, m.delta);
  j["corollary"] = {{"status", to_string(corollary.status)}, {"rule", corollary.rule}};
  ctx.out << dump(j);
  ctx.info("classify: " + to_string(verdict.status) + " (" + verdict.rule + ")");
  return kExitOk;
}

int cmd_simulate(const Context& ctx) {
  ExperimentConfig cfg = load(ctx.opts);
  const ModelSection& m = require_model(cfg);
  const ModelConfig model = make_model_config(m);
  const auto formats = formats_or(cfg, {"csv", "json", "svg"});
  const bool wants_paths = formats.count("csv") || formats.count("svg");
  if (wants_paths && cfg.sim.record_paths == 0) cfg.sim.record_paths = cfg.outputs.plot_paths;

  ctx.info("simulate: " + std::to_string(cfg.sim.n_paths) + " paths, " +
           std::to_string(step_count(cfg.sim)) + " steps each");
  const MonteCarloReport report = monte_carlo_hitting(model, cfg.sim);
  json j = to_json(report);
  j["model"]["spec"] = model_json(m);
  const std::string report_text = dump(j);

  std::string csv_text, svg_text;
  if (formats.count("csv")) {
    std::ostringstream s;
    write_trajectories_csv(s, report);
    csv_text = s.str();
  }
  if (formats.count("svg")) {
    std::ostringstream s;
    write_max_weight_svg(s, report, cfg.outputs.plot_paths);
    svg_text = s.str();
  }

  if (!formats.empty()) {
    const fs::path dir = prepare_directory(cfg.outputs.directory);
    if (formats.count("json")) write_file(dir / "report.json", report_text);
    if (formats.count("csv")) write_file(dir / "trajectories.csv", csv_text);
    if (formats.count("svg")) write_file(dir / "max_weight.svg", svg_text);
  }
  ctx.out << report_text;
  ctx.info("simulate: " + std::to_string(report.n_hits) + " hits in " +
           std::to_string(report.n_paths) + " paths");
  return kExitOk;
}

struct VerifyRow {
  int n;
  double delta, p, q;
  std::string family;
  DiversityVerdict verdict;
  MonteCarloReport mc;
  std::optional<ItoConsistencyReport> ito;
  std::string warning;
};

std::string csv_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_verify(const Context& ctx) {
  const ExperimentConfig cfg = load(ctx.opts);
  if (!cfg.verify) throw ConfigError("a [verify] section is required");
  const VerifySection& v = *cfg.verify;

  std::vector<VerifyRow> rows;
  for (int n : v.n) {
    for (double delta : v.delta) {
      for (double p : v.p) {
        for (double q : v.q) {
          const bool patched =
              v.family == "patched_power_law" || (v.family == "auto" && n >= 3);
          const DriftSpec spec = patched ? DriftSpec::patched(delta, p, q, v.c, v.x_switch)
                                         : DriftSpec::power_law(delta, p, q);
          ModelConfig model{n, spec, std::nullopt};
          if (cfg.model && cfg.model->initial_weights &&
              cfg.model->initial_weights->size() == static_cast<std::size_t>(n)) {
            model.initial_weights = Eigen::Map<const Eigen::VectorXd>(
                cfg.model->initial_weights->data(), n);
          }
          try {
            model.initial();
          } catch (const ParameterError& e) {
            throw ConfigError(std::string("[model] initial_weights: ") + e.what());
          }

          VerifyRow row{n, delta, p, q, spec.family_name(), classify_diversity(n, spec), {}, {}, {}};
          row.mc = monte_carlo_hitting(model, cfg.sim);
          if (v.ito_check) {
            SimParams ip = cfg.sim;
            ip.dt = v.ito_dt;
            ip.horizon = v.ito_horizon;
            ip.n_paths = v.ito_paths;
            ip.record_paths = 0;
            row.ito = ito_consistency_check(model, ip);
          }
          if (row.verdict.status == DiversityStatus::Diverse && row.mc.wilson_ci_95.first > 0.0) {
            row.warning = "diverse_with_hits";
          } else if (row.verdict.status == DiversityStatus::NotDiverse && row.mc.n_hits == 0) {
            row.warning = "not_diverse_without_hits";
          }
          ctx.info("verify: n=" + std::to_string(n) + " delta=" + csv_real(delta) +
                   " p=" + csv_real(p) + " q=" + csv_real(q) + " -> " +
                   to_string(row.verdict.status) + ", " + std::to_string(row.mc.n_hits) + "/" +
                   std::to_string(row.mc.n_paths) + " hits");
          rows.push_back(std::move(row));
        }
      }
    }
  }

  json table = json::array();
  std::ostringstream csv;
  csv << "n,delta,p,q,family,verdict,rule,n_hits,n_paths,hit_frequency,ci_low,ci_high,ito_gap,"
         "warning\n";
  for (const auto& r : rows) {
    json j = {{"n", r.n},
              {"delta", r.delta},
              {"p", r.p},
              {"q", r.q},
              {"family", r.family},
              {"verdict", to_string(r.verdict.status)},
              {"rule", r.verdict.rule},
              {"n_hits", r.mc.n_hits},
              {"n_paths", r.mc.n_paths},
              {"hit_frequency", r.mc.hit_frequency},
              {"wilson_ci_95", {r.mc.wilson_ci_95.first, r.mc.wilson_ci_95.second}},
              {"ito", r.ito ? to_json(*r.ito) : json(nullptr)},
              {"warning", r.warning.empty() ? json(nullptr) : json(r.warning)}};
    table.push_back(std::move(j));
    csv << r.n << ',' << csv_real(r.delta) << ',' << csv_real(r.p) << ',' << csv_real(r.q) << ','
        << r.family << ',' << to_string(r.verdict.status) << ',' << r.verdict.rule << ','
        << r.mc.n_hits << ',' << r.mc.n_paths << ',' << csv_real(r.mc.hit_frequency) << ','
        << csv_real(r.mc.wilson_ci_95.first) << ',' << csv_real(r.mc.wilson_ci_95.second) << ','
        << (r.ito ? csv_real(r.ito->mean_gaps.front()) : std::string()) << ',' << r.warning
        << '\n';
  }
  json doc = {{"rows", table},
              {"sim", to_json(cfg.sim)},
              {"interpretation",
               "hit frequencies are finite-horizon evidence, not proof; warnings flag "
               "disagreement with the analytic verdict and are not failures"}};
  const std::string json_text = dump(doc);

  const auto formats = formats_or(cfg, {"csv", "json"});
  if (formats.count("csv") || formats.count("json")) {
    const fs::path dir = prepare_directory(cfg.outputs.directory);
    if (formats.count("json")) write_file(dir / "verify.json", json_text);
    if (formats.count("csv")) write_file(dir / "verify.csv", csv.str());
  }
  ctx.out << json_text;
  return kExitOk;
}

int cmd_feller(const Context& ctx) {
  const ExperimentConfig cfg = load(ctx.opts);
  const FellerSection section = cfg.feller ? *cfg.feller : FellerSection{};
  FellerProblem prob;
  json problem;
  if (section.process == "weight") {
    const ModelSection& m = require_model(cfg);
    if (m.n != 2) throw ConfigError("[feller] process = weight needs a two-stock [model] (n = 2)");
    prob = weight_diffusion_problem(make_spec(m));
    problem = {{"process", "weight"}, {"model", model_json(m)}};
  } else {
    const Expression drift = Expression::parse(section.drift);
    const Expression diffusion_sq = Expression::parse(section.diffusion_sq);
    prob.alpha = section.alpha;
    prob.beta = section.beta;
    prob.x0 = section.x0;
    prob.drift = [drift](double x) { return drift(x); };
    prob.diffusion_sq = [diffusion_sq](double x) { return diffusion_sq(x); };
    problem = {{"process", "custom"},
               {"drift", section.drift},
               {"diffusion_sq", section.diffusion_sq}};
  }
  problem["alpha"] = extended_real(prob.alpha);
  problem["beta"] = extended_real(prob.beta);
  problem["x0"] = prob.x0;

  FellerReport report;
  try {
    report = feller_test(prob);
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("[feller] ") + e.what());
  }
  json j = to_json(report);
  j["problem"] = problem;
  ctx.out << dump(j);
  ctx.info("feller: left " + to_string(report.left->verdict) + ", right " +
           to_string(report.right->verdict));
  return kExitOk;
}

int cmd_selftest(const Context& ctx) {
  struct Check {
    std::string name;
    bool ok;
  };
  std::vector<Check> checks;

  {
    const auto r = philox4x32({0, 0, 0, 0}, {0, 0});
    checks.push_back({"philox known answer",
                      r == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}});
  }
  checks.push_back({"normal quantile symmetry",
                    std::abs(normal_quantile(0.975) - 1.959963984540054) < 1e-12 &&
                        normal_quantile(0.5) == 0.0});
  {
    const auto v = classify_diversity(2, DriftSpec::power_law(0.2, 0.25, 1.0));
    checks.push_back({"two stocks, p above delta(1-delta) is diverse",
                      v.status == DiversityStatus::Diverse && v.rule == "Thm1-iff"});
  }
  {
    const auto v = classify_diversity(5, DriftSpec::patched(0.2, 0.12, 1.0, 0.5, 0.1));
    checks.push_back({"five stocks in the open gap is inconclusive", v.rule == "Gap"});
  }
  {
    FellerProblem bm{0.0, 1.0, 0.5, [](double) { return 0.0; }, [](double) { return 1.0; }};
    const auto r = feller_test(bm);
    checks.push_back({"Brownian motion hits both ends of (0,1)",
                      r.left->verdict == HitVerdict::HitsWithPositiveProb &&
                          r.right->verdict == HitVerdict::HitsWithPositiveProb});
  }
  {
    const auto ci = wilson_interval(0, 500);
    checks.push_back({"Wilson interval at zero hits starts at 0", ci.first == 0.0 && ci.second > 0.0});
  }
  {
    ModelConfig model{3, DriftSpec::patched(0.2, 0.3, 1.0, 0.5, 0.1), std::nullopt};
    SimParams sp;
    sp.horizon = 0.2;
    sp.dt = 1e-3;
    sp.n_paths = 8;
    sp.seed = 11;
    sp.threads = 1;
    const auto a = monte_carlo_hitting(model, sp);
    sp.threads = 4;
    const auto b = monte_carlo_hitting(model, sp);
    checks.push_back({"reports independent of thread count", to_json(a).dump() == to_json(b).dump()});
  }

  bool all = true;
  for (const auto& c : checks) {
    ctx.out << (c.ok ? "PASS " : "FAIL ") << c.name << '\n';
    all = all && c.ok;
  }
  return all ? kExitOk : kExitNumeric;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diversity verdicts and Monte Carlo checks for rank-free market models", "divmkt"};
  app.require_subcommand(1);
  Options opts;
  app.add_option("--config", opts.config_path, "experiment config file");
  app.add_option("--seed", opts.seed, "override [sim] seed");
  app.add_option("--out", opts.out_dir, "override [outputs] directory");
  app.add_option("--format", opts.formats, "comma-separated subset of csv,json,svg");
  app.add_flag("--quiet", opts.quiet, "suppress progress messages");

  using Handler = int (*)(const Context&);
  Handler handler = nullptr;
  const std::pair<const char*, Handler> commands[] = {
      {"classify", cmd_classify}, {"simulate", cmd_simulate}, {"verify", cmd_verify},
      {"feller", cmd_feller},     {"selftest", cmd_selftest},
  };
  const char* descriptions[] = {
      "analytic diversity verdict for [model]",
      "Monte Carlo hitting frequencies for [model]",
      "analytic vs empirical table over the [verify] grid",
      "Feller's boundary test for [feller]",
      "quick internal consistency checks",
  };
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    auto* sub = app.add_subcommand(commands[i].first, descriptions[i]);
    sub->fallthrough();
    sub->callback([&handler, h = commands[i].second] { handler = h; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  const Context ctx{opts, out, err};
  try {
    return handler(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace divmkt
