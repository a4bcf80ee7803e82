#include <doctest.h>

#include <limits>
#include <sstream>

#include "divmkt/classify.hpp"
#include "divmkt/output.hpp"

using namespace divmkt;
using nlohmann::json;

namespace {

MonteCarloReport small_report() {
  SimParams sp;
  sp.dt = 1e-2;
  sp.horizon = 0.1;
  sp.n_paths = 3;
  sp.record_paths = 2;
  sp.record_stride = 5;
  sp.seed = 1;
  return monte_carlo_hitting({2, DriftSpec::power_law(0.2, 0.5, 1), std::nullopt}, sp);
}

}  // namespace

TEST_CASE("extended reals") {
  CHECK(extended_real(1.5) == json(1.5));
  CHECK(extended_real(std::numeric_limits<double>::infinity()) == json("+inf"));
  CHECK(extended_real(-std::numeric_limits<double>::infinity()) == json("-inf"));
  CHECK(extended_real(std::numeric_limits<double>::quiet_NaN()) == json("nan"));
}

TEST_CASE("JSON round-trips") {
  const auto verdict = classify_diversity(5, DriftSpec::patched(0.2, 0.12, 1, 0.5, 0.1));
  const auto feller = feller_test(weight_diffusion_problem(DriftSpec::power_law(0.2, 0.1, 1)));
  const auto custom = classify_diversity(2, DriftSpec::custom(0.2, [](double x) { return 0.3 / (0.8 - x); }));
  for (const json& j : {to_json(verdict), to_json(feller), to_json(small_report()), to_json(custom)}) {
    const std::string once = j.dump();
    CHECK(json::parse(once).dump() == once);
  }
  const json v = to_json(verdict);
  CHECK(v["status"] == "Inconclusive");
  CHECK(v["rule"] == "Gap");
  CHECK(v["evidence"].size() == 2);
  const json c = to_json(custom);
  CHECK(c["evidence"][0]["tail_fit"]["eps"].size() == kLadderSteps + 1);
}

TEST_CASE("report JSON carries the parameter echo") {
  const json j = to_json(small_report());
  for (const char* key : {"n_paths", "n_hits", "hit_frequency", "wilson_ci_95", "mean_max_weight",
                          "per_stock_hit_counts", "params", "model", "interpretation"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["params"]["scheme"] == "LogCapEuler");
  CHECK(j["model"]["threshold"] == doctest::Approx(0.8));
}

TEST_CASE("trajectory CSV") {
  std::ostringstream s;
  write_trajectories_csv(s, small_report());
  std::istringstream in(s.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "path,step,time,stock,weight");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2 * 3 * 2);  // paths x recorded points x stocks
}

TEST_CASE("SVG plot is deterministic and labelled") {
  const auto r = small_report();
  std::ostringstream a, b;
  write_max_weight_svg(a, r, 5);
  write_max_weight_svg(b, r, 5);
  CHECK(a.str() == b.str());
  const std::string svg = a.str();
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find(">time<") != std::string::npos);
  CHECK(svg.find(">max market weight<") != std::string::npos);
  CHECK(svg.find("1 - delta = 0.800") != std::string::npos);
  std::size_t lines = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++lines;
  CHECK(lines == 2);
}
