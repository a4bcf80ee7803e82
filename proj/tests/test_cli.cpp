#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "divmkt/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "divmkt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = divmkt::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::current_path() / ("cli_scratch_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t file_count(const fs::path& dir) {
  if (!fs::exists(dir)) return 0;
  return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator()));
}

}  // namespace

TEST_CASE("classify") {
  Scratch s("classify");
  auto r = run({"classify", "--config", s.write("a.ini", "[model]\nn = 2\ndelta = 0.2\np = 0.25\nq = 1\n")});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["status"] == "Diverse");
  CHECK(j["rule"] == "Thm1-iff");
  CHECK(j["constants"]["a2"] == doctest::Approx(6.25));
  CHECK(j["constants"]["thresholds"]["q1_diverse_iff_p_at_least"] == doctest::Approx(0.16));

  r = run({"classify", "--quiet", "--config",
           s.write("b.ini", "[model]\nn = 5\ndelta = 0.2\nfamily = patched_power_law\np = 0.12\nq = 1\nc = 0.5\n")});
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["status"] == "Inconclusive");
  CHECK(j["rule"] == "Gap");
  CHECK(j["constants"]["a1"] == doctest::Approx(10.0));
  CHECK(r.err.empty());
}

TEST_CASE("config errors exit 2 without output") {
  Scratch s("errors");
  auto r = run({"classify", "--config", s.write("a.ini", "[model]\nn = 2\np = 0.25\n")});
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  CHECK(r.err.find("delta") != std::string::npos);

  const std::string out_dir = s.path("out");
  r = run({"simulate", "--out", out_dir, "--config",
           s.write("b.ini", "[model]\nn = 2\ndelta = 0.2\np = 0.25\n[sim]\nn_paths = 4\nhorizon = 0.1\nbogus = 1\n")});
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  CHECK_FALSE(fs::exists(out_dir));

  CHECK(run({"classify"}).code == 2);
  CHECK(run({"classify", "--config", s.path("missing.ini")}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"simulate", "--config", s.path("b.ini"), "--format", "png"}).code == 2);
  CHECK(run({"verify", "--config", s.write("c.ini", "[verify]\nn = 2\ndelta = 0.2\np =\nq = 1\n")}).code == 2);
  CHECK(run({"verify", "--config", s.write("d.ini", "[model]\nn = 2\ndelta = 0.2\np = 0.3\n")}).code == 2);
  CHECK(run({"feller", "--config", s.write("e.ini", "[model]\nn = 3\ndelta = 0.2\nfamily = patched_power_law\np = 0.3\n")}).code == 2);
}

TEST_CASE("help exits 0") {
  const auto r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("simulate") != std::string::npos);
}

TEST_CASE("simulate writes the requested artifacts deterministically") {
  Scratch s("simulate");
  const std::string cfg = s.write("sim.ini", R"([model]
n = 2
delta = 0.2
p = 0.02
initial_weights = 0.75, 0.25
[sim]
dt = 1e-3
horizon = 1
n_paths = 20
seed = 3
record_stride = 10
)");
  auto a = run({"simulate", "--quiet", "--config", cfg, "--seed", "7", "--out", s.path("a")});
  auto b = run({"simulate", "--quiet", "--config", cfg, "--seed", "7", "--out", s.path("b")});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
  CHECK(json::parse(a.out)["params"]["seed"] == 7);
  for (const char* f : {"report.json", "trajectories.csv", "max_weight.svg"}) {
    CHECK(slurp(fs::path(s.path("a")) / f) == slurp(fs::path(s.path("b")) / f));
  }
  CHECK(slurp(fs::path(s.path("a")) / "report.json") == a.out);
  CHECK(slurp(fs::path(s.path("a")) / "trajectories.csv").rfind("path,step,time,stock,weight\n", 0) == 0);

  const auto c = run({"simulate", "--quiet", "--config", cfg, "--seed", "8", "--out", s.path("c")});
  CHECK(c.out != a.out);

  const auto svg = run({"simulate", "--quiet", "--config", cfg, "--format", "svg", "--out", s.path("svg")});
  REQUIRE(svg.code == 0);
  CHECK(file_count(s.path("svg")) == 1);
  const std::string text = slurp(fs::path(s.path("svg")) / "max_weight.svg");
  CHECK(text.find("</svg>") != std::string::npos);
}

TEST_CASE("simulate reports I/O failure") {
  Scratch s("io");
  const std::string blocker = s.write("not_a_dir", "x");
  const auto r = run({"simulate", "--quiet", "--out", blocker + "/sub", "--config",
                      s.write("sim.ini", "[model]\nn = 2\ndelta = 0.2\np = 0.5\n[sim]\nn_paths = 2\nhorizon = 0.01\n")});
  CHECK(r.code == 4);
}

TEST_CASE("verify table") {
  Scratch s("verify");
  const auto r = run({"verify", "--quiet", "--out", s.path("out"), "--config", s.write("v.ini", R"([verify]
n = 2
delta = 0.2
p = 0.02, 0.16, 0.5
q = 1, 2
ito_check = true
ito_horizon = 0.2
ito_paths = 2
[sim]
dt = 1e-3
horizon = 0.5
n_paths = 10
seed = 4
)")});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  REQUIRE(j["rows"].size() == 6);
  CHECK(j["rows"][0]["verdict"] == "NotDiverse");
  CHECK(j["rows"][2]["verdict"] == "Diverse");
  CHECK(j["rows"][4]["verdict"] == "Diverse");
  for (const auto& row : j["rows"]) {
    if (row["q"] == 2) CHECK(row["verdict"] == "Diverse");
    CHECK(row["ito"]["dts"].size() == 3);
  }
  const std::string csv = slurp(fs::path(s.path("out")) / "verify.csv");
  CHECK(csv.rfind("n,delta,p,q,family,verdict,rule,n_hits,n_paths,hit_frequency,ci_low,ci_high,ito_gap,warning\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  CHECK(fs::exists(fs::path(s.path("out")) / "verify.json"));
}

TEST_CASE("feller") {
  Scratch s("feller");
  auto r = run({"feller", "--quiet", "--config", s.write("a.ini", "[model]\nn = 2\ndelta = 0.2\np = 0.25\nq = 1\n")});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["right"]["verdict"] == "NoHitAS");
  CHECK(j["right"]["phi"] == "+inf");

  r = run({"feller", "--quiet", "--config", s.write("b.ini", "[model]\nn = 2\ndelta = 0.2\np = 0.1\nq = 1\n")});
  j = json::parse(r.out);
  CHECK(j["right"]["verdict"] == "HitsWithPositiveProb");

  r = run({"feller", "--quiet", "--config",
           s.write("c.ini", "[feller]\nprocess = custom\ndrift = 0\ndiffusion_sq = 1\nalpha = 0\nbeta = 1\nx0 = 0.5\n")});
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["left"]["verdict"] == "HitsWithPositiveProb");
  CHECK(j["right"]["verdict"] == "HitsWithPositiveProb");
  CHECK(json::parse(j.dump()).dump() == j.dump());

  r = run({"feller", "--quiet", "--config",
           s.write("d.ini", "[feller]\nprocess = custom\ndrift = 0\ndiffusion_sq = x - 0.3\nalpha = 0\nbeta = 1\nx0 = 0.5\n")});
  CHECK(r.code == 2);
}

TEST_CASE("selftest") {
  const auto r = run({"selftest"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
}
