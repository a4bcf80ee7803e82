#include <doctest.h>

#include "divmkt/config.hpp"

using namespace divmkt;

TEST_CASE("full config") {
  const auto cfg = parse_config(R"(
# two stocks
[model]
n = 2
delta = 0.2
p = 0.25          # drift strength
q = 1
initial_weights = 0.75, 0.25

[sim]
dt = 1e-3
horizon = 5
n_paths = 40
seed = 18446744073709551615
scheme = weights
record_paths = 2

[outputs]
directory = out
formats = csv, svg
plot_paths = 3
)");
  REQUIRE(cfg.model);
  CHECK(cfg.model->n == 2);
  CHECK(cfg.model->delta == 0.2);
  CHECK(cfg.model->family == "power_law");
  CHECK(cfg.model->initial_weights->at(0) == 0.75);
  CHECK(cfg.sim.seed == 18446744073709551615ull);
  CHECK(cfg.sim.scheme == Scheme::WeightEuler);
  CHECK(cfg.sim.horizon == 5.0);
  CHECK(cfg.sim.record_stride == 100);
  CHECK(cfg.outputs.formats == std::set<std::string>{"csv", "svg"});
  CHECK(cfg.outputs.plot_paths == 3);
  CHECK_FALSE(cfg.verify);

  const auto model = make_model_config(*cfg.model);
  CHECK(model.initial()[1] == 0.25);
}

TEST_CASE("defaults") {
  const auto cfg = parse_config("[model]\nn = 3\ndelta = 0.2\nfamily = patched_power_law\np = 0.3\n");
  CHECK(cfg.model->c == 0.5);
  CHECK(cfg.model->x_switch == 0.1);
  CHECK(cfg.model->q == 1.0);
  CHECK(cfg.sim.dt == 1e-3);
  CHECK(cfg.sim.horizon == 50.0);
  CHECK(cfg.sim.n_paths == 500);
  CHECK(cfg.sim.scheme == Scheme::LogCapEuler);
  CHECK_FALSE(cfg.outputs.formats);
  CHECK(make_spec(*cfg.model).family_name() == "patched_power_law");
}

TEST_CASE("custom drift expression") {
  const auto cfg = parse_config("[model]\nn = 2\ndelta = 0.2\nfamily = custom\ng = 0.25/(0.8 - x)\n");
  const auto spec = make_spec(*cfg.model);
  CHECK(g_eval(spec, 0.3) == doctest::Approx(0.5));
}

TEST_CASE("verify and feller sections") {
  const auto cfg = parse_config(R"(
[verify]
n = 2, 3
delta = 0.2
p = 0.02, 0.16, 0.5
q = 1
ito_check = true
[feller]
process = custom
drift = 0
diffusion_sq = 1
alpha = 0
beta = 1
x0 = 0.5
)");
  REQUIRE(cfg.verify);
  CHECK(cfg.verify->n == std::vector<int>{2, 3});
  CHECK(cfg.verify->p.size() == 3);
  CHECK(cfg.verify->ito_check);
  REQUIRE(cfg.feller);
  CHECK(cfg.feller->process == "custom");
  CHECK(cfg.feller->beta == 1.0);
}

TEST_CASE("strict parsing") {
  const char* bad[] = {
      "[model]\nn = 2\np = 0.25\n",                                  // missing delta
      "[model]\nn = 2\ndelta = 0.2\np = 0.25\ncolor = red\n",         // unknown key
      "[model]\nn = 2\ndelta = 0.6\np = 0.25\n",                      // delta out of range
      "[model]\nn = 1\ndelta = 0.2\np = 0.25\n",                      // n too small
      "[model]\nn = 2\ndelta = 0.2\np = -1\n",                        // p out of range
      "[model]\nn = 2\ndelta = 0.2\np = abc\n",                       // not a number
      "[model]\nn = 2\ndelta = 0.2\np = 0.25\np = 0.3\n",             // duplicate key
      "[model]\nn = 2\ndelta = 0.2\np = 0.25\n[model]\n",             // duplicate section
      "[modle]\nn = 2\n",                                              // unknown section
      "n = 2\n",                                                       // key outside a section
      "[model]\nn 2\n",                                                // no '='
      "[model]\nn = 2\ndelta = 0.2\nfamily = custom\ng = 1 +\n",      // bad expression
      "[model]\nn = 2\ndelta = 0.2\np = 0.25\ninitial_weights = 0.9, 0.1\n",
      "[model]\nn = 3\ndelta = 0.2\np = 0.25\ninitial_weights = 0.5, 0.5\n",
      "[sim]\ndt = 0\n",
      "[sim]\ndt = 2\nhorizon = 1\n",
      "[sim]\nn_paths = 0\n",
      "[sim]\nn_paths = -3\n",
      "[sim]\nseed = -1\n",
      "[sim]\nscheme = rk4\n",
      "[sim]\nzero_noise = maybe\n",
      "[outputs]\nformats = csv, png\n",
      "[verify]\nn = 2\ndelta = 0.2\np =\nq = 1\n",
      "[verify]\nn = 2\ndelta = 0.7\np = 0.1\nq = 1\n",
      "[verify]\nn = 2\ndelta = 0.2\np = 0.1\n",
      "[feller]\nprocess = custom\ndrift = x\ndiffusion_sq = 1\nalpha = 0\nbeta = 1\nx0 = 2\n",
      "[feller]\nprocess = other\n",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse_config(text), ConfigError);
  }
}

TEST_CASE("formats") {
  CHECK(parse_formats("json") == std::set<std::string>{"json"});
  CHECK(parse_formats(" csv ,json,svg ").size() == 3);
  CHECK(parse_formats("").empty());
  CHECK_THROWS_AS(parse_formats("xml"), ConfigError);
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(load_config("/nonexistent/divmkt.ini"), ConfigError);
}
