#include <doctest.h>

#include <sstream>

#include "heatk/error.hpp"
#include "heatk/pipeline.hpp"

using namespace heatk;

namespace {

PipelineConfig small(Setting s) {
  PipelineConfig c;
  c.spec = make_case(CaseId::I);
  c.nx = c.ny = 20;
  c.mesh_n = 40;
  c.reconstruct.setting = s;
  c.reconstruct.sweep.points = 12;
  c.reconstruct.sweep.threads = 2;
  return c;
}

}  // namespace

TEST_CASE("settings parse") {
  CHECK(parse_setting("w2") == Setting::w2);
  CHECK(to_string(Setting::lsq) == "lsq");
  CHECK_THROWS_AS(parse_setting("W2"), InvalidArgument);
}

TEST_CASE("config JSON round trip") {
  PipelineConfig c = small(Setting::w1);
  c.reconstruct.alpha = 0.25;
  c.noise_level = 0.01;
  c.seed = 99;
  c.M = 8;
  const PipelineConfig back = pipeline_config_from_json(to_json(c));
  CHECK(back.nx == 20);
  CHECK(back.mesh_n == 40);
  CHECK(back.M == 8);
  CHECK(back.reconstruct.setting == Setting::w1);
  REQUIRE(back.reconstruct.alpha);
  CHECK(*back.reconstruct.alpha == 0.25);
  CHECK(back.noise_level == 0.01);
  CHECK(back.seed == 99);
  CHECK(back.reconstruct.sweep.points == 12);
  CHECK(back.spec.T1 == c.spec.T1);
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("config keys") {
  const PipelineConfig c = pipeline_config_from_json(R"({"case": "III", "T1": 400, "alpha": "auto"})");
  CHECK(c.spec.pair == MaterialPair(0.7, 100.0));
  CHECK(c.spec.T1 == 400.0);
  CHECK_FALSE(c.reconstruct.alpha);
  CHECK(c.nx == 100);
  CHECK_THROWS_WITH_AS(pipeline_config_from_json(R"({"case": "I", "colour": 1})"),
                       doctest::Contains("'colour'"), ParseError);
  CHECK_THROWS_WITH_AS(pipeline_config_from_json(R"({"case": "I", "mesh_n": "fine"})"),
                       doctest::Contains("'mesh_n'"), ParseError);
  CHECK_THROWS_WITH_AS(pipeline_config_from_json(R"({"case": "I", "alpha": -1})"),
                       doctest::Contains("'alpha'"), ParseError);
  CHECK_THROWS_WITH_AS(pipeline_config_from_json(R"({"case": "VI"})"),
                       doctest::Contains("'case'"), ParseError);
  CHECK_THROWS_WITH_AS(pipeline_config_from_json(R"({"case": "I", "setting": "w3"})"),
                       doctest::Contains("'setting'"), ParseError);
  CHECK_THROWS_AS(pipeline_config_from_json("[1, 2]"), ParseError);
}

TEST_CASE("W2 reconstruction requires a mask") {
  DesignSystem s;
  s.A = Eigen::MatrixXd::Identity(2, 2);
  s.F = Eigen::Vector2d(1, 2);
  ReconstructOptions o;
  o.setting = Setting::w2;
  o.alpha = 1.0;
  CHECK_THROWS_AS(reconstruct(s, MaterialPair(1, 3), o, std::nullopt), InvalidArgument);
  GradientMask m;
  m.b = {1, 0, 1};
  CHECK_THROWS_AS(reconstruct(s, MaterialPair(1, 3), o, m), InvalidArgument);
}

TEST_CASE("small pipelines run and are deterministic") {
  for (Setting s : {Setting::lsq, Setting::w1, Setting::w2}) {
    const PipelineResult a = run_pipeline(small(s));
    const PipelineResult b = run_pipeline(small(s));
    CHECK(a.K.size() == 400);
    for (std::size_t i = 0; i < a.K.size(); ++i) CHECK(a.K[i] == b.K[i]);
    CHECK(a.reconstruction.alpha == b.reconstruction.alpha);
    if (s != Setting::lsq) {
      CHECK(a.reconstruction.corner);
      CHECK(a.reconstruction.lcurve.size() == 12);
    }
    std::ostringstream os;
    write_diagnostics(os, a.reconstruction);
    CHECK(os.str().find("setting=" + to_string(s) + "\n") == 0);
    CHECK(os.str().find("condition_number=") != std::string::npos);
  }
}

TEST_CASE("noise changes the samples reproducibly") {
  PipelineConfig c = small(Setting::lsq);
  c.noise_level = 0.01;
  c.seed = 5;
  const PipelineResult a = run_pipeline(c), b = run_pipeline(c);
  for (std::size_t i = 0; i < a.samples.u.size(); ++i) CHECK(a.samples.u[i] == b.samples.u[i]);
  const PipelineResult clean = run_pipeline(small(Setting::lsq));
  bool differs = false;
  for (std::size_t i = 0; i < a.samples.u.size(); ++i) differs |= a.samples.u[i] != clean.samples.u[i];
  CHECK(differs);
}
