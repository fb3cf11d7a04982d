#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lgmcheck/config.hpp"
#include "test_util.hpp"

using namespace lgmcheck;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "lgmcheck_config_test";
  fs::create_directories(d);
  std::ofstream(d / "panel.csv") << "y,x,grp,t\n"
                                    "1.0,0.5,b,1\n"
                                    "2.0,0.1,a,2\n"
                                    "1.5,0.3,b,3\n"
                                    "0.2,0.9,c,1\n"
                                    "0.7,0.4,a,2\n";
  return d;
}

}  // namespace

TEST_CASE("parse and build a two-component model") {
  const fs::path d = scratch_dir();
  const RunConfig c = parse_run_config(R"({
    "data": "panel.csv",
    "covariates": ["x"],
    "latent": [{"kind": "iid", "label": "a", "group": "grp"},
               {"kind": "iid", "label": "b", "group": "grp", "weight": "t"}],
    "hyper": {"sigma_eps": 0.5, "sigma_a": 2.0},
    "priors": {"tau_eps": {"type": "gamma", "shape": 2, "rate": 1}},
    "reference": "mc",
    "theta_eta": null,
    "check_component": "a"
  })",
                                       d.string());
  CHECK(c.init.tau_eps == doctest::Approx(4.0));
  CHECK_FALSE(c.theta_eta.has_value());
  const GaussianLGM m = build_model(c);
  CHECK(m.n_obs() == 5);
  CHECK(m.p() == 2);
  CHECK(m.n_w() == 6);
  const Mat A(m.A);
  // labels are numbered in order of appearance: b = 0, a = 1, c = 2
  CHECK(A(0, 0) == 1.0);
  CHECK(A(1, 1) == 1.0);
  CHECK(A(3, 2) == 1.0);
  CHECK(A(2, 3) == 3.0);
  CHECK(A(4, 4) == 2.0);
  const WorkflowConfig w = workflow_config(c, m);
  CHECK(w.reference == ReferenceMethod::MC_REFERENCE);
  CHECK(w.block == "a");
  CHECK(w.init.theta2.at("sigma_a") == 2.0);
  CHECK(w.init.theta2.count("sigma_b") == 1);
  CHECK(m.hyper_priors.at("tau_eps").kind == PriorSpec::Kind::GammaPrecision);
}

TEST_CASE("integer group ids are node numbers") {
  const fs::path d = scratch_dir();
  const RunConfig c =
      parse_run_config(R"({"data": "panel.csv", "latent": {"kind": "rw1", "group": "t"}, "intercept": false})",
                       d.string());
  const GaussianLGM m = build_model(c);
  CHECK(m.n_w() == 3);
  CHECK(Mat(m.A)(1, 1) == 1.0);
  CHECK(m.p() == 0);
}

TEST_CASE("RW1 initial guess uses increments when A is the identity") {
  const fs::path d = scratch_dir();
  const RunConfig c = parse_run_config(R"({"data": "panel.csv", "latent": {"kind": "rw1"}})", d.string());
  const GaussianLGM m = build_model(c);
  const HyperParams hp = initial_hyper(c, m);
  const Vec dy = m.y.tail(4) - m.y.head(4);
  const double v = (dy.array() - dy.mean()).square().sum() / 3.0;
  CHECK(hp.theta2.at("sigma_w") == doctest::Approx(std::sqrt(v / 2.0)));
}

TEST_CASE("configuration errors") {
  const std::string dir = scratch_dir().string();
  CHECK(THROWN_CODE(parse_run_config("{", dir)) == "ConfigError");
  CHECK(THROWN_CODE(parse_run_config("[1, 2]", dir)) == "ConfigError");
  CHECK(THROWN_CODE(parse_run_config(R"({"latent": {"kind": "ar7"}})", dir)) == "ConfigError");
  CHECK(THROWN_CODE(parse_run_config(R"({"reference": "bootstrap"})", dir)) == "ConfigError");
  CHECK(THROWN_CODE(parse_run_config(R"({"inference": "mcmc"})", dir)) == "ConfigError");
  CHECK(THROWN_CODE(parse_run_config(R"({"threads": 0})", dir)) == "ConfigError");
  CHECK(THROWN_CODE(parse_run_config(R"({"seed": "abc"})", dir)) == "ConfigError");
  CHECK(THROWN_CODE(parse_run_config(R"({"latent": [{"kind": "iid"}, {"kind": "rw1"}]})", dir)) == "ConfigError");
  CHECK(THROWN_CODE(parse_run_config(R"({"priors": {"tau_eps": {"type": "gamma", "rate": -1}}})", dir)) ==
        "ConfigError");
  CHECK(THROWN_CODE(build_model(parse_run_config(R"({"latent": {"kind": "iid"}})", dir))) == "ConfigError");
  CHECK(THROWN_CODE(build_model(parse_run_config(R"({"data": "panel.csv"})", dir))) == "ConfigError");
  CHECK(THROWN_CODE(build_model(parse_run_config(R"({"data": "panel.csv", "latent": {"kind": "sar"}})", dir))) ==
        "ConfigError");
  CHECK(THROWN_CODE(build_model(parse_run_config(
            R"({"data": "panel.csv", "latent": {"kind": "iid"}, "fixed": ["rho"]})", dir))) == "ConfigError");
  CHECK(THROWN_CODE(build_model(parse_run_config(
            R"({"data": "panel.csv", "latent": {"kind": "iid"}, "hyper": {"sigma_q": 1}})", dir))) == "ConfigError");
  CHECK(THROWN_CODE(load_run_config("/nonexistent/config.json")) == "IoError");
}

TEST_CASE("paths resolve against the config directory") {
  RunConfig c;
  c.base_dir = "/some/dir";
  CHECK(resolve_path(c, "x.csv") == "/some/dir/x.csv");
  CHECK(resolve_path(c, "/abs/x.csv") == "/abs/x.csv");
}

TEST_CASE("bundled configurations load and build") {
  for (const char* name : {"columbus", "orthodont_intercept", "orthodont_slope", "rw1_example"}) {
    const RunConfig c = load_run_config(std::string(SOURCE_DIR) + "/configs/" + name + ".json");
    const GaussianLGM m = build_model(c);
    CHECK(m.n_obs() > 0);
    (void)workflow_config(c, m);
  }
  const RunConfig mc = load_run_config(std::string(SOURCE_DIR) + "/configs/mcycle.json");
  CHECK(mc.matern.has_value());
  const RunConfig study = load_run_config(std::string(SOURCE_DIR) + "/configs/simstudy.json");
  REQUIRE(study.simstudy.has_value());
  CHECK(study.simstudy->n_datasets == 100);
}
