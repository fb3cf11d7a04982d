#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lgmcheck/check.hpp"
#include "lgmcheck/latent.hpp"
#include "lgmcheck/simstudy.hpp"

namespace lgmcheck {

// One latent component. `group` (1-based integer or label column) maps rows of the data
// to latent nodes; without it the component has one node per observation.
struct ComponentSpec {
  std::string label = "w";
  std::string kind = "rw1";  // rw1 | iid | sar | custom
  std::string group;
  std::string weight;  // optional column multiplying the A entries
  std::string edges;   // sar
  std::string D, h;    // custom
  int n = 0;           // nodes; 0 = inferred
};

struct MaternSpec {
  std::string x = "x";
  std::string y = "y";
  double nu = 1.5;
  double eps = 1e-3;
  bool standardize = true;
  int n_rep = 200;
  std::string hyper_source = "grid";  // mode | grid | external
  std::string draws;                   // CSV of sigma_eps, sigma_w, rho
  bool forward = false;
};

struct RunConfig {
  std::string base_dir;  // directory relative paths resolve against
  std::string data;
  std::string response = "y";
  std::vector<std::string> covariates;
  bool intercept = true;
  double beta_prior_precision = 1e-6;
  std::vector<ComponentSpec> components;
  HyperParams init;
  bool init_tau_given = false;
  std::map<std::string, PriorSpec> priors;
  std::vector<std::string> fixed;
  std::string inference = "mode";  // mode | grid | fixed
  int grid_points = 5;
  double span_sd = 2.0;
  std::string reference = "analytic";  // analytic | mc | i0
  int n_rep = 10000;
  std::vector<std::string> targets{"beta"};
  double trigger = 0.1;
  std::optional<double> theta_eta = 1.0;
  std::string check_component;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = ".";
  std::optional<MaternSpec> matern;
  std::optional<SimStudyConfig> simstudy;
};

[[nodiscard]] RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir = ".");
[[nodiscard]] RunConfig load_run_config(const std::string& path);
[[nodiscard]] std::string resolve_path(const RunConfig& cfg, const std::string& p);
[[nodiscard]] ReferenceMethod parse_reference(const std::string& s);

// Reads the data file and assembles the model described by `cfg`.
[[nodiscard]] GaussianLGM build_model(const RunConfig& cfg);
[[nodiscard]] WorkflowConfig workflow_config(const RunConfig& cfg, const GaussianLGM& m);
// Initial hyperparameters: config values over data-driven defaults.
[[nodiscard]] HyperParams initial_hyper(const RunConfig& cfg, const GaussianLGM& m);

}  // namespace lgmcheck
