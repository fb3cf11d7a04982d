#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lgmcheck/inference.hpp"
#include "lgmcheck/nig.hpp"

namespace lgmcheck {

enum class ReferenceMethod { ANALYTIC_GAUSSIAN, MC_REFERENCE, I0_APPROX, GRID_AVERAGED };

[[nodiscard]] const char* method_name(ReferenceMethod m);

struct CheckReport {
  double s0_obs = 0.0;
  double ref_mean = 0.0;
  double ref_sd = 0.0;
  double p_value = 0.5;
  ReferenceMethod method = ReferenceMethod::ANALYTIC_GAUSSIAN;
  std::optional<Vec> ref_samples;
  int failed_replicates = 0;
  std::optional<double> theta_eta;
  bool robust = false;  // s0_obs < theta_eta
};

struct GaussianRef {
  double mean = 0.0;
  double variance = 0.0;
};

[[nodiscard]] GaussianRef ref_gaussian(const PerturbationGeometry& g);
// s0 of data replicated from the mixed predictive at fixed hyperparameters.
// Replicate r uses RngStream(seed, r).
[[nodiscard]] Vec ref_mc(const GaussianLGM& m, const HyperParams& hp, const LatentStructure& latent, int n_rep,
                         std::uint64_t seed, int threads = 1, const std::string& block = "",
                         int* failed = nullptr);
// s0 of replicates whose latent noise is NIG(eta) (eta = 0: the base model),
// replicate r on RngStream(seed, stream0 + r). Failed replicates are dropped.
// `latent` is rebound to the hyperparameters in `hp`.
[[nodiscard]] Vec s0_replicates(const GaussianLGM& m, const HyperParams& hp, const LatentStructure& latent, double eta,
                                int n_rep, std::uint64_t seed, std::uint64_t stream0 = 0, int threads = 1,
                                const std::string& block = "", int* failed = nullptr);
[[nodiscard]] GaussianRef ref_i0_approx(double s0_obs, double i0_obs);
[[nodiscard]] double pvalue(double s0_obs, const GaussianRef& ref);
[[nodiscard]] double pvalue_mc(double s0_obs, const Vec& samples);
// (p_k, weight_k) pairs
[[nodiscard]] double pvalue_grid(const std::vector<std::pair<double, double>>& per_point);

struct WorkflowConfig {
  HyperParams init;
  bool run_eb = true;  // false: use `init` as the fixed hyperparameters
  bool use_grid = false;
  int grid_points = 5;
  double span_sd = 2.0;
  ReferenceMethod reference = ReferenceMethod::ANALYTIC_GAUSSIAN;
  int n_rep = 10000;
  TargetSelection targets{{"beta"}, {}};
  double trigger = 0.1;
  std::optional<double> theta_eta = 1.0;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string block;  // latent block to check; empty = all rows
  bool force_sensitivity = false;
};

struct WorkflowResult {
  CheckReport check;
  SensitivityReport sens;
  EbResult eb;
  HyperGrid grid;
  double ridge_used = 0.0;
};

[[nodiscard]] WorkflowResult run_workflow(const GaussianLGM& m, const WorkflowConfig& cfg);

}  // namespace lgmcheck
