#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lgmcheck/inference.hpp"
#include "lgmcheck/latent.hpp"
#include "lgmcheck/rng.hpp"

namespace lgmcheck {

struct SimStudyConfig {
  std::vector<int> N_values{200, 1000};
  std::vector<double> eta_values{0.0, 0.5, 2.0, 10.0};
  std::vector<double> sigma_w_values{1.0 / 3.0, 1.0, 3.0};
  double sigma_eps = 1.0;
  int n_datasets = 100;
  std::uint64_t seed = 1;
  bool use_grid = false;
  int grid_points = 5;
  int threads = 1;
  // Gamma(shape, rate) priors on tau_eps and 1/sigma_w^2
  double prior_shape = 1.0;
  double prior_rate = 5e-5;
};

struct SimStudyRow {
  int N = 0;
  double eta = 0.0;
  double sigma_w = 0.0;
  int replicate = 0;
  double s0 = 0.0;
  double i0 = 0.0;
  double p_value = 0.0;
  double tau_eps_hat = 0.0;
  double sigma_w_hat = 0.0;
  bool ok = true;
  std::string error;
};

struct SimStudyResult {
  std::vector<SimStudyRow> rows;
};

// y = sigma_w * w + sigma_eps * eps with w an RW1 path driven by standardized NIG(eta) noise.
[[nodiscard]] Vec simulate_rw1_data(int N, double sigma_w, double sigma_eps, double eta, RngStream& rng);
[[nodiscard]] GaussianLGM rw1_signal_model(const Vec& y, double prior_shape = 1.0, double prior_rate = 5e-5);
[[nodiscard]] HyperParams rw1_initial_guess(const Vec& y);
// Stream id for (cell, replicate): (cell << 32) | replicate.
[[nodiscard]] std::uint64_t sim_stream(int cell, int replicate);

[[nodiscard]] SimStudyResult run_sim_study(const SimStudyConfig& cfg);
void write_simstudy_csv(const std::string& path, const SimStudyResult& r);
[[nodiscard]] SimStudyResult read_simstudy_csv(const std::string& path);
[[nodiscard]] double median_p(const SimStudyResult& r, int N, double sigma_w, double eta);

struct DetectabilityPoint {
  double eta = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double ratio = 0.0;     // mean / sd
  double ratio_se = 0.0;
};

// s0 of replicates simulated with NIG(eta) latent noise at fixed hyperparameters.
[[nodiscard]] std::vector<DetectabilityPoint> estimate_detectability(const GaussianLGM& m, const HyperParams& hp,
                                                                     const LatentStructure& latent,
                                                                     const std::vector<double>& eta_grid, int n_rep,
                                                                     std::uint64_t seed, int threads = 1);

struct NormalityCell {
  int N = 0;
  double sigma_w = 0.0;
  double i0 = 0.0;
  int n_rep = 0;
  double ks = 0.0;
  bool empty = false;  // I0 <= 0
};

[[nodiscard]] double ks_distance_normal(std::vector<double> z);
[[nodiscard]] std::vector<NormalityCell> normality_diagnostic(const std::vector<int>& N_values,
                                                              const std::vector<double>& sigma_w_values,
                                                              double sigma_eps, int n_rep, std::uint64_t seed,
                                                              int threads = 1);

[[nodiscard]] double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace lgmcheck
