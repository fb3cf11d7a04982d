#pragma once

#include <cstdint>
#include <vector>

#include "lgmcheck/linalg.hpp"

namespace lgmcheck {

struct MaternParams {
  double sigma_w = 1.0;
  double rho = 1.0;
  double nu = 1.5;
};

[[nodiscard]] double matern_kernel(double r, const MaternParams& p);
// General-order Bessel evaluation, bypassing the half-integer closed forms.
[[nodiscard]] double matern_kernel_bessel(double r, const MaternParams& p);
[[nodiscard]] Mat matern_cov(const Mat& distances, const MaternParams& p);
[[nodiscard]] Mat distance_matrix(const Vec& x);
[[nodiscard]] double gp_log_marginal(const Vec& y, const Mat& distances, const MaternParams& p, double sigma_eps);

struct GpHyper {
  double sigma_eps = 1.0;
  double sigma_w = 1.0;
  double rho = 1.0;
};

struct GpMode {
  GpHyper hyper;
  double log_marginal = 0.0;
  bool converged = false;
};

// Maximizes the GP log marginal over log(sigma_eps, sigma_w, rho) with flat priors.
[[nodiscard]] GpMode gp_mode(const Vec& y, const Mat& distances, double nu, const GpHyper& init);

enum class HyperSourceKind { Mode, Grid, External };

struct HyperSource {
  HyperSourceKind kind = HyperSourceKind::Grid;
  int grid_points = 5;
  double span_sd = 2.0;
  std::vector<GpHyper> draws;  // External
};

struct ScatterRow {
  double d_obs = 0.0;
  double d_rep = 0.0;
  double weight = 0.0;
  GpHyper hyper;
};

struct MaternCheckResult {
  double p_value = 0.5;
  std::vector<ScatterRow> scatter;
  GpMode mode;
  bool hessian_fallback = false;
};

// Discrepancy: finite difference of gp_log_marginal in nu at nu0 (central unless forward).
[[nodiscard]] double matern_discrepancy(const Vec& y, const Mat& distances, const GpHyper& g, double nu0, double eps,
                                        bool forward = false);

// n_rep replicates per hyperparameter point, each carrying weight w_k / n_rep.
// Point k, replicate r uses RngStream(seed, k * n_rep + r).
[[nodiscard]] MaternCheckResult matern_smoothness_check(const Vec& y, const Mat& distances, double nu0, double eps,
                                                        const HyperSource& source, int n_rep, std::uint64_t seed,
                                                        int threads = 1, bool forward = false);

}  // namespace lgmcheck
