#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lgmcheck/latent.hpp"

namespace lgmcheck {

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int n_draws = 0;
};

// Noise rows considered: [first, first + count); count < 0 means all rows.
struct RowRange {
  int first = 0;
  int count = -1;
};

// w_draws: n_w x n_draws. Residuals are D w restricted to `rows`.
[[nodiscard]] McEstimate mc_s0(const Mat& w_draws, const LatentStructure& latent, RowRange rows = {});
[[nodiscard]] std::vector<McEstimate> mc_d_scores(const Mat& w_draws, const LatentStructure& latent,
                                                  RowRange rows = {});
[[nodiscard]] McEstimate mc_i0(const Mat& w_draws, const LatentStructure& latent, RowRange rows = {},
                               int n_batches = 50);
[[nodiscard]] McEstimate mc_sensitivity(const Vec& target_draws, const Mat& w_draws, const LatentStructure& latent,
                                        RowRange rows = {});
// Per-draw sum of local perturbations (helper shared by the estimators).
[[nodiscard]] Vec perturbation_sums(const Mat& w_draws, const LatentStructure& latent, RowRange rows = {});

using ParamPoint = std::map<std::string, double>;

// (loglik(at + eps e_dir) - loglik(at)) / eps
[[nodiscard]] double fd_perturbation(const std::function<double(const ParamPoint&)>& loglik, const ParamPoint& at,
                                     const std::string& direction, double eps);
// (loglik(at + eps e_dir) - loglik(at - eps e_dir)) / (2 eps)
[[nodiscard]] double fd_central(const std::function<double(const ParamPoint&)>& loglik, const ParamPoint& at,
                                const std::string& direction, double eps);
// Default step 1e-5 * max(1, |value|).
[[nodiscard]] double default_fd_step(double value);

}  // namespace lgmcheck
