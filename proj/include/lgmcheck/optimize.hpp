#pragma once

#include <functional>
#include <vector>

#include "lgmcheck/linalg.hpp"

namespace lgmcheck {

struct NelderMeadOptions {
  double initial_step = 0.5;
  double tol = 1e-6;  // simplex diameter (max-norm) at convergence
  int max_iter = 5000;
  int restarts = 2;
};

struct OptimResult {
  Vec x;
  double value = 0.0;
  bool converged = false;
  double diameter = 0.0;
  int evaluations = 0;
};

// Maximizes f; non-finite values and thrown lgmcheck::Error count as -inf.
[[nodiscard]] OptimResult nelder_mead_maximize(const std::function<double(const Vec&)>& f, const Vec& x0,
                                               const NelderMeadOptions& opt = {});

// Central-difference Hessian.
[[nodiscard]] Mat numerical_hessian(const std::function<double(const Vec&)>& f, const Vec& x, double step = 1e-3);

struct RegularGrid {
  std::vector<Vec> points;
  std::vector<double> log_objective;
  std::vector<double> weights;  // proportional to exp(log_objective), normalized
  std::vector<double> sd;
  bool hessian_fallback = false;
};

// Regular grid of points_per_dim^d points spanning +-span_sd Hessian standard
// deviations around the mode u0 of log density f; fixed step 0.3 when the
// Hessian is not negative definite.
[[nodiscard]] RegularGrid regular_grid(const std::function<double(const Vec&)>& f, const Vec& u0, int points_per_dim,
                                       double span_sd, int threads = 1);

}  // namespace lgmcheck
