#pragma once

#include <map>
#include <string>
#include <vector>

#include "lgmcheck/inference.hpp"
#include "lgmcheck/latent.hpp"

namespace lgmcheck {

enum class Direction { NIG, GAL };

// Derivative in eta at 0 of the log density of a residual r with scale h.
[[nodiscard]] double local_pert_p(double r, double h);
// Second derivative in eta at 0 (NIG direction).
[[nodiscard]] double local_pert_g(double r, double h);
// Symmetric NIG: V ~ IG(h, h^2/eta), w | V ~ N(0, V).
[[nodiscard]] double nig_logpdf(double w, double h, double eta);

struct PerturbationGeometry {
  Vec b;      // D mu_w
  Mat Gamma;  // diag(h) - D Cov(w|y) D^T
  Vec h;
  int row_offset = 0;  // first noise row of D covered by this geometry
};

// `block` selects the rows of one labelled latent block; empty means all rows.
[[nodiscard]] PerturbationGeometry perturb_geometry(const JointPosterior& post, const LatentStructure& latent,
                                                    const std::string& block = "");
// Same covariance geometry with b recomputed for a different posterior mean.
[[nodiscard]] Vec geometry_b(const JointPosterior& post, const LatentStructure& latent, const PerturbationGeometry& g);

// Q^{-1} J^T, where J embeds the geometry's rows of D in (beta, w) coordinates.
[[nodiscard]] Mat sens_operator(const JointPosterior& post, const LatentStructure& latent,
                                const PerturbationGeometry& g);

[[nodiscard]] Vec d_scores(const PerturbationGeometry& g);
[[nodiscard]] double s0_analytic(const PerturbationGeometry& g);
[[nodiscard]] double expected_g(double b, double gamma, double h);
[[nodiscard]] double cov_p(double bi, double bj, double gii, double gjj, double cij, double hi, double hj);
[[nodiscard]] double i0_analytic(const PerturbationGeometry& g, Direction dir = Direction::NIG);

struct TargetSensitivity {
  double raw = 0.0;
  double sd = 0.0;
  double scaled = 0.0;
};

struct SensitivityReport {
  Vec d;
  double s0 = 0.0;
  double i0 = 0.0;
  bool i0_available = false;
  std::map<std::string, TargetSensitivity> s_l;
  std::vector<std::string> target_order;
  std::string provenance = "analytic";
};

// Target names: "beta", "beta[j]", "w", "w[j]", "eta", "eta[i]" (linear predictor rows),
// "pred", "pred[k]" (rows of prediction_projector, n_pred x n_w).
struct TargetSelection {
  std::vector<std::string> names;
  Mat prediction_projector;
};

struct LinearTargets {
  std::vector<std::string> names;
  Mat C;  // (p + n_w) x k, one column per target
};

[[nodiscard]] LinearTargets resolve_targets(const GaussianLGM& m, const TargetSelection& sel);

[[nodiscard]] std::map<std::string, TargetSensitivity> sens_linear_targets(const JointPosterior& post,
                                                                           const PerturbationGeometry& g,
                                                                           const LatentStructure& latent,
                                                                           const LinearTargets& targets);
// Sensitivity of every coordinate of x = (beta, w).
[[nodiscard]] Vec sens_all_coordinates(const JointPosterior& post, const PerturbationGeometry& g,
                                       const LatentStructure& latent);

}  // namespace lgmcheck
