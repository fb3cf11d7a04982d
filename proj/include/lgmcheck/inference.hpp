#pragma once

#include <string>
#include <vector>

#include "lgmcheck/latent.hpp"
#include "lgmcheck/linalg.hpp"
#include "lgmcheck/optimize.hpp"

namespace lgmcheck {

// Exact Gaussian posterior of x = (beta, w) at fixed hyperparameters.
class JointPosterior {
 public:
  Vec mean;
  int p = 0;
  int n_w = 0;
  CholFactor factor;  // joint (p + n_w) precision
  HyperParams hyper;
  LatentStructure latent;  // bound at `hyper`
  double ridge_used = 0.0;  // ridge on the prior w-block plus any factor ridge

  [[nodiscard]] Vec mean_beta() const { return mean.head(p); }
  [[nodiscard]] Vec mean_w() const { return mean.tail(n_w); }
  // Posterior for other data under the same model and hyperparameters (precision unchanged).
  [[nodiscard]] JointPosterior with_data(const GaussianLGM& m, const Vec& y) const;
  // Posterior covariance of c^T x for each column c of `cols` ((p + n_w) x k).
  [[nodiscard]] Vec target_variance(const Mat& cols) const;
};

[[nodiscard]] JointPosterior conditional_posterior(const GaussianLGM& m, const HyperParams& hp);
[[nodiscard]] double log_marginal(const GaussianLGM& m, const HyperParams& hp);

// log_marginal with the intrinsic ridge contribution removed, plus log priors
// on the transformed scale (Jacobian included).
[[nodiscard]] double eb_objective(const GaussianLGM& m, const HyperParams& hp);

enum class Transform { Log, Logit };

struct HyperSlot {
  std::string name;
  Transform transform = Transform::Log;
};

[[nodiscard]] std::vector<HyperSlot> free_slots(const GaussianLGM& m);
[[nodiscard]] Vec to_internal(const std::vector<HyperSlot>& slots, const HyperParams& hp);
[[nodiscard]] HyperParams from_internal(const std::vector<HyperSlot>& slots, const Vec& u, const HyperParams& base);
[[nodiscard]] double get_hyper(const HyperParams& hp, const std::string& name);
void set_hyper(HyperParams& hp, const std::string& name, double value);
[[nodiscard]] double log_prior_internal(const GaussianLGM& m, const HyperSlot& slot, double u);
// Names of free hyperparameters with no prior given (flat on the transformed scale).
[[nodiscard]] std::vector<std::string> flat_prior_defaults(const GaussianLGM& m);

struct EbResult {
  HyperParams mode;
  double objective = 0.0;
  bool converged = true;
  double tolerance = 0.0;  // final simplex diameter
  int evaluations = 0;
};

[[nodiscard]] EbResult empirical_bayes_full(const GaussianLGM& m, const HyperParams& init,
                                            const NelderMeadOptions& opt = {});
[[nodiscard]] HyperParams empirical_bayes(const GaussianLGM& m, const HyperParams& init);

struct HyperGrid {
  std::vector<HyperParams> points;
  std::vector<double> weights;
  std::vector<double> log_objective;
  std::vector<double> sd;  // transformed-scale SD per free dimension
  bool hessian_fallback = false;
};

[[nodiscard]] HyperGrid hyper_grid(const GaussianLGM& m, const HyperParams& mode, int points_per_dim = 5,
                                   double span_sd = 2.0, int threads = 1);

}  // namespace lgmcheck
