#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "lgmcheck/inference.hpp"
#include "lgmcheck/latent.hpp"
#include "lgmcheck/rng.hpp"

namespace lgmcheck {

struct NigNoiseSpec {
  Vec h;
  double eta = 0.0;  // 0 gives N(0, diag(h))
};

[[nodiscard]] double sample_invgaussian(double mu, double lambda, RngStream& rng);
[[nodiscard]] Vec sample_nig_noise(const NigNoiseSpec& spec, RngStream& rng);

// Solves D w = Lambda. Intrinsic RW1 blocks are anchored at w_1 = 0 and centred.
// Block factorizations are cached, so one simulator can serve many draws.
class LatentSimulator {
 public:
  explicit LatentSimulator(const LatentStructure& latent);
  [[nodiscard]] Vec solve(const Vec& lambda) const;
  [[nodiscard]] Vec draw(double eta, RngStream& rng) const;
  [[nodiscard]] const LatentStructure& latent() const { return latent_; }

 private:
  struct Impl;
  LatentStructure latent_;
  std::shared_ptr<const Impl> impl_;
};

[[nodiscard]] Vec simulate_latent(const LatentStructure& latent, const NigNoiseSpec& spec, RngStream& rng);

enum class PredictiveScheme { PRIOR, MIXED, POSTERIOR };

[[nodiscard]] Vec predictive_draw(const GaussianLGM& m, const HyperParams& hp, PredictiveScheme scheme,
                                  const JointPosterior* post, RngStream& rng);

// Columns are draws of x = (beta, w).
[[nodiscard]] Mat sample_posterior(const JointPosterior& post, int n_draws, RngStream& rng);

}  // namespace lgmcheck
