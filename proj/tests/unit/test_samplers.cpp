#include <doctest.h>

#include <cmath>
#include <vector>

#include "lgmcheck/samplers.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace lgmcheck;

TEST_CASE("inverse Gaussian moments") {
  RngStream rng(11, 0);
  const double mu = 1.7, lambda = 0.9;
  const int n = 200000;
  std::vector<double> x(n);
  for (auto& v : x) v = sample_invgaussian(mu, lambda, rng);
  const auto [m, se] = oracle::mean_se(x);
  CHECK(std::abs(m - mu) < 4.0 * se);
  double s2 = 0.0;
  for (double v : x) s2 += (v - m) * (v - m);
  s2 /= n - 1;
  const double var = mu * mu * mu / lambda;
  // SE of the sample variance from the fourth cumulant (15 mu^7 / lambda^3)
  const double se_var = std::sqrt((15.0 * std::pow(mu, 7) / std::pow(lambda, 3) + 2.0 * var * var) / n);
  CHECK(std::abs(s2 - var) < 4.0 * se_var);
  CHECK(THROWN_CODE(sample_invgaussian(-1.0, 1.0, rng)) == "InvalidArgument");
}

TEST_CASE("NIG noise has variance h and matching kurtosis") {
  RngStream rng(12, 0);
  const int n = 4;
  NigNoiseSpec spec{Vec::Constant(n, 2.0), 0.5};
  const int reps = 100000;
  std::vector<double> a, a4;
  for (int r = 0; r < reps; ++r) {
    const Vec z = sample_nig_noise(spec, rng);
    for (int i = 0; i < n; ++i) {
      a.push_back(z(i) * z(i));
      a4.push_back(std::pow(z(i), 4));
    }
  }
  const auto [v, se] = oracle::mean_se(a);
  CHECK(std::abs(v - 2.0) < 4.0 * se);
  // mixing variance V ~ IG(h, h^2 / eta): E z^4 = 3 E V^2 = 3 (h^2 + h eta)
  const auto [k, se4] = oracle::mean_se(a4);
  CHECK(std::abs(k - 3.0 * (4.0 + 2.0 * 0.5)) < 4.0 * se4);
  spec.eta = -1.0;
  CHECK(THROWN_CODE(sample_nig_noise(spec, rng)) == "InvalidArgument");
}

TEST_CASE("latent draws satisfy D w = Lambda") {
  RngStream rng(13, 0);
  const LatentStructure sar = build_sar(testutil::ring_graph(12), 0.4, 1.5, 12);
  const LatentSimulator sim(sar);
  Vec lam(12);
  for (int i = 0; i < 12; ++i) lam(i) = rng.normal();
  CHECK((sar.D * sim.solve(lam) - lam).norm() < 1e-10);
  CHECK(THROWN_CODE(sim.solve(Vec(Vec::Ones(3)))) == "DimensionMismatch");

  const LatentStructure rw = build_rw1(10, 0.5);
  const LatentSimulator srw(rw);
  const Vec w = srw.draw(0.0, rng);
  CHECK(std::abs(w.sum()) < 1e-10);
  const Vec lam2 = rw.D * w;
  CHECK(lam2.size() == rw.n_noise());
}

TEST_CASE("IID latent draws have variance sigma^2") {
  RngStream rng(14, 0);
  const LatentStructure iid = build_iid(5, 2.0);
  std::vector<double> s;
  for (int r = 0; r < 40000; ++r) {
    const Vec w = simulate_latent(iid, {iid.h, 0.0}, rng);
    s.push_back(w(2) * w(2));
  }
  const auto [m, se] = oracle::mean_se(s);
  CHECK(std::abs(m - 4.0) < 4.0 * se);
}

TEST_CASE("posterior draws match posterior moments") {
  RngStream rng(15, 0);
  const GaussianLGM m = testutil::small_model("sar", 8, rng);
  const JointPosterior post = conditional_posterior(m, m.default_hyper());
  const int n = 40000;
  const Mat X = sample_posterior(post, n, rng);
  const Vec mean = X.rowwise().mean();
  const Mat C = Mat::Identity(m.p() + m.n_w(), 1);
  const double v = post.target_variance(C)(0);
  CHECK(std::abs(mean(0) - post.mean(0)) < 4.0 * std::sqrt(v / n));
  const double sv = (X.row(0).array() - mean(0)).square().sum() / (n - 1);
  CHECK(std::abs(sv - v) < 4.0 * v * std::sqrt(2.0 / n));
}

TEST_CASE("predictive schemes") {
  RngStream rng(16, 0);
  GaussianLGM m = testutil::small_model("iid", 6, rng);
  const HyperParams hp = m.default_hyper();
  const JointPosterior post = conditional_posterior(m, hp);
  CHECK(predictive_draw(m, hp, PredictiveScheme::POSTERIOR, &post, rng).size() == 6);
  CHECK(THROWN_CODE(predictive_draw(m, hp, PredictiveScheme::POSTERIOR, nullptr, rng)) == "MissingPosterior");
  CHECK(THROWN_CODE(predictive_draw(m, hp, PredictiveScheme::MIXED, nullptr, rng)) == "MissingPosterior");
  CHECK(THROWN_CODE(predictive_draw(m, hp, PredictiveScheme::PRIOR, nullptr, rng)) == "ImproperPrior");

  // MIXED: beta at its posterior mean, fresh w and noise
  const int reps = 20000;
  Vec acc = Vec::Zero(6);
  for (int r = 0; r < reps; ++r) acc += predictive_draw(m, hp, PredictiveScheme::MIXED, &post, rng);
  acc /= reps;
  const Vec expect = m.B * post.mean_beta();
  const double sd = std::sqrt(1.3 * 1.3 + 1.0 / hp.tau_eps);
  CHECK((acc - expect).cwiseAbs().maxCoeff() < 4.5 * sd / std::sqrt(double(reps)));

  m.hyper_priors["tau_eps"] = {PriorSpec::Kind::GammaPrecision, 3.0, 3.0};
  m.hyper_priors["sigma_w"] = {PriorSpec::Kind::GammaPrecision, 3.0, 3.0};
  CHECK(predictive_draw(m, hp, PredictiveScheme::PRIOR, nullptr, rng).allFinite());
}
