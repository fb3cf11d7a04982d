#include <doctest.h>

#include <cmath>

#include "lgmcheck/mc.hpp"
#include "lgmcheck/nig.hpp"
#include "lgmcheck/samplers.hpp"
#include "test_util.hpp"

using namespace lgmcheck;

namespace {

struct Fixture {
  GaussianLGM m;
  JointPosterior post;
  PerturbationGeometry g;
  Mat x;  // posterior draws of (beta, w)
  Mat w;
};

Fixture make_fixture(const char* kind, int n, int draws, std::uint64_t seed) {
  RngStream rng(seed, 0);
  Fixture f{testutil::small_model(kind, n, rng), {}, {}, {}, {}};
  HyperParams hp = f.m.default_hyper();
  hp.tau_eps = 1.5;
  f.post = conditional_posterior(f.m, hp);
  f.g = perturb_geometry(f.post, f.post.latent);
  RngStream r2(seed, 1);
  f.x = sample_posterior(f.post, draws, r2);
  f.w = f.x.bottomRows(f.m.n_w());
  return f;
}

}  // namespace

TEST_CASE("MC perturbation moments agree with closed forms") {
  for (const char* kind : {"sar", "rw1"}) {
    const Fixture f = make_fixture(kind, 10, 200000, 21);
    const McEstimate s0 = mc_s0(f.w, f.post.latent);
    CHECK(std::abs(s0.value - s0_analytic(f.g)) < 4.0 * s0.std_error);

    const auto d = mc_d_scores(f.w, f.post.latent);
    const Vec da = d_scores(f.g);
    REQUIRE(d.size() == static_cast<size_t>(da.size()));
    int outside = 0;
    for (size_t i = 0; i < d.size(); ++i)
      if (std::abs(d[i].value - da(i)) > 4.0 * d[i].std_error) ++outside;
    CHECK(outside == 0);

    const McEstimate i0 = mc_i0(f.w, f.post.latent);
    CHECK(std::abs(i0.value - i0_analytic(f.g)) < 4.0 * i0.std_error);
  }
}

TEST_CASE("MC sensitivity agrees with the closed form") {
  const Fixture f = make_fixture("sar", 10, 200000, 22);
  const LinearTargets t = resolve_targets(f.m, {{"beta[0]", "w[3]"}, {}});
  const auto s = sens_linear_targets(f.post, f.g, f.post.latent, t);
  for (int k = 0; k < 2; ++k) {
    const Vec td = t.C.col(k).transpose() * f.x;
    const McEstimate e = mc_sensitivity(td, f.w, f.post.latent);
    CHECK(std::abs(e.value - s.at(t.names[k]).raw) < 4.0 * e.std_error);
  }
}

TEST_CASE("MC estimators restricted to a row range") {
  const Fixture f = make_fixture("sar", 10, 1000, 23);
  const Vec all = perturbation_sums(f.w, f.post.latent);
  const Vec a = perturbation_sums(f.w, f.post.latent, {0, 4});
  const Vec b = perturbation_sums(f.w, f.post.latent, {4, -1});
  CHECK((a + b - all).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("MC estimator input validation") {
  const Fixture f = make_fixture("iid", 6, 20, 24);
  CHECK(THROWN_CODE(mc_s0(f.w.leftCols(1), f.post.latent)) == "TooFewDraws");
  CHECK(THROWN_CODE(mc_i0(f.w, f.post.latent, {}, 50)) == "TooFewDraws");
  CHECK(THROWN_CODE(mc_s0(f.x, f.post.latent)) == "DimensionMismatch");
  CHECK(THROWN_CODE(mc_sensitivity(Vec::Zero(3), f.w, f.post.latent)) == "DimensionMismatch");
}

TEST_CASE("finite differences") {
  auto ll = [](const ParamPoint& p) { return -0.5 * p.at("a") * p.at("a") + 3.0 * p.at("b"); };
  const ParamPoint at{{"a", 2.0}, {"b", 1.0}};
  CHECK(fd_central(ll, at, "a", 1e-4) == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(fd_perturbation(ll, at, "b", 1e-4) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(fd_perturbation(ll, at, "a", 1e-6) == doctest::Approx(-2.0).epsilon(1e-5));
  CHECK(THROWN_CODE(fd_central(ll, at, "c", 1e-4)) == "InvalidArgument");
  auto bad = [](const ParamPoint&) { return std::nan(""); };
  CHECK(THROWN_CODE(fd_central(bad, at, "a", 1e-4)) == "NonFiniteLoglik");
  CHECK(default_fd_step(0.1) == 1e-5);
  CHECK(default_fd_step(-300.0) == doctest::Approx(3e-3));
}
