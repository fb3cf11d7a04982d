#include <doctest.h>

#include <cmath>

#include "lgmcheck/check.hpp"
#include "lgmcheck/special.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace lgmcheck;

TEST_CASE("p-values") {
  CHECK(pvalue(0.0, {0.0, 4.0}) == doctest::Approx(0.5));
  CHECK(pvalue(2.0 * 1.959963984540054, {0.0, 4.0}) == doctest::Approx(0.025).epsilon(1e-9));
  CHECK(pvalue(-1.0, {1.0, 1.0}) == doctest::Approx(0.9772498680518208).epsilon(1e-12));
  CHECK(THROWN_CODE(pvalue(1.0, {0.0, 0.0})) == "DegenerateReference");

  Vec ref(4);
  ref << 0.1, 0.5, 0.9, 1.3;
  CHECK(pvalue_mc(0.6, ref) == doctest::Approx(3.0 / 5.0));
  CHECK(pvalue_mc(2.0, ref) == doctest::Approx(1.0 / 5.0));
  CHECK(THROWN_CODE(pvalue_mc(0.0, Vec())) == "DegenerateReference");

  CHECK(pvalue_grid({{0.1, 0.25}, {0.3, 0.75}}) == doctest::Approx(0.25));
  CHECK(THROWN_CODE(pvalue_grid({{0.1, 0.5}, {0.3, 0.4}})) == "WeightMismatch");
  CHECK(THROWN_CODE(pvalue_grid({{0.1, 1.5}, {0.3, -0.5}})) == "WeightMismatch");
  CHECK(THROWN_CODE(pvalue_grid({})) == "WeightMismatch");

  CHECK(ref_i0_approx(0.3, 2.0).variance == 2.0);
  CHECK(THROWN_CODE(ref_i0_approx(0.3, -1.0)) == "NegativeInformation");
  CHECK(THROWN_CODE(ref_i0_approx(0.3, 0.0)) == "NegativeInformation");
}

TEST_CASE("Gaussian reference matches replicated s0") {
  RngStream rng(31, 0);
  for (const char* kind : {"sar", "rw1"}) {
    const GaussianLGM m = testutil::small_model(kind, 12, rng);
    HyperParams hp = m.default_hyper();
    hp.tau_eps = 2.0;
    const JointPosterior post = conditional_posterior(m, hp);
    const PerturbationGeometry g = perturb_geometry(post, post.latent);
    const GaussianRef ref = ref_gaussian(g);
    const int n = 40000;
    const Vec s = ref_mc(m, hp, post.latent, n, 5, 2);
    REQUIRE(s.size() == n);
    std::vector<double> v(s.data(), s.data() + n);
    const auto [mean, se] = oracle::mean_se(v);
    CHECK(std::abs(mean - ref.mean) < 4.0 * se);
    const double var = se * se * n;
    CHECK(var == doctest::Approx(ref.variance).epsilon(0.05));
  }
}

TEST_CASE("replicates are reproducible across thread counts") {
  RngStream rng(32, 0);
  const GaussianLGM m = testutil::small_model("sar", 9, rng);
  const HyperParams hp = m.default_hyper();
  const Vec a = ref_mc(m, hp, m.latent, 200, 77, 1);
  const Vec b = ref_mc(m, hp, m.latent, 200, 77, 3);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  const Vec c = ref_mc(m, hp, m.latent, 200, 78, 1);
  CHECK((a - c).norm() > 0.0);
  // ref_mc is the eta = 0 case of s0_replicates
  const Vec d = s0_replicates(m, hp, m.latent, 0.0, 200, 77);
  CHECK((a - d).cwiseAbs().maxCoeff() == 0.0);
  CHECK(THROWN_CODE(ref_mc(m, hp, m.latent, 50, 1)) == "InvalidArgument");
  CHECK(THROWN_CODE(s0_replicates(m, hp, m.latent, 0.5, 0, 1)) == "TooFewDraws");
}

TEST_CASE("heavier-tailed replicates shift s0 upwards") {
  RngStream rng(33, 0);
  const GaussianLGM m = testutil::small_model("iid", 30, rng);
  const HyperParams hp = m.default_hyper();
  const Vec s_base = s0_replicates(m, hp, m.latent, 0.0, 400, 9);
  const Vec s_heavy = s0_replicates(m, hp, m.latent, 5.0, 400, 9, 400);
  CHECK(s_heavy.mean() > s_base.mean());
}

TEST_CASE("workflow at fixed hyperparameters") {
  RngStream rng(34, 0);
  const GaussianLGM m = testutil::small_model("sar", 15, rng);
  WorkflowConfig cfg;
  cfg.init = m.default_hyper();
  cfg.run_eb = false;
  cfg.trigger = 1.1;
  const WorkflowResult r = run_workflow(m, cfg);
  const JointPosterior post = conditional_posterior(m, cfg.init);
  const PerturbationGeometry g = perturb_geometry(post, post.latent);
  CHECK(r.check.s0_obs == doctest::Approx(s0_analytic(g)).epsilon(1e-10));
  CHECK(r.sens.i0 == doctest::Approx(i0_analytic(g)).epsilon(1e-10));
  CHECK(r.check.p_value == doctest::Approx(pvalue(s0_analytic(g), ref_gaussian(g))));
  CHECK(r.check.method == ReferenceMethod::ANALYTIC_GAUSSIAN);
  // beta expands to one target per coefficient, all computed since the trigger is above 1
  CHECK(r.sens.s_l.size() == 2);
  CHECK(r.check.robust == (r.check.s0_obs < 1.0));

  cfg.trigger = -1.0;
  const WorkflowResult quiet = run_workflow(m, cfg);
  CHECK(quiet.sens.s_l.empty());

  cfg.reference = ReferenceMethod::MC_REFERENCE;
  cfg.n_rep = 500;
  const WorkflowResult mc = run_workflow(m, cfg);
  REQUIRE(mc.check.ref_samples.has_value());
  CHECK(mc.check.ref_samples->size() == 500);
  CHECK(mc.check.p_value == doctest::Approx(pvalue_mc(mc.check.s0_obs, *mc.check.ref_samples)));

  cfg.reference = ReferenceMethod::I0_APPROX;
  if (i0_analytic(g) > 0)
    CHECK(run_workflow(m, cfg).check.ref_sd == doctest::Approx(std::sqrt(i0_analytic(g))));
  else
    CHECK(THROWN_CODE(run_workflow(m, cfg)) == "NegativeInformation");
}

TEST_CASE("grid workflow mixes point results") {
  RngStream rng(35, 0);
  const GaussianLGM m = testutil::small_model("iid", 25, rng);
  WorkflowConfig cfg;
  cfg.init = m.default_hyper();
  cfg.use_grid = true;
  cfg.grid_points = 3;
  cfg.trigger = 1.1;
  const WorkflowResult r = run_workflow(m, cfg);
  CHECK(r.check.method == ReferenceMethod::GRID_AVERAGED);
  REQUIRE(r.grid.points.size() == 9);
  double p = 0.0, s0 = 0.0;
  for (size_t k = 0; k < r.grid.points.size(); ++k) {
    const JointPosterior post = conditional_posterior(m, r.grid.points[k]);
    const PerturbationGeometry g = perturb_geometry(post, post.latent);
    p += r.grid.weights[k] * pvalue(s0_analytic(g), ref_gaussian(g));
    s0 += r.grid.weights[k] * s0_analytic(g);
  }
  CHECK(r.check.p_value == doctest::Approx(p).epsilon(1e-10));
  CHECK(r.check.s0_obs == doctest::Approx(s0).epsilon(1e-10));
}

TEST_CASE("degenerate reference when Gamma vanishes") {
  PerturbationGeometry g;
  g.b = Vec::Zero(3);
  g.Gamma = Mat::Zero(3, 3);
  g.h = Vec::Ones(3);
  CHECK(THROWN_CODE(ref_gaussian(g)) == "DegenerateReference");
}

TEST_CASE("analytic and MC p-values agree on an RW1 problem") {
  RngStream rng(37, 0);
  const GaussianLGM m = testutil::small_model("rw1", 60, rng, 0);
  WorkflowConfig cfg;
  cfg.init = m.default_hyper();
  cfg.trigger = -1.0;
  const WorkflowResult a = run_workflow(m, cfg);
  cfg.init = a.eb.mode;
  cfg.run_eb = false;
  cfg.reference = ReferenceMethod::MC_REFERENCE;
  cfg.n_rep = 10000;
  const WorkflowResult b = run_workflow(m, cfg);
  CHECK(std::abs(a.check.p_value - b.check.p_value) < 0.03);
}

TEST_CASE("p-values decrease in the observed s0") {
  const GaussianRef ref{0.0, 2.0};
  Vec samples(50);
  for (int i = 0; i < 50; ++i) samples(i) = 0.1 * (i - 25);
  double last_a = 2.0, last_m = 2.0;
  for (double s = -3.0; s <= 3.0; s += 0.25) {
    const double pa = pvalue(s, ref), pm = pvalue_mc(s, samples);
    CHECK(pa < last_a);
    CHECK(pm <= last_m);
    last_a = pa;
    last_m = pm;
  }
}
