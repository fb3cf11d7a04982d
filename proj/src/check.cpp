#include "lgmcheck/check.hpp"

#include <algorithm>
#include <cmath>

#include "lgmcheck/error.hpp"
#include "lgmcheck/parallel.hpp"
#include "lgmcheck/samplers.hpp"
#include "lgmcheck/special.hpp"

namespace lgmcheck {

const char* method_name(ReferenceMethod m) {
  switch (m) {
    case ReferenceMethod::ANALYTIC_GAUSSIAN: return "ANALYTIC_GAUSSIAN";
    case ReferenceMethod::MC_REFERENCE: return "MC_REFERENCE";
    case ReferenceMethod::I0_APPROX: return "I0_APPROX";
    case ReferenceMethod::GRID_AVERAGED: return "GRID_AVERAGED";
  }
  return "ANALYTIC_GAUSSIAN";
}

GaussianRef ref_gaussian(const PerturbationGeometry& g) {
  const int n = static_cast<int>(g.b.size());
  double v = 0.0;
  for (int i = 0; i < n; ++i) {
    const double hi3 = g.h(i) * g.h(i) * g.h(i);
    for (int j = 0; j < n; ++j) {
      const double G2 = g.Gamma(i, j) * g.Gamma(i, j);
      const double hj3 = g.h(j) * g.h(j) * g.h(j);
      v += 3.0 * G2 * G2 / (8.0 * hi3 * hj3);
    }
  }
  if (!(v >= 1e-300)) throw Error(ErrorCode::DegenerateReference, "reference variance is zero (no latent information)");
  return {0.0, v};
}

Vec ref_mc(const GaussianLGM& m, const HyperParams& hp, const LatentStructure& latent, int n_rep,
           std::uint64_t seed, int threads, const std::string& block, int* failed) {
  if (n_rep < 100) throw Error(ErrorCode::InvalidArgument, "ref_mc needs n_rep >= 100");
  return s0_replicates(m, hp, latent, 0.0, n_rep, seed, 0, threads, block, failed);
}

Vec s0_replicates(const GaussianLGM& m, const HyperParams& hp, const LatentStructure& latent, double eta, int n_rep,
                  std::uint64_t seed, std::uint64_t stream0, int threads, const std::string& block, int* failed) {
  if (n_rep < 1) throw Error(ErrorCode::TooFewDraws, "need at least one replicate");
  const JointPosterior post = conditional_posterior(m, hp);
  // `latent` may carry other hyperparameter values; bind it to the posterior's
  const LatentStructure lat = latent.rebind(post.hyper.theta2);
  const PerturbationGeometry g = perturb_geometry(post, lat, block);
  const LatentSimulator sim(post.latent);
  const Vec Gd = g.Gamma.diagonal();
  // b(y) = L y with L = tau_eps * J Q^{-1} [B A]^T; the precision does not depend on y.
  const Mat X = sens_operator(post, lat, g);
  Mat HX = m.A * X.bottomRows(post.n_w);
  if (m.p() > 0) HX += m.B * X.topRows(post.p);
  const Mat L = hp.tau_eps * HX.transpose();
  const Vec b_shift = m.p() > 0 ? Vec(L * (m.B * post.mean_beta())) : Vec::Zero(L.rows());
  Vec out(n_rep);
  std::vector<char> ok(n_rep, 1);
  const double sd = 1.0 / std::sqrt(post.hyper.tau_eps);
  parallel_for(n_rep, threads, [&](std::size_t r) {
    try {
      RngStream rng(seed, stream0 + r);
      Vec y = m.A * sim.draw(eta, rng);
      for (int i = 0; i < y.size(); ++i) y(i) += sd * rng.normal();
      const Vec b = L * y + b_shift;
      double s = 0.0;
      for (int i = 0; i < b.size(); ++i) {
        const double b2 = b(i) * b(i), G = Gd(i), h = g.h(i);
        s += (b2 * b2 + 3.0 * G * G - 6.0 * b2 * G) / (8.0 * h * h * h);
      }
      out(r) = s;
      if (!std::isfinite(s)) ok[r] = 0;
    } catch (const Error&) {
      ok[r] = 0;
    }
  });
  std::vector<double> kept;
  for (int r = 0; r < n_rep; ++r)
    if (ok[r]) kept.push_back(out(r));
  if (failed) *failed = n_rep - static_cast<int>(kept.size());
  return Eigen::Map<Vec>(kept.data(), static_cast<Eigen::Index>(kept.size()));
}

GaussianRef ref_i0_approx(double, double i0_obs) {
  if (!(i0_obs > 0)) throw Error(ErrorCode::NegativeInformation, "I0 is not positive; reference undefined");
  return {0.0, i0_obs};
}

double pvalue(double s0_obs, const GaussianRef& ref) {
  if (!(ref.variance > 0)) throw Error(ErrorCode::DegenerateReference, "reference variance must be positive");
  return norm_cdf(-(s0_obs - ref.mean) / std::sqrt(ref.variance));
}

double pvalue_mc(double s0_obs, const Vec& samples) {
  if (samples.size() == 0) throw Error(ErrorCode::DegenerateReference, "no reference samples");
  const auto r = (samples.array() > s0_obs).count();
  return (static_cast<double>(r) + 1.0) / (static_cast<double>(samples.size()) + 1.0);
}

double pvalue_grid(const std::vector<std::pair<double, double>>& per_point) {
  if (per_point.empty()) throw Error(ErrorCode::WeightMismatch, "no grid points");
  double s = 0.0, wsum = 0.0;
  for (auto [p, w] : per_point) {
    if (w < 0) throw Error(ErrorCode::WeightMismatch, "negative weight");
    s += w * p;
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-8) throw Error(ErrorCode::WeightMismatch, "weights must sum to 1");
  return s;
}

namespace {

struct PointResult {
  JointPosterior post;
  PerturbationGeometry g;
  Vec d;
  double s0 = 0.0;
  double i0 = 0.0;
  double ref_var = 0.0;
  double p = 0.5;
  Vec ref_samples;
  int failed = 0;
};

PointResult evaluate_point(const GaussianLGM& m, const HyperParams& hp, const WorkflowConfig& cfg,
                           ReferenceMethod method) {
  PointResult r{conditional_posterior(m, hp), {}, {}, 0, 0, 0, 0.5, {}, 0};
  r.g = perturb_geometry(r.post, r.post.latent, cfg.block);
  r.d = d_scores(r.g);
  r.s0 = r.d.sum();
  r.i0 = i0_analytic(r.g);
  switch (method) {
    case ReferenceMethod::ANALYTIC_GAUSSIAN:
    case ReferenceMethod::GRID_AVERAGED: {
      const GaussianRef ref = ref_gaussian(r.g);
      r.ref_var = ref.variance;
      r.p = pvalue(r.s0, ref);
      break;
    }
    case ReferenceMethod::I0_APPROX: {
      const GaussianRef ref = ref_i0_approx(r.s0, r.i0);
      r.ref_var = ref.variance;
      r.p = pvalue(r.s0, ref);
      break;
    }
    case ReferenceMethod::MC_REFERENCE: {
      r.ref_samples = ref_mc(m, r.post.hyper, r.post.latent, cfg.n_rep, cfg.seed, cfg.threads, cfg.block, &r.failed);
      const double mean = r.ref_samples.mean();
      r.ref_var = (r.ref_samples.array() - mean).square().sum() / std::max<Eigen::Index>(1, r.ref_samples.size() - 1);
      r.p = pvalue_mc(r.s0, r.ref_samples);
      break;
    }
  }
  return r;
}

}  // namespace

WorkflowResult run_workflow(const GaussianLGM& m, const WorkflowConfig& cfg) {
  WorkflowResult out;
  if (cfg.run_eb) {
    out.eb = empirical_bayes_full(m, cfg.init);
  } else {
    out.eb.mode = cfg.init;
    for (const auto& [k, v] : m.latent.theta2())
      if (!out.eb.mode.theta2.count(k)) out.eb.mode.theta2[k] = v;
  }
  const bool grid = cfg.use_grid && cfg.grid_points > 1;
  if (grid)
    out.grid = hyper_grid(m, out.eb.mode, cfg.grid_points, cfg.span_sd, cfg.threads);
  else
    out.grid = HyperGrid{{out.eb.mode}, {1.0}, {}, {}, false};

  const ReferenceMethod point_method =
      cfg.reference == ReferenceMethod::GRID_AVERAGED ? ReferenceMethod::ANALYTIC_GAUSSIAN : cfg.reference;
  const size_t K = out.grid.points.size();
  std::vector<PointResult> pts;
  pts.reserve(K);
  for (size_t k = 0; k < K; ++k) pts.push_back(evaluate_point(m, out.grid.points[k], cfg, point_method));
  const auto& w = out.grid.weights;

  CheckReport& c = out.check;
  SensitivityReport& s = out.sens;
  c.method = grid ? ReferenceMethod::GRID_AVERAGED : point_method;
  std::vector<std::pair<double, double>> pw;
  s.d = Vec::Zero(pts[0].d.size());
  double s0 = 0.0, var = 0.0, i0 = 0.0;
  for (size_t k = 0; k < K; ++k) {
    pw.emplace_back(pts[k].p, w[k]);
    s.d += w[k] * pts[k].d;
    s0 += w[k] * pts[k].s0;
    var += w[k] * pts[k].ref_var;
    i0 += w[k] * pts[k].i0;
  }
  // mixture over the grid: V[p] gains the between-point spread of s0
  for (size_t k = 0; k < K; ++k) i0 -= w[k] * (pts[k].s0 - s0) * (pts[k].s0 - s0);
  c.s0_obs = s0;
  c.ref_mean = 0.0;
  c.ref_sd = std::sqrt(var);
  c.p_value = pvalue_grid(pw);
  if (!grid && point_method == ReferenceMethod::MC_REFERENCE) {
    c.ref_mean = pts[0].ref_samples.mean();
    c.ref_samples = pts[0].ref_samples;
    c.failed_replicates = pts[0].failed;
  }
  c.theta_eta = cfg.theta_eta;
  c.robust = cfg.theta_eta.has_value() && c.s0_obs < *cfg.theta_eta;
  s.s0 = s0;
  s.i0 = i0;
  s.i0_available = true;
  s.provenance = "analytic";
  out.ridge_used = pts[0].post.ridge_used;

  if (c.p_value < cfg.trigger || cfg.force_sensitivity) {
    const LinearTargets targets = resolve_targets(m, cfg.targets);
    s.target_order = targets.names;
    std::vector<std::map<std::string, TargetSensitivity>> per(K);
    std::vector<Vec> means(K);
    for (size_t k = 0; k < K; ++k) {
      per[k] = sens_linear_targets(pts[k].post, pts[k].g, pts[k].post.latent, targets);
      means[k] = targets.C.transpose() * pts[k].post.mean;
    }
    Vec mbar = Vec::Zero(targets.names.size());
    for (size_t k = 0; k < K; ++k) mbar += w[k] * means[k];
    for (size_t t = 0; t < targets.names.size(); ++t) {
      const auto& name = targets.names[t];
      double raw = 0.0, v = 0.0;
      for (size_t k = 0; k < K; ++k) {
        const auto& ts = per[k].at(name);
        const double dm = means[k](t) - mbar(t);
        raw += w[k] * (ts.raw + dm * (pts[k].s0 - s0));
        v += w[k] * (ts.sd * ts.sd + dm * dm);
      }
      TargetSensitivity ts;
      ts.raw = raw;
      ts.sd = std::sqrt(v);
      ts.scaled = ts.sd > 0 ? raw / ts.sd : 0.0;
      s.s_l[name] = ts;
    }
  }
  return out;
}

}  // namespace lgmcheck
