#include "lgmcheck/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lgmcheck/error.hpp"

namespace lgmcheck {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kPriorRidgeEps = 1e-8;

struct PriorParts {
  LatentStructure latent;
  SpMat Qw;  // includes the intrinsic ridge
  double ridge = 0.0;
};

PriorParts prior_parts(const GaussianLGM& m, const HyperParams& hp) {
  validate_hyper(m, hp);
  PriorParts out;
  out.latent = m.latent.rebind(hp.theta2);
  const auto& D = out.latent.D;
  SpMat Hinv(D.rows(), D.rows());
  Hinv.setIdentity();
  for (int i = 0; i < D.rows(); ++i) Hinv.coeffRef(i, i) = 1.0 / out.latent.h(i);
  out.Qw = SpMat(D.transpose()) * Hinv * D;
  if (out.latent.intrinsic) {
    const double md = out.Qw.diagonal().sum() / std::max<Eigen::Index>(1, out.Qw.rows());
    out.ridge = kPriorRidgeEps * md;
    out.Qw += out.ridge * sparse_identity(static_cast<int>(out.Qw.rows()));
  }
  return out;
}

SpMat design(const GaussianLGM& m) {
  const int N = m.n_obs(), p = m.p(), n = m.n_w();
  std::vector<Eigen::Triplet<double>> trip;
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < N; ++i)
      if (m.B(i, j) != 0.0) trip.emplace_back(i, j, m.B(i, j));
  for (int k = 0; k < m.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(m.A, k); it; ++it) trip.emplace_back(it.row(), p + it.col(), it.value());
  SpMat H(N, p + n);
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

SpMat joint_prior(const GaussianLGM& m, const SpMat& Qw) {
  const int p = m.p(), n = m.n_w();
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (m.beta_prior_precision(i, j) != 0.0) trip.emplace_back(i, j, m.beta_prior_precision(i, j));
  for (int k = 0; k < Qw.outerSize(); ++k)
    for (SpMat::InnerIterator it(Qw, k); it; ++it) trip.emplace_back(p + it.row(), p + it.col(), it.value());
  SpMat Q(p + n, p + n);
  Q.setFromTriplets(trip.begin(), trip.end());
  return Q;
}

JointPosterior build_posterior(const GaussianLGM& m, const HyperParams& hp, const PriorParts& pp,
                               SpMat* H_out, SpMat* Qprior_out) {
  SpMat H = design(m);
  SpMat Qprior = joint_prior(m, pp.Qw);
  SpMat Q = Qprior + hp.tau_eps * SpMat(H.transpose() * H);
  Q = 0.5 * (Q + SpMat(Q.transpose()));
  JointPosterior post;
  post.p = m.p();
  post.n_w = m.n_w();
  post.hyper = hp;
  post.hyper.theta2 = pp.latent.theta2();
  post.latent = pp.latent;
  post.factor = cholesky(SymMatrix::sparse(Q));
  post.ridge_used = pp.ridge + post.factor.ridge();
  Vec info = hp.tau_eps * (H.transpose() * m.y);
  post.mean = post.factor.solve(info);
  if (H_out) *H_out = std::move(H);
  if (Qprior_out) *Qprior_out = std::move(Qprior);
  return post;
}

bool is_rho_name(const GaussianLGM& m, const std::string& name) {
  for (const auto& b : m.latent.blocks)
    if (!b.rho_name.empty() && b.rho_name == name) return true;
  return false;
}

}  // namespace

JointPosterior JointPosterior::with_data(const GaussianLGM& m, const Vec& y) const {
  if (y.size() != m.n_obs()) throw Error(ErrorCode::DimensionMismatch, "with_data: wrong response length");
  JointPosterior out = *this;
  Vec info(p + n_w);
  if (p > 0) info.head(p) = m.B.transpose() * y;
  info.tail(n_w) = m.A.transpose() * y;
  out.mean = factor.solve(Vec(hyper.tau_eps * info));
  return out;
}

Vec JointPosterior::target_variance(const Mat& cols) const {
  Mat x = factor.solve(cols);
  return (cols.array() * x.array()).colwise().sum().transpose();
}

JointPosterior conditional_posterior(const GaussianLGM& m, const HyperParams& hp) {
  PriorParts pp = prior_parts(m, hp);
  return build_posterior(m, hp, pp, nullptr, nullptr);
}

namespace {

struct MarginalParts {
  double value;
  double ridge;
};

MarginalParts log_marginal_parts(const GaussianLGM& m, const HyperParams& hp) {
  PriorParts pp = prior_parts(m, hp);
  SpMat H, Qprior;
  JointPosterior post = build_posterior(m, hp, pp, &H, &Qprior);
  double logdet_prior = 0.0;
  if (m.p() > 0) {
    Eigen::LLT<Mat> lb(m.beta_prior_precision);
    if (lb.info() != Eigen::Success)
      throw Error(ErrorCode::NotPositiveDefinite, "beta prior precision is singular; log marginal undefined");
    logdet_prior += 2.0 * Mat(lb.matrixLLT()).diagonal().array().log().sum();
  }
  if (m.n_w() > 0) {
    CholOptions opt;
    opt.allow_ridge = false;
    logdet_prior += cholesky(SymMatrix::sparse(pp.Qw), opt).logdet();
  }
  const int N = m.n_obs();
  Vec resid = m.y - H * post.mean;
  const double quad_prior = post.mean.dot(Qprior * post.mean);
  const double v = 0.5 * N * (std::log(hp.tau_eps) - kLog2Pi) - 0.5 * hp.tau_eps * resid.squaredNorm() -
                   0.5 * quad_prior + 0.5 * logdet_prior - 0.5 * post.factor.logdet();
  return {v, pp.ridge};
}

}  // namespace

double log_marginal(const GaussianLGM& m, const HyperParams& hp) { return log_marginal_parts(m, hp).value; }

double get_hyper(const HyperParams& hp, const std::string& name) {
  if (name == "tau_eps") return hp.tau_eps;
  auto it = hp.theta2.find(name);
  if (it == hp.theta2.end()) throw Error(ErrorCode::ConfigError, "hyperparameter '" + name + "' not set");
  return it->second;
}

void set_hyper(HyperParams& hp, const std::string& name, double value) {
  if (name == "tau_eps")
    hp.tau_eps = value;
  else
    hp.theta2[name] = value;
}

std::vector<HyperSlot> free_slots(const GaussianLGM& m) {
  std::vector<HyperSlot> s;
  for (const auto& n : m.free_hyper_names()) s.push_back({n, is_rho_name(m, n) ? Transform::Logit : Transform::Log});
  return s;
}

Vec to_internal(const std::vector<HyperSlot>& slots, const HyperParams& hp) {
  Vec u(slots.size());
  for (size_t k = 0; k < slots.size(); ++k) {
    const double v = get_hyper(hp, slots[k].name);
    if (slots[k].transform == Transform::Log) {
      u(k) = std::log(v);
    } else {
      const double q = 0.5 * (v + 1.0);
      u(k) = std::log(q / (1.0 - q));
    }
  }
  return u;
}

HyperParams from_internal(const std::vector<HyperSlot>& slots, const Vec& u, const HyperParams& base) {
  HyperParams hp = base;
  for (size_t k = 0; k < slots.size(); ++k) {
    double v;
    if (slots[k].transform == Transform::Log)
      v = std::exp(u(k));
    else
      v = 2.0 / (1.0 + std::exp(-u(k))) - 1.0;
    set_hyper(hp, slots[k].name, v);
  }
  return hp;
}

double log_prior_internal(const GaussianLGM& m, const HyperSlot& slot, double u) {
  auto it = m.hyper_priors.find(slot.name);
  if (it == m.hyper_priors.end()) return 0.0;
  const PriorSpec& pr = it->second;
  if (pr.kind != PriorSpec::Kind::GammaPrecision) return 0.0;
  if (slot.transform != Transform::Log)
    throw Error(ErrorCode::ConfigError, "Gamma prior on '" + slot.name + "' needs a positive parameter");
  // precision and log|d precision / du|
  double tau, log_jac;
  if (slot.name == "tau_eps") {
    tau = std::exp(u);
    log_jac = u;
  } else {
    tau = std::exp(-2.0 * u);
    log_jac = std::log(2.0) - 2.0 * u;
  }
  return pr.shape * std::log(pr.rate) - std::lgamma(pr.shape) + (pr.shape - 1.0) * std::log(tau) - pr.rate * tau +
         log_jac;
}

std::vector<std::string> flat_prior_defaults(const GaussianLGM& m) {
  std::vector<std::string> out;
  for (const auto& n : m.free_hyper_names()) {
    auto it = m.hyper_priors.find(n);
    if (it == m.hyper_priors.end() || it->second.kind == PriorSpec::Kind::Flat) out.push_back(n);
  }
  return out;
}

double eb_objective(const GaussianLGM& m, const HyperParams& hp) {
  MarginalParts lm = log_marginal_parts(m, hp);
  double v = lm.value;
  if (m.latent.intrinsic && lm.ridge > 0) v -= 0.5 * m.latent.nullity() * std::log(lm.ridge);
  const auto slots = free_slots(m);
  const Vec u = to_internal(slots, hp);
  for (size_t k = 0; k < slots.size(); ++k) v += log_prior_internal(m, slots[k], u(k));
  return v;
}

EbResult empirical_bayes_full(const GaussianLGM& m, const HyperParams& init, const NelderMeadOptions& opt) {
  validate_hyper(m, init);
  HyperParams base = init;
  for (const auto& [k, v] : m.latent.theta2())
    if (!base.theta2.count(k)) base.theta2[k] = v;
  const auto slots = free_slots(m);
  EbResult res;
  if (slots.empty()) {
    res.mode = base;
    res.objective = eb_objective(m, base);
    res.evaluations = 1;
    return res;
  }
  auto f = [&](const Vec& u) { return eb_objective(m, from_internal(slots, u, base)); };
  OptimResult o = nelder_mead_maximize(f, to_internal(slots, base), opt);
  if (!o.converged || !std::isfinite(o.value))
    throw Error(ErrorCode::NoConvergence, "empirical Bayes did not converge (simplex diameter " +
                                              std::to_string(o.diameter) + ")");
  res.mode = from_internal(slots, o.x, base);
  res.objective = o.value;
  res.converged = o.converged;
  res.tolerance = o.diameter;
  res.evaluations = o.evaluations;
  return res;
}

HyperParams empirical_bayes(const GaussianLGM& m, const HyperParams& init) {
  return empirical_bayes_full(m, init).mode;
}

HyperGrid hyper_grid(const GaussianLGM& m, const HyperParams& mode, int points_per_dim, double span_sd,
                     int threads) {
  const auto slots = free_slots(m);
  auto f = [&](const Vec& u) { return eb_objective(m, from_internal(slots, u, mode)); };
  RegularGrid rg = regular_grid(f, to_internal(slots, mode), points_per_dim, span_sd, threads);
  HyperGrid g;
  for (const auto& u : rg.points) g.points.push_back(from_internal(slots, u, mode));
  g.weights = std::move(rg.weights);
  g.log_objective = std::move(rg.log_objective);
  g.sd = std::move(rg.sd);
  g.hessian_fallback = rg.hessian_fallback;
  return g;
}

}  // namespace lgmcheck
