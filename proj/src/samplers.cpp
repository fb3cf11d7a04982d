#include "lgmcheck/samplers.hpp"

#include <cmath>
#include <Eigen/SparseLU>

#include "lgmcheck/error.hpp"

namespace lgmcheck {

double sample_invgaussian(double mu, double lambda, RngStream& rng) {
  if (!(mu > 0) || !(lambda > 0)) throw Error(ErrorCode::InvalidArgument, "inverse Gaussian needs mu, lambda > 0");
  const double z = rng.normal();
  const double y = z * z;
  const double muy = mu * y;
  const double mu2lam = 0.5 * mu / lambda;
  double x = mu + muy * mu2lam - mu2lam * std::sqrt(muy * (4.0 * lambda + muy));
  // x can round to 0 when mu*y/lambda is huge; the smaller root is then mu^2 / (mu + mu*y*mu/lambda)
  if (!(x > 0)) x = mu * mu / (mu + muy * mu / lambda);
  const double u = rng.uniform();
  if (u > mu / (mu + x)) return mu * mu / x;
  return x;
}

Vec sample_nig_noise(const NigNoiseSpec& spec, RngStream& rng) {
  if (spec.eta < 0) throw Error(ErrorCode::InvalidArgument, "eta must be nonnegative");
  const int n = static_cast<int>(spec.h.size());
  Vec out(n);
  for (int i = 0; i < n; ++i) {
    const double h = spec.h(i);
    const double v = spec.eta == 0.0 ? h : sample_invgaussian(h, h * h / spec.eta, rng);
    out(i) = std::sqrt(v) * rng.normal();
  }
  return out;
}

struct LatentSimulator::Impl {
  struct Block {
    int row0, col0, n_noise, n_w;
    bool rw1 = false;
    double sigma = 1.0;
    std::shared_ptr<Eigen::SparseLU<SpMat>> lu;
  };
  std::vector<Block> blocks;
};

LatentSimulator::LatentSimulator(const LatentStructure& latent) : latent_(latent) {
  auto impl = std::make_shared<Impl>();
  for (const auto& b : latent.blocks) {
    Impl::Block blk{b.row0, b.col0, b.n_noise, b.n_w, false, 1.0, nullptr};
    if (b.kind == LatentKind::RW1) {
      blk.rw1 = true;
      blk.sigma = b.sigma;
    } else {
      if (b.n_noise != b.n_w) throw Error(ErrorCode::SingularStructure, "cannot simulate a non-square intrinsic block");
      SpMat Db = latent.D.block(b.row0, b.col0, b.n_noise, b.n_w);
      Db.makeCompressed();
      blk.lu = std::make_shared<Eigen::SparseLU<SpMat>>();
      blk.lu->compute(Db);
      if (blk.lu->info() != Eigen::Success)
        throw Error(ErrorCode::SingularStructure, "structure block '" + b.label + "' is singular");
      const double lad = blk.lu->logAbsDeterminant();
      if (!std::isfinite(lad)) throw Error(ErrorCode::SingularStructure, "structure block '" + b.label + "' is singular");
    }
    impl->blocks.push_back(std::move(blk));
  }
  impl_ = impl;
}

Vec LatentSimulator::solve(const Vec& lambda) const {
  if (lambda.size() != latent_.n_noise()) throw Error(ErrorCode::DimensionMismatch, "noise length must equal rows of D");
  Vec w = Vec::Zero(latent_.n_w());
  for (const auto& b : impl_->blocks) {
    if (b.rw1) {
      double acc = 0.0;
      w(b.col0) = 0.0;
      for (int i = 0; i < b.n_noise; ++i) {
        acc += b.sigma * lambda(b.row0 + i);
        w(b.col0 + i + 1) = acc;
      }
      w.segment(b.col0, b.n_w).array() -= w.segment(b.col0, b.n_w).mean();
    } else {
      w.segment(b.col0, b.n_w) = b.lu->solve(Vec(lambda.segment(b.row0, b.n_noise)));
    }
  }
  return w;
}

Vec LatentSimulator::draw(double eta, RngStream& rng) const {
  return solve(sample_nig_noise({latent_.h, eta}, rng));
}

Vec simulate_latent(const LatentStructure& latent, const NigNoiseSpec& spec, RngStream& rng) {
  if (spec.h.size() != latent.n_noise()) throw Error(ErrorCode::DimensionMismatch, "spec.h must match rows of D");
  LatentSimulator sim(latent);
  return sim.solve(sample_nig_noise(spec, rng));
}

namespace {

double sample_gamma(double shape, double rate, RngStream& rng) {
  // Marsaglia-Tsang
  if (shape < 1.0) {
    const double u = rng.uniform();
    return sample_gamma(shape + 1.0, rate, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0, c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0);
    v = v * v * v;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v / rate;
  }
}

}  // namespace

Vec predictive_draw(const GaussianLGM& m, const HyperParams& hp_in, PredictiveScheme scheme,
                    const JointPosterior* post, RngStream& rng) {
  const int N = m.n_obs(), p = m.p();
  HyperParams hp = hp_in;
  Vec beta = Vec::Zero(p);
  Vec w;
  if (scheme == PredictiveScheme::POSTERIOR) {
    if (!post) throw Error(ErrorCode::MissingPosterior, "posterior predictive draws need a posterior");
    Vec x = sample_posterior(*post, 1, rng).col(0);
    beta = x.head(p);
    w = x.tail(m.n_w());
    hp = post->hyper;
  } else {
    if (scheme == PredictiveScheme::PRIOR) {
      for (const auto& name : m.free_hyper_names()) {
        auto it = m.hyper_priors.find(name);
        if (it == m.hyper_priors.end() || it->second.kind != PriorSpec::Kind::GammaPrecision)
          throw Error(ErrorCode::ImproperPrior, "prior predictive draws need a proper prior for '" + name + "'");
        const double tau = sample_gamma(it->second.shape, it->second.rate, rng);
        set_hyper(hp, name, name == "tau_eps" ? tau : 1.0 / std::sqrt(tau));
      }
      if (p > 0) {
        Eigen::LLT<Mat> llt(m.beta_prior_precision);
        if (llt.info() != Eigen::Success) throw Error(ErrorCode::ImproperPrior, "beta prior precision is singular");
        Vec z(p);
        for (int j = 0; j < p; ++j) z(j) = rng.normal();
        beta = llt.matrixU().solve(z);
      }
    } else if (p > 0) {
      if (!post) throw Error(ErrorCode::MissingPosterior, "mixed predictive draws need a posterior for beta");
      beta = post->mean_beta();
    }
    LatentSimulator sim(m.latent.rebind(hp.theta2));
    w = sim.draw(0.0, rng);
  }
  Vec y = m.A * w;
  if (p > 0) y += m.B * beta;
  const double sd = 1.0 / std::sqrt(hp.tau_eps);
  for (int i = 0; i < N; ++i) y(i) += sd * rng.normal();
  return y;
}

Mat sample_posterior(const JointPosterior& post, int n_draws, RngStream& rng) {
  const int d = post.p + post.n_w;
  Mat z(d, n_draws);
  for (int j = 0; j < n_draws; ++j)
    for (int i = 0; i < d; ++i) z(i, j) = rng.normal();
  Mat x = post.factor.sample_transform(z);
  x.colwise() += post.mean;
  return x;
}

}  // namespace lgmcheck
