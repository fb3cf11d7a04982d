#include "lgmcheck/matern.hpp"

#include <cmath>

#include "lgmcheck/error.hpp"
#include "lgmcheck/optimize.hpp"
#include "lgmcheck/parallel.hpp"
#include "lgmcheck/rng.hpp"
#include "lgmcheck/special.hpp"

namespace lgmcheck {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

void check_params(const MaternParams& p) {
  if (!(p.sigma_w >= 0) || !(p.rho > 0) || !(p.nu > 0))
    throw Error(ErrorCode::InvalidArgument, "Matern parameters must be positive");
}

struct GpFactor {
  Eigen::LLT<Mat> llt;
  double logdet = 0.0;
};

GpFactor gp_factor(const Mat& distances, const MaternParams& p, double sigma_eps) {
  Mat K = matern_cov(distances, p);
  K.diagonal().array() += sigma_eps * sigma_eps;
  GpFactor f{Eigen::LLT<Mat>(K), 0.0};
  if (f.llt.info() != Eigen::Success) throw Error(ErrorCode::NotPositiveDefinite, "GP covariance not positive definite");
  f.logdet = 2.0 * Mat(f.llt.matrixLLT()).diagonal().array().log().sum();
  return f;
}

double gp_logpdf(const GpFactor& f, const Vec& y) {
  const Vec z = f.llt.matrixL().solve(y);
  return -0.5 * (y.size() * kLog2Pi + f.logdet + z.squaredNorm());
}

Vec to_u(const GpHyper& g) { return Vec{{std::log(g.sigma_eps), std::log(g.sigma_w), std::log(g.rho)}}; }
GpHyper from_u(const Vec& u) { return {std::exp(u(0)), std::exp(u(1)), std::exp(u(2))}; }

}  // namespace

double matern_kernel_bessel(double r, const MaternParams& p) {
  check_params(p);
  const double s2 = p.sigma_w * p.sigma_w;
  if (r <= 0) return s2;
  const double u = std::sqrt(2.0 * p.nu) * r / p.rho;
  const double lk = (1.0 - p.nu) * std::log(2.0) - std::lgamma(p.nu) + p.nu * std::log(u) + log_bessel_k(p.nu, u);
  return s2 * std::exp(lk);
}

double matern_kernel(double r, const MaternParams& p) {
  check_params(p);
  const double s2 = p.sigma_w * p.sigma_w;
  if (r <= 0) return s2;
  if (p.nu == 0.5) return s2 * std::exp(-r / p.rho);
  if (p.nu == 1.5) {
    const double a = std::sqrt(3.0) * r / p.rho;
    return s2 * (1.0 + a) * std::exp(-a);
  }
  if (p.nu == 2.5) {
    const double a = std::sqrt(5.0) * r / p.rho;
    return s2 * (1.0 + a + a * a / 3.0) * std::exp(-a);
  }
  return matern_kernel_bessel(r, p);
}

Mat matern_cov(const Mat& distances, const MaternParams& p) {
  check_params(p);
  const auto n = distances.rows();
  if (distances.cols() != n) throw Error(ErrorCode::DimensionMismatch, "distance matrix must be square");
  Mat K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    K(j, j) = p.sigma_w * p.sigma_w;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double r = distances(i, j);
      if (r < 0) throw Error(ErrorCode::InvalidArgument, "negative distance");
      K(i, j) = K(j, i) = matern_kernel(r, p);
    }
  }
  return K;
}

Mat distance_matrix(const Vec& x) {
  const auto n = x.size();
  Mat d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::abs(x(i) - x(j));
  return d;
}

double gp_log_marginal(const Vec& y, const Mat& distances, const MaternParams& p, double sigma_eps) {
  if (y.size() != distances.rows()) throw Error(ErrorCode::DimensionMismatch, "y and distances disagree");
  return gp_logpdf(gp_factor(distances, p, sigma_eps), y);
}

GpMode gp_mode(const Vec& y, const Mat& distances, double nu, const GpHyper& init) {
  auto f = [&](const Vec& u) {
    const GpHyper g = from_u(u);
    return gp_log_marginal(y, distances, {g.sigma_w, g.rho, nu}, g.sigma_eps);
  };
  OptimResult o = nelder_mead_maximize(f, to_u(init));
  if (!std::isfinite(o.value)) throw Error(ErrorCode::NoConvergence, "GP mode search failed");
  return {from_u(o.x), o.value, o.converged};
}

double matern_discrepancy(const Vec& y, const Mat& distances, const GpHyper& g, double nu0, double eps,
                          bool forward) {
  if (!(nu0 > 0) || !(eps > 0) || (!forward && !(nu0 - eps > 0)))
    throw Error(ErrorCode::InvalidArgument, "nu0 +- eps must stay positive");
  const double hi = gp_log_marginal(y, distances, {g.sigma_w, g.rho, nu0 + eps}, g.sigma_eps);
  if (forward) return (hi - gp_log_marginal(y, distances, {g.sigma_w, g.rho, nu0}, g.sigma_eps)) / eps;
  return (hi - gp_log_marginal(y, distances, {g.sigma_w, g.rho, nu0 - eps}, g.sigma_eps)) / (2.0 * eps);
}

MaternCheckResult matern_smoothness_check(const Vec& y, const Mat& distances, double nu0, double eps,
                                          const HyperSource& source, int n_rep, std::uint64_t seed, int threads,
                                          bool forward) {
  if (!(nu0 > 0) || !(eps > 0) || (!forward && !(nu0 - eps > 0)))
    throw Error(ErrorCode::InvalidArgument, "nu0 +- eps must stay positive");
  if (n_rep < 1) throw Error(ErrorCode::InvalidArgument, "n_rep must be >= 1");
  MaternCheckResult res;
  std::vector<GpHyper> pts;
  std::vector<double> wts;
  if (source.kind == HyperSourceKind::External) {
    if (source.draws.empty()) throw Error(ErrorCode::InvalidArgument, "no external hyperparameter draws");
    pts = source.draws;
    wts.assign(pts.size(), 1.0 / pts.size());
  } else {
    double sd = y.size() > 1 ? std::sqrt((y.array() - y.mean()).square().sum() / (y.size() - 1)) : 1.0;
    const double span = distances.maxCoeff();
    GpHyper init{0.5 * sd, sd, span > 0 ? 0.1 * span : 1.0};
    res.mode = gp_mode(y, distances, nu0, init);
    if (source.kind == HyperSourceKind::Mode) {
      pts.push_back(res.mode.hyper);
      wts.push_back(1.0);
    } else {
      auto f = [&](const Vec& u) {
        const GpHyper g = from_u(u);
        return gp_log_marginal(y, distances, {g.sigma_w, g.rho, nu0}, g.sigma_eps);
      };
      RegularGrid rg = regular_grid(f, to_u(res.mode.hyper), source.grid_points, source.span_sd, threads);
      res.hessian_fallback = rg.hessian_fallback;
      for (size_t k = 0; k < rg.points.size(); ++k) {
        if (rg.weights[k] <= 0) continue;
        pts.push_back(from_u(rg.points[k]));
        wts.push_back(rg.weights[k]);
      }
    }
  }
  const size_t K = pts.size();
  res.scatter.resize(K * n_rep);
  parallel_for(K, threads, [&](std::size_t k) {
    const GpHyper& g = pts[k];
    const GpFactor f0 = gp_factor(distances, {g.sigma_w, g.rho, nu0}, g.sigma_eps);
    const GpFactor fp = gp_factor(distances, {g.sigma_w, g.rho, nu0 + eps}, g.sigma_eps);
    const GpFactor fm = forward ? f0 : gp_factor(distances, {g.sigma_w, g.rho, nu0 - eps}, g.sigma_eps);
    const double denom = forward ? eps : 2.0 * eps;
    auto disc = [&](const Vec& v) { return (gp_logpdf(fp, v) - gp_logpdf(fm, v)) / denom; };
    const double d_obs = disc(y);
    const Mat L = f0.llt.matrixL();
    for (int r = 0; r < n_rep; ++r) {
      RngStream rng(seed, static_cast<std::uint64_t>(k) * n_rep + r);
      Vec z(y.size());
      for (int i = 0; i < z.size(); ++i) z(i) = rng.normal();
      const Vec yp = L * z;
      res.scatter[k * n_rep + r] = {d_obs, disc(yp), wts[k] / n_rep, g};
    }
  });
  double p = 0.0;
  for (const auto& s : res.scatter)
    if (s.d_rep > s.d_obs) p += s.weight;
  res.p_value = p;
  return res;
}

}  // namespace lgmcheck
