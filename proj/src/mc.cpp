#include "lgmcheck/mc.hpp"

#include <cmath>

#include "lgmcheck/error.hpp"
#include "lgmcheck/nig.hpp"

namespace lgmcheck {

namespace {

Mat residuals(const Mat& w_draws, const LatentStructure& latent, RowRange rows, Vec& h) {
  if (w_draws.rows() != latent.n_w()) throw Error(ErrorCode::DimensionMismatch, "draws must have n_w rows");
  const int n = rows.count < 0 ? latent.n_noise() - rows.first : rows.count;
  h = latent.h.segment(rows.first, n);
  SpMat D = latent.D.middleRows(rows.first, n);
  return D * w_draws;
}

double mean_of(const Vec& v) { return v.sum() / static_cast<double>(v.size()); }

double sample_var(const Vec& v) {
  const double m = mean_of(v);
  return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

McEstimate mean_estimate(const Vec& v) {
  McEstimate e;
  e.n_draws = static_cast<int>(v.size());
  e.value = mean_of(v);
  e.std_error = std::sqrt(sample_var(v) / v.size());
  return e;
}

}  // namespace

Vec perturbation_sums(const Mat& w_draws, const LatentStructure& latent, RowRange rows) {
  Vec h;
  Mat R = residuals(w_draws, latent, rows, h);
  Vec s = Vec::Zero(R.cols());
  for (int k = 0; k < R.cols(); ++k)
    for (int i = 0; i < R.rows(); ++i) s(k) += local_pert_p(R(i, k), h(i));
  return s;
}

McEstimate mc_s0(const Mat& w_draws, const LatentStructure& latent, RowRange rows) {
  if (w_draws.cols() < 2) throw Error(ErrorCode::TooFewDraws, "mc_s0 needs at least 2 draws");
  return mean_estimate(perturbation_sums(w_draws, latent, rows));
}

std::vector<McEstimate> mc_d_scores(const Mat& w_draws, const LatentStructure& latent, RowRange rows) {
  if (w_draws.cols() < 2) throw Error(ErrorCode::TooFewDraws, "mc_d_scores needs at least 2 draws");
  Vec h;
  Mat R = residuals(w_draws, latent, rows, h);
  std::vector<McEstimate> out;
  Vec p(R.cols());
  for (int i = 0; i < R.rows(); ++i) {
    for (int k = 0; k < R.cols(); ++k) p(k) = local_pert_p(R(i, k), h(i));
    out.push_back(mean_estimate(p));
  }
  return out;
}

McEstimate mc_i0(const Mat& w_draws, const LatentStructure& latent, RowRange rows, int n_batches) {
  const int n = static_cast<int>(w_draws.cols());
  if (n < 10 || n < 2 * n_batches) throw Error(ErrorCode::TooFewDraws, "mc_i0 needs more draws");
  Vec h;
  Mat R = residuals(w_draws, latent, rows, h);
  Vec ps = Vec::Zero(n), gs = Vec::Zero(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < R.rows(); ++i) {
      ps(k) += local_pert_p(R(i, k), h(i));
      gs(k) += local_pert_g(R(i, k), h(i));
    }
  McEstimate e;
  e.n_draws = n;
  e.value = -mean_of(gs) - sample_var(ps);
  const int bs = n / n_batches;
  Vec batch(n_batches);
  for (int b = 0; b < n_batches; ++b) {
    Vec pb = ps.segment(b * bs, bs), gb = gs.segment(b * bs, bs);
    batch(b) = -mean_of(gb) - sample_var(pb);
  }
  e.std_error = std::sqrt(sample_var(batch) / n_batches);
  return e;
}

McEstimate mc_sensitivity(const Vec& target_draws, const Mat& w_draws, const LatentStructure& latent,
                          RowRange rows) {
  const int n = static_cast<int>(w_draws.cols());
  if (n < 2) throw Error(ErrorCode::TooFewDraws, "mc_sensitivity needs at least 2 draws");
  if (target_draws.size() != n) throw Error(ErrorCode::DimensionMismatch, "target and w draws must pair up");
  Vec ps = perturbation_sums(w_draws, latent, rows);
  const double mt = mean_of(target_draws), mp = mean_of(ps);
  Vec prod = (target_draws.array() - mt) * (ps.array() - mp);
  McEstimate e;
  e.n_draws = n;
  e.value = prod.sum() / (n - 1);
  e.std_error = std::sqrt(sample_var(prod) / n);
  return e;
}

double default_fd_step(double value) { return 1e-5 * std::max(1.0, std::abs(value)); }

double fd_perturbation(const std::function<double(const ParamPoint&)>& loglik, const ParamPoint& at,
                       const std::string& direction, double eps) {
  if (!at.count(direction)) throw Error(ErrorCode::InvalidArgument, "unknown direction '" + direction + "'");
  ParamPoint up = at;
  up[direction] += eps;
  const double f0 = loglik(at), f1 = loglik(up);
  if (!std::isfinite(f0) || !std::isfinite(f1)) throw Error(ErrorCode::NonFiniteLoglik, "log likelihood not finite");
  return (f1 - f0) / eps;
}

double fd_central(const std::function<double(const ParamPoint&)>& loglik, const ParamPoint& at,
                  const std::string& direction, double eps) {
  if (!at.count(direction)) throw Error(ErrorCode::InvalidArgument, "unknown direction '" + direction + "'");
  ParamPoint up = at, dn = at;
  up[direction] += eps;
  dn[direction] -= eps;
  const double f1 = loglik(up), f0 = loglik(dn);
  if (!std::isfinite(f0) || !std::isfinite(f1)) throw Error(ErrorCode::NonFiniteLoglik, "log likelihood not finite");
  return (f1 - f0) / (2.0 * eps);
}

}  // namespace lgmcheck
