#include "lgmcheck/nig.hpp"

#include <cmath>
#include <regex>

#include "lgmcheck/error.hpp"
#include "lgmcheck/special.hpp"

namespace lgmcheck {

namespace {

constexpr double kLogPi = 1.1447298858494002;
constexpr double kGammaFloor = 1e-10;

// Noise rows [row0, row0 + n) of D embedded in the joint (beta, w) coordinates.
SpMat joint_rows(const LatentStructure& latent, int p, int row0, int n) {
  SpMat Dsub = latent.D.middleRows(row0, n);
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < Dsub.outerSize(); ++k)
    for (SpMat::InnerIterator it(Dsub, k); it; ++it) trip.emplace_back(it.row(), p + it.col(), it.value());
  SpMat J(n, p + latent.n_w());
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

void check_match(const JointPosterior& post, const LatentStructure& latent) {
  if (latent.n_w() != post.n_w)
    throw Error(ErrorCode::DimensionMismatch, "latent structure does not match posterior dimension");
}

}  // namespace

double local_pert_p(double r, double h) {
  const double a = r * r - 3.0 * h;
  return (a * a - 6.0 * h * h) / (8.0 * h * h * h);
}

double local_pert_g(double r, double h) {
  const double r2 = r * r, h2 = h * h;
  return (-3.0 * h2 * h - 3.0 * h2 * r2 + 6.0 * h * r2 * r2 - r2 * r2 * r2) / (8.0 * h2 * h2 * h);
}

double nig_logpdf(double w, double h, double eta) {
  if (!(h > 0) || !(eta > 0)) throw Error(ErrorCode::InvalidArgument, "nig_logpdf needs h > 0 and eta > 0");
  const double s = std::sqrt(h * h + eta * w * w);
  return std::log(h) - 0.5 * std::log(eta) - kLogPi - w * w / (h + s) - std::log(s) +
         log_bessel_k_scaled(1.0, s / eta);
}

PerturbationGeometry perturb_geometry(const JointPosterior& post, const LatentStructure& latent,
                                      const std::string& block) {
  check_match(post, latent);
  int row0 = 0, n = latent.n_noise();
  if (!block.empty()) std::tie(row0, n) = latent.block_rows(block);
  SpMat J = joint_rows(latent, post.p, row0, n);
  PerturbationGeometry g;
  g.row_offset = row0;
  g.h = latent.h.segment(row0, n);
  g.b = J * post.mean;
  Mat S = posterior_cov_block(post.factor, J, J);
  g.Gamma = -0.5 * (S + S.transpose());
  g.Gamma.diagonal() += g.h;
  for (int i = 0; i < n; ++i) {
    double& gi = g.Gamma(i, i);
    if (gi < -kGammaFloor)
      throw Error(ErrorCode::NumericalBreakdown,
                  "Gamma[" + std::to_string(i) + "] = " + std::to_string(gi) + " is negative");
    if (gi < 0) gi = 0.0;
  }
  return g;
}

Vec geometry_b(const JointPosterior& post, const LatentStructure& latent, const PerturbationGeometry& g) {
  SpMat J = joint_rows(latent, post.p, g.row_offset, static_cast<int>(g.b.size()));
  return J * post.mean;
}

Mat sens_operator(const JointPosterior& post, const LatentStructure& latent, const PerturbationGeometry& g) {
  check_match(post, latent);
  SpMat J = joint_rows(latent, post.p, g.row_offset, static_cast<int>(g.b.size()));
  return post.factor.solve(Mat(SpMat(J.transpose())));
}

Vec d_scores(const PerturbationGeometry& g) {
  const int n = static_cast<int>(g.b.size());
  Vec d(n);
  for (int i = 0; i < n; ++i) {
    const double b2 = g.b(i) * g.b(i), G = g.Gamma(i, i), h = g.h(i);
    d(i) = (b2 * b2 + 3.0 * G * G - 6.0 * b2 * G) / (8.0 * h * h * h);
  }
  return d;
}

double s0_analytic(const PerturbationGeometry& g) { return d_scores(g).sum(); }

double expected_g(double b, double G, double h) {
  const double b2 = b * b, b4 = b2 * b2, h2 = h * h;
  const double num = b4 * b2 + b4 * (-15.0 * G + 9.0 * h) + 3.0 * b2 * (15.0 * G * G - 18.0 * G * h + 4.0 * h2) +
                     3.0 * (-5.0 * G * G * G + 9.0 * G * G * h - 4.0 * G * h2 + h2 * h);
  return -num / (8.0 * h2 * h2 * h);
}

// Cov(p_i, p_j) for jointly Gaussian residuals with means b, variances h - Gamma_ii and
// covariance c_ij (c_ii = h_i - Gamma_ii, c_ij = -Gamma_ij off the diagonal).
double cov_p(double bi, double bj, double gii, double gjj, double c, double hi, double hj) {
  const double num = 2.0 * bi * bj * (bi * bi - 3.0 * gii) * (bj * bj - 3.0 * gjj) +
                     9.0 * c * (bi * bi - gii) * (bj * bj - gjj) + 12.0 * c * c * bi * bj + 3.0 * c * c * c;
  return c * num / (8.0 * hi * hi * hi * hj * hj * hj);
}

double i0_analytic(const PerturbationGeometry& g, Direction dir) {
  if (dir == Direction::GAL)
    throw Error(ErrorCode::UnsupportedDirection, "I0 is only available for the NIG direction");
  const int n = static_cast<int>(g.b.size());
  double eg = 0.0, vp = 0.0;
  for (int i = 0; i < n; ++i) {
    eg += expected_g(g.b(i), g.Gamma(i, i), g.h(i));
    for (int j = 0; j < n; ++j) {
      const double c = (i == j ? g.h(i) : 0.0) - g.Gamma(i, j);
      if (c == 0.0) continue;
      vp += cov_p(g.b(i), g.b(j), g.Gamma(i, i), g.Gamma(j, j), c, g.h(i), g.h(j));
    }
  }
  return -eg - vp;
}

LinearTargets resolve_targets(const GaussianLGM& m, const TargetSelection& sel) {
  const int p = m.p(), n = m.n_w(), N = m.n_obs();
  const int npred = static_cast<int>(sel.prediction_projector.rows());
  if (npred > 0 && sel.prediction_projector.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "prediction projector must have n_w columns");
  LinearTargets t;
  std::vector<Vec> cols;
  auto add = [&](const std::string& name, Vec c) {
    t.names.push_back(name);
    cols.push_back(std::move(c));
  };
  auto coord = [&](const std::string& fam, int j) {
    Vec c = Vec::Zero(p + n);
    if (fam == "beta") {
      c(j) = 1.0;
    } else if (fam == "w") {
      c(p + j) = 1.0;
    } else if (fam == "eta") {
      if (p > 0) c.head(p) = m.B.row(j).transpose();
      c.tail(n) = Vec(SpMat(m.A.row(j)).transpose());
    } else {
      c.tail(n) = sel.prediction_projector.row(j).transpose();
    }
    return c;
  };
  const std::regex re(R"(^(beta|w|eta|pred)(?:\[(\d+)\])?$)");
  for (const auto& name : sel.names) {
    std::smatch mt;
    if (!std::regex_match(name, mt, re)) throw Error(ErrorCode::UnknownTarget, "unknown target '" + name + "'");
    const std::string fam = mt[1];
    const int size = fam == "beta" ? p : fam == "w" ? n : fam == "eta" ? N : npred;
    if (mt[2].matched) {
      const int j = std::stoi(mt[2]);
      if (j >= size) throw Error(ErrorCode::UnknownTarget, "target '" + name + "' out of range");
      add(name, coord(fam, j));
    } else {
      for (int j = 0; j < size; ++j) add(fam + "[" + std::to_string(j) + "]", coord(fam, j));
    }
  }
  t.C.resize(p + n, static_cast<Eigen::Index>(cols.size()));
  for (size_t k = 0; k < cols.size(); ++k) t.C.col(k) = cols[k];
  return t;
}

Vec sens_all_coordinates(const JointPosterior& post, const PerturbationGeometry& g, const LatentStructure& latent) {
  check_match(post, latent);
  const int n = static_cast<int>(g.b.size());
  Vec v(n);
  for (int i = 0; i < n; ++i) {
    const double b = g.b(i), h = g.h(i);
    v(i) = b * (b * b - 3.0 * g.Gamma(i, i)) / (2.0 * h * h * h);
  }
  SpMat J = joint_rows(latent, post.p, g.row_offset, n);
  return post.factor.solve(Vec(J.transpose() * v));
}

std::map<std::string, TargetSensitivity> sens_linear_targets(const JointPosterior& post,
                                                             const PerturbationGeometry& g,
                                                             const LatentStructure& latent,
                                                             const LinearTargets& targets) {
  std::map<std::string, TargetSensitivity> out;
  if (targets.names.empty()) return out;
  if (targets.C.rows() != post.p + post.n_w)
    throw Error(ErrorCode::DimensionMismatch, "target coefficients do not match posterior dimension");
  const Vec sx = sens_all_coordinates(post, g, latent);
  const Vec raw = targets.C.transpose() * sx;
  const Vec var = post.target_variance(targets.C);
  for (size_t k = 0; k < targets.names.size(); ++k) {
    TargetSensitivity t;
    t.raw = raw(k);
    t.sd = std::sqrt(std::max(0.0, var(k)));
    t.scaled = t.sd > 0 ? t.raw / t.sd : 0.0;
    out[targets.names[k]] = t;
  }
  return out;
}

}  // namespace lgmcheck
