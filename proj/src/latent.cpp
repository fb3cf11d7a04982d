#include "lgmcheck/latent.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/SparseLU>

#include "lgmcheck/error.hpp"
#include "lgmcheck/io.hpp"

namespace lgmcheck {

namespace {

SpMat block_matrix(const LatentBlock& b) {
  switch (b.kind) {
    case LatentKind::RW1:
    case LatentKind::IID:
      return b.base / b.sigma;
    case LatentKind::SAR: {
      SpMat d = sparse_identity(b.n_w) - b.rho * b.base;
      return d / b.sigma;
    }
    case LatentKind::CUSTOM:
      return b.sigma_name.empty() ? b.base : SpMat(b.base / b.sigma);
  }
  return b.base;
}

void check_block_hyper(const LatentBlock& b) {
  if (!(b.sigma > 0) || !std::isfinite(b.sigma))
    throw Error(ErrorCode::InvalidArgument, "scale '" + b.sigma_name + "' must be positive");
  if (b.kind == LatentKind::SAR && !(std::abs(b.rho) < 1.0))
    throw Error(ErrorCode::RhoOutOfRange, "SAR rho must lie in (-1, 1)");
}

void materialize(LatentStructure& s) {
  std::vector<Eigen::Triplet<double>> trip;
  int rows = 0, cols = 0;
  for (const auto& b : s.blocks) {
    rows = std::max(rows, b.row0 + b.n_noise);
    cols = std::max(cols, b.col0 + b.n_w);
  }
  for (const auto& b : s.blocks) {
    check_block_hyper(b);
    SpMat m = block_matrix(b);
    for (int k = 0; k < m.outerSize(); ++k)
      for (SpMat::InnerIterator it(m, k); it; ++it)
        trip.emplace_back(b.row0 + it.row(), b.col0 + it.col(), it.value());
  }
  s.D.resize(rows, cols);
  s.D.setFromTriplets(trip.begin(), trip.end());
  s.D.makeCompressed();
  s.hyper_names.clear();
  for (const auto& b : s.blocks) {
    if (!b.sigma_name.empty()) s.hyper_names.push_back(b.sigma_name);
    if (!b.rho_name.empty()) s.hyper_names.push_back(b.rho_name);
  }
}

}  // namespace

const char* kind_name(LatentKind k) {
  switch (k) {
    case LatentKind::RW1: return "rw1";
    case LatentKind::IID: return "iid";
    case LatentKind::SAR: return "sar";
    case LatentKind::CUSTOM: return "custom";
  }
  return "custom";
}

SpMat sparse_identity(int n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

std::map<std::string, double> LatentStructure::theta2() const {
  std::map<std::string, double> t;
  for (const auto& b : blocks) {
    if (!b.sigma_name.empty()) t[b.sigma_name] = b.sigma;
    if (!b.rho_name.empty()) t[b.rho_name] = b.rho;
  }
  return t;
}

LatentStructure LatentStructure::rebind(const std::map<std::string, double>& t) const {
  LatentStructure s = *this;
  for (auto& b : s.blocks) {
    if (!b.sigma_name.empty()) {
      auto it = t.find(b.sigma_name);
      if (it != t.end()) b.sigma = it->second;
    }
    if (!b.rho_name.empty()) {
      auto it = t.find(b.rho_name);
      if (it != t.end()) b.rho = it->second;
    }
  }
  materialize(s);
  return s;
}

std::pair<int, int> LatentStructure::block_rows(const std::string& label) const {
  for (const auto& b : blocks)
    if (b.label == label) return {b.row0, b.n_noise};
  throw Error(ErrorCode::UnknownTarget, "no latent block labelled '" + label + "'");
}

LatentStructure build_rw1(int n, double sigma_w) {
  if (n < 2) throw Error(ErrorCode::InvalidDimension, "RW1 needs n >= 2");
  LatentBlock b;
  b.kind = LatentKind::RW1;
  b.label = "w";
  b.n_noise = n - 1;
  b.n_w = n;
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < n - 1; ++i) {
    trip.emplace_back(i, i, -1.0);
    trip.emplace_back(i, i + 1, 1.0);
  }
  b.base.resize(n - 1, n);
  b.base.setFromTriplets(trip.begin(), trip.end());
  b.sigma_name = "sigma_w";
  b.sigma = sigma_w;
  LatentStructure s;
  s.kind = LatentKind::RW1;
  s.h = Vec::Ones(n - 1);
  s.intrinsic = true;
  s.blocks.push_back(std::move(b));
  materialize(s);
  return s;
}

LatentStructure build_iid(int n, double sigma) {
  if (n < 1) throw Error(ErrorCode::InvalidDimension, "IID needs n >= 1");
  LatentBlock b;
  b.kind = LatentKind::IID;
  b.label = "w";
  b.n_noise = b.n_w = n;
  b.base = sparse_identity(n);
  b.sigma_name = "sigma_w";
  b.sigma = sigma;
  LatentStructure s;
  s.kind = LatentKind::IID;
  s.h = Vec::Ones(n);
  s.blocks.push_back(std::move(b));
  materialize(s);
  return s;
}

SpMat row_standardized_adjacency(const std::vector<std::pair<int, int>>& edges, int n_nodes) {
  int n = n_nodes;
  for (auto [a, b] : edges) {
    if (a < 1 || b < 1) throw Error(ErrorCode::InvalidArgument, "edge ids are 1-based");
    n = std::max({n, a, b});
  }
  std::set<std::pair<int, int>> adj;
  for (auto [a, b] : edges) {
    if (a == b) continue;
    adj.insert({a - 1, b - 1});
    adj.insert({b - 1, a - 1});
  }
  std::vector<int> deg(n, 0);
  for (auto [a, b] : adj) ++deg[a];
  for (int i = 0; i < n; ++i)
    if (deg[i] == 0) throw Error(ErrorCode::IsolatedNode, "node " + std::to_string(i + 1) + " has no neighbours");
  std::vector<Eigen::Triplet<double>> trip;
  for (auto [a, b] : adj) trip.emplace_back(a, b, 1.0 / deg[a]);
  SpMat W(n, n);
  W.setFromTriplets(trip.begin(), trip.end());
  return W;
}

LatentStructure build_sar(const std::vector<std::pair<int, int>>& edges, double rho, double sigma_w,
                          int n_nodes) {
  if (!(std::abs(rho) < 1.0)) throw Error(ErrorCode::RhoOutOfRange, "SAR rho must lie in (-1, 1)");
  SpMat W = row_standardized_adjacency(edges, n_nodes);
  const int n = static_cast<int>(W.rows());
  LatentBlock b;
  b.kind = LatentKind::SAR;
  b.label = "w";
  b.n_noise = b.n_w = n;
  b.base = W;
  b.sigma_name = "sigma_w";
  b.rho_name = "rho";
  b.sigma = sigma_w;
  b.rho = rho;
  LatentStructure s;
  s.kind = LatentKind::SAR;
  s.h = Vec::Ones(n);
  s.blocks.push_back(std::move(b));
  materialize(s);
  return s;
}

LatentStructure make_custom(const Mat& D, const Vec& h) {
  if (D.rows() != h.size())
    throw Error(ErrorCode::DimensionMismatch, "D has " + std::to_string(D.rows()) + " rows but h has " +
                                                  std::to_string(h.size()) + " entries");
  if (D.rows() < 1 || D.cols() < 1) throw Error(ErrorCode::InvalidDimension, "empty D");
  if (D.rows() > D.cols()) throw Error(ErrorCode::InvalidDimension, "D has more rows than columns");
  for (int i = 0; i < h.size(); ++i)
    if (!(h(i) > 0)) throw Error(ErrorCode::NonPositiveH, "h[" + std::to_string(i) + "] is not positive");
  if (!D.allFinite()) throw Error(ErrorCode::ParseError, "D has non-finite entries");
  LatentBlock b;
  b.kind = LatentKind::CUSTOM;
  b.label = "w";
  b.n_noise = static_cast<int>(D.rows());
  b.n_w = static_cast<int>(D.cols());
  b.base = D.sparseView(0.0, 0.0);
  LatentStructure s;
  s.kind = LatentKind::CUSTOM;
  s.h = h;
  s.intrinsic = D.rows() < D.cols();
  s.blocks.push_back(std::move(b));
  materialize(s);
  return s;
}

LatentStructure load_custom(const std::string& d_file, const std::string& h_file) {
  return make_custom(read_matrix_csv(d_file), read_vector(h_file));
}

void write_custom(const LatentStructure& s, const std::string& d_file, const std::string& h_file) {
  write_matrix_csv(d_file, Mat(s.D));
  write_vector(h_file, s.h);
}

LatentStructure block_diag(const std::vector<LatentStructure>& parts, const std::vector<std::string>& labels) {
  if (parts.empty() || parts.size() != labels.size())
    throw Error(ErrorCode::InvalidArgument, "block_diag needs one label per part");
  LatentStructure s;
  s.kind = LatentKind::CUSTOM;
  int r = 0, c = 0, nh = 0;
  for (const auto& p : parts) nh += p.n_noise();
  s.h.resize(nh);
  std::set<std::string> seen;
  for (size_t k = 0; k < parts.size(); ++k) {
    if (!seen.insert(labels[k]).second) throw Error(ErrorCode::InvalidArgument, "duplicate block label");
    const auto& p = parts[k];
    for (auto b : p.blocks) {
      b.row0 += r;
      b.col0 += c;
      b.label = p.blocks.size() == 1 ? labels[k] : labels[k] + "." + b.label;
      if (!b.sigma_name.empty()) b.sigma_name = "sigma_" + b.label;
      if (!b.rho_name.empty()) b.rho_name = "rho_" + b.label;
      s.blocks.push_back(std::move(b));
    }
    s.h.segment(r, p.n_noise()) = p.h;
    s.intrinsic = s.intrinsic || p.intrinsic;
    r += p.n_noise();
    c += p.n_w();
  }
  materialize(s);
  return s;
}

void check_nonsingular(const LatentStructure& s) {
  if (s.intrinsic) return;
  if (s.n_noise() != s.n_w())
    throw Error(ErrorCode::SingularStructure, "non-intrinsic D must be square");
  bool ok = true;
  if (s.n_w() <= 2000) {
    Eigen::FullPivLU<Mat> lu{Mat(s.D)};
    ok = lu.isInvertible();
  } else {
    Eigen::SparseLU<SpMat> lu;
    lu.compute(s.D);
    ok = lu.info() == Eigen::Success;
  }
  if (!ok) throw Error(ErrorCode::SingularStructure, "structure matrix D is singular");
}

std::vector<std::string> GaussianLGM::hyper_names() const {
  std::vector<std::string> n{"tau_eps"};
  n.insert(n.end(), latent.hyper_names.begin(), latent.hyper_names.end());
  return n;
}

std::vector<std::string> GaussianLGM::free_hyper_names() const {
  std::vector<std::string> out;
  for (const auto& n : hyper_names())
    if (!fixed.count(n)) out.push_back(n);
  return out;
}

HyperParams GaussianLGM::default_hyper() const {
  HyperParams hp;
  hp.tau_eps = 1.0;
  hp.theta2 = latent.theta2();
  return hp;
}

GaussianLGM assemble_lgm(Vec y, Mat B, SpMat A, Mat beta_prior_precision, LatentStructure latent,
                         std::map<std::string, PriorSpec> hyper_priors) {
  const auto N = y.size();
  if (B.rows() != N && !(B.cols() == 0))
    throw Error(ErrorCode::DimensionMismatch, "B has " + std::to_string(B.rows()) + " rows, y has " +
                                                  std::to_string(N));
  if (B.cols() == 0) B.resize(N, 0);
  if (A.rows() != N)
    throw Error(ErrorCode::DimensionMismatch, "A has " + std::to_string(A.rows()) + " rows, y has " +
                                                  std::to_string(N));
  if (A.cols() != latent.n_w())
    throw Error(ErrorCode::DimensionMismatch, "A has " + std::to_string(A.cols()) + " columns, latent has " +
                                                  std::to_string(latent.n_w()));
  if (beta_prior_precision.rows() != B.cols() || beta_prior_precision.cols() != B.cols())
    throw Error(ErrorCode::DimensionMismatch, "beta prior precision must be p x p");
  if (latent.h.size() != latent.n_noise())
    throw Error(ErrorCode::DimensionMismatch, "h length must equal rows of D");
  if (!y.allFinite() || !B.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite data");
  if (B.cols() > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(beta_prior_precision);
    if (es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, beta_prior_precision.cwiseAbs().maxCoeff()))
      throw Error(ErrorCode::InvalidArgument, "beta prior precision must be positive semi-definite");
  }
  GaussianLGM m;
  m.y = std::move(y);
  m.B = std::move(B);
  A.makeCompressed();
  m.A = std::move(A);
  m.beta_prior_precision = std::move(beta_prior_precision);
  m.latent = std::move(latent);
  const auto names = m.hyper_names();
  for (const auto& [k, v] : hyper_priors)
    if (std::find(names.begin(), names.end(), k) == names.end())
      throw Error(ErrorCode::ConfigError, "prior given for unknown hyperparameter '" + k + "'");
  m.hyper_priors = std::move(hyper_priors);
  return m;
}

void validate_hyper(const GaussianLGM& m, const HyperParams& hp) {
  if (!(hp.tau_eps > 0) || !std::isfinite(hp.tau_eps))
    throw Error(ErrorCode::InvalidArgument, "tau_eps must be positive");
  for (const auto& b : m.latent.blocks) {
    if (!b.sigma_name.empty()) {
      auto it = hp.theta2.find(b.sigma_name);
      if (it != hp.theta2.end() && !(it->second > 0))
        throw Error(ErrorCode::InvalidArgument, b.sigma_name + " must be positive");
    }
    if (!b.rho_name.empty()) {
      auto it = hp.theta2.find(b.rho_name);
      if (it != hp.theta2.end() && !(std::abs(it->second) < 1.0))
        throw Error(ErrorCode::RhoOutOfRange, b.rho_name + " must lie in (-1, 1)");
    }
  }
}

}  // namespace lgmcheck
