#include "lgmcheck/linalg.hpp"

#include <cmath>
#include <string>

#include "lgmcheck/error.hpp"

namespace lgmcheck {

namespace {

constexpr double kPivotFloor = 1e-13;

void check_symmetric(const Mat& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
  if (!m.allFinite()) throw Error(ErrorCode::InvalidArgument, "matrix has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorCode::InvalidArgument, "matrix is not symmetric");
}

void check_symmetric(const SpMat& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
  double scale = 1.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      if (!std::isfinite(it.value()))
        throw Error(ErrorCode::InvalidArgument, "matrix has non-finite entries");
      scale = std::max(scale, std::abs(it.value()));
    }
  SpMat diff = m - SpMat(m.transpose());
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SpMat::InnerIterator it(diff, k); it; ++it)
      if (std::abs(it.value()) > 1e-12 * scale)
        throw Error(ErrorCode::InvalidArgument, "matrix is not symmetric");
}

}  // namespace

SymMatrix SymMatrix::dense(Mat m) {
  check_symmetric(m);
  SymMatrix s;
  s.dense_ = std::move(m);
  return s;
}

SymMatrix SymMatrix::sparse(SpMat m) {
  check_symmetric(m);
  SymMatrix s;
  s.sparse_ = true;
  m.makeCompressed();
  s.sp_ = std::move(m);
  return s;
}

int SymMatrix::order() const { return static_cast<int>(sparse_ ? sp_.rows() : dense_.rows()); }

Mat SymMatrix::to_dense() const { return sparse_ ? Mat(sp_) : dense_; }

double SymMatrix::mean_diag() const {
  const int n = order();
  if (n == 0) return 0.0;
  return (sparse_ ? sp_.diagonal().sum() : dense_.diagonal().sum()) / n;
}

double SymMatrix::max_abs() const {
  if (order() == 0) return 0.0;
  if (!sparse_) return dense_.cwiseAbs().maxCoeff();
  double m = 0.0;
  for (int k = 0; k < sp_.outerSize(); ++k)
    for (SpMat::InnerIterator it(sp_, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

CholFactor cholesky(const SymMatrix& m, const CholOptions& opt) {
  CholFactor f;
  f.n_ = m.order();
  if (f.n_ == 0) {
    f.dense_ = std::make_shared<Eigen::LLT<Mat>>(Mat(0, 0));
    return f;
  }
  const double md = m.mean_diag();
  const double floor = kPivotFloor * std::max(md, 1e-300);
  const bool use_sparse = m.is_sparse() && f.n_ >= opt.sparse_min_order;

  auto attempt = [&](double ridge) -> bool {
    if (use_sparse) {
      SpMat a = m.sparse_values();
      if (ridge > 0) {
        SpMat eye(f.n_, f.n_);
        eye.setIdentity();
        a += ridge * eye;
      }
      auto llt = std::make_shared<CholFactor::SpLLT>(a);
      if (llt->info() != Eigen::Success) return false;
      Vec d = llt->matrixL().nestedExpression().diagonal();
      if (!d.allFinite() || d.cwiseAbs2().minCoeff() <= floor) return false;
      f.logdet_ = 2.0 * d.array().log().sum();
      f.sp_ = llt;
      f.dense_.reset();
    } else {
      Mat a = m.to_dense();
      if (ridge > 0) a.diagonal().array() += ridge;
      auto llt = std::make_shared<Eigen::LLT<Mat>>(a);
      if (llt->info() != Eigen::Success) return false;
      Vec d = llt->matrixLLT().diagonal();
      if (!d.allFinite() || d.cwiseAbs2().minCoeff() <= floor) return false;
      f.logdet_ = 2.0 * d.array().log().sum();
      f.dense_ = llt;
      f.sp_.reset();
    }
    f.ridge_ = ridge;
    return true;
  };

  if (attempt(0.0)) return f;
  if (opt.allow_ridge && md > 0 && attempt(opt.ridge_eps * md)) return f;
  throw Error(ErrorCode::NotPositiveDefinite,
              "Cholesky factorization failed for matrix of order " + std::to_string(f.n_));
}

Mat CholFactor::solve(const Mat& rhs) const {
  if (rhs.rows() != n_)
    throw Error(ErrorCode::DimensionMismatch, "solve: rhs has " + std::to_string(rhs.rows()) +
                                                  " rows, factor order " + std::to_string(n_));
  if (n_ == 0) return Mat(0, rhs.cols());
  if (sp_) return sp_->solve(rhs);
  return dense_->solve(rhs);
}

Vec CholFactor::solve(const Vec& rhs) const {
  Mat r = rhs;
  return solve(r).col(0);
}

Mat CholFactor::sample_transform(const Mat& z) const {
  if (z.rows() != n_) throw Error(ErrorCode::DimensionMismatch, "sample_transform: bad rows");
  if (n_ == 0) return Mat(0, z.cols());
  if (sp_) {
    Mat t = sp_->matrixU().solve(z);
    return sp_->permutationPinv() * t;
  }
  return dense_->matrixU().solve(z);
}

Mat CholFactor::lower() const {
  if (sp_) return Mat(sp_->matrixL());
  if (n_ == 0) return Mat(0, 0);
  return Mat(dense_->matrixL());
}

Mat CholFactor::reconstruct() const {
  Mat l = lower();
  Mat llt = l * l.transpose();
  if (sp_) {
    Mat out = sp_->permutationPinv() * llt * sp_->permutationP();
    out.diagonal().array() -= ridge_;
    return out;
  }
  llt.diagonal().array() -= ridge_;
  return llt;
}

Mat solve(const CholFactor& f, const Mat& rhs) { return f.solve(rhs); }

Mat posterior_cov_block(const CholFactor& f, const Mat& left, const Mat& right) {
  if (left.cols() != f.order() || right.cols() != f.order())
    throw Error(ErrorCode::DimensionMismatch, "posterior_cov_block: column count must equal factor order");
  Mat x = f.solve(Mat(right.transpose()));
  return left * x;
}

Mat posterior_cov_block(const CholFactor& f, const SpMat& left, const SpMat& right) {
  if (left.cols() != f.order() || right.cols() != f.order())
    throw Error(ErrorCode::DimensionMismatch, "posterior_cov_block: column count must equal factor order");
  Mat x = f.solve(Mat(SpMat(right.transpose())));
  return left * x;
}

double log_det_dense(const Mat& m) {
  Eigen::PartialPivLU<Mat> lu(m);
  return lu.matrixLU().diagonal().array().abs().log().sum();
}

}  // namespace lgmcheck
