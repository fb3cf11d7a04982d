#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>

namespace lgmcheck {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

// Symmetric matrix in either dense or compressed-sparse storage.
class SymMatrix {
 public:
  SymMatrix() = default;
  static SymMatrix dense(Mat m);
  static SymMatrix sparse(SpMat m);

  [[nodiscard]] int order() const;
  [[nodiscard]] bool is_sparse() const { return sparse_; }
  [[nodiscard]] const Mat& dense_values() const { return dense_; }
  [[nodiscard]] const SpMat& sparse_values() const { return sp_; }
  [[nodiscard]] Mat to_dense() const;
  [[nodiscard]] double mean_diag() const;
  [[nodiscard]] double max_abs() const;

 private:
  bool sparse_ = false;
  Mat dense_;
  SpMat sp_;
};

struct CholOptions {
  bool allow_ridge = true;  // retry once with eps * mean(diag) added
  double ridge_eps = 1e-8;
  // Sparse-stored inputs are factored with a fill-reducing sparse Cholesky when
  // the order is at least this value; dense storage always uses the dense path.
  int sparse_min_order = 64;
};

// Immutable Cholesky factor P M P^T = L L^T (P = identity on the dense path).
class CholFactor {
 public:
  [[nodiscard]] int order() const { return n_; }
  [[nodiscard]] double logdet() const { return logdet_; }
  [[nodiscard]] double ridge() const { return ridge_; }
  [[nodiscard]] bool is_sparse() const { return static_cast<bool>(sp_); }

  [[nodiscard]] Mat solve(const Mat& rhs) const;
  [[nodiscard]] Vec solve(const Vec& rhs) const;
  // Maps iid N(0,1) columns z to draws with covariance M^{-1}.
  [[nodiscard]] Mat sample_transform(const Mat& z) const;
  // L L^T mapped back to the original ordering (testing aid).
  [[nodiscard]] Mat reconstruct() const;
  [[nodiscard]] Mat lower() const;

 private:
  friend CholFactor cholesky(const SymMatrix& m, const CholOptions& opt);
  using SpLLT = Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>;
  int n_ = 0;
  double logdet_ = 0.0;
  double ridge_ = 0.0;
  std::shared_ptr<const Eigen::LLT<Mat>> dense_;
  std::shared_ptr<const SpLLT> sp_;
};

[[nodiscard]] CholFactor cholesky(const SymMatrix& m, const CholOptions& opt = {});
[[nodiscard]] Mat solve(const CholFactor& f, const Mat& rhs);
// left * M^{-1} * right^T
[[nodiscard]] Mat posterior_cov_block(const CholFactor& f, const Mat& left, const Mat& right);
[[nodiscard]] Mat posterior_cov_block(const CholFactor& f, const SpMat& left, const SpMat& right);

[[nodiscard]] double log_det_dense(const Mat& m);

}  // namespace lgmcheck
