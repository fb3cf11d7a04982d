#include <doctest.h>

#include "lgmcheck/linalg.hpp"
#include "lgmcheck/rng.hpp"
#include "test_util.hpp"

using namespace lgmcheck;

namespace {

Mat random_spd(int n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  Mat X(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) X(i, j) = rng.normal();
  return X * X.transpose() + n * Mat::Identity(n, n);
}

// Banded SPD matrix stored sparse (large enough for the sparse path).
SpMat banded(int n) {
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 4.0 + 0.01 * i);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, -1.0);
      t.emplace_back(i + 1, i, -1.0);
    }
    if (i + 7 < n) {
      t.emplace_back(i, i + 7, 0.5);
      t.emplace_back(i + 7, i, 0.5);
    }
  }
  SpMat m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

TEST_CASE("dense cholesky reconstructs and solves") {
  const Mat M = random_spd(8, 3);
  const CholFactor f = cholesky(SymMatrix::dense(M));
  CHECK_FALSE(f.is_sparse());
  CHECK((f.reconstruct() - M).cwiseAbs().maxCoeff() < 1e-10);
  const Vec b = Vec::LinSpaced(8, -1, 2);
  CHECK((M * f.solve(b) - b).norm() < 1e-10);
  CHECK(f.logdet() == doctest::Approx(std::log(M.determinant())).epsilon(1e-12));
  CHECK(f.ridge() == 0.0);
}

TEST_CASE("sparse path agrees with dense path") {
  const SpMat S = banded(120);
  const CholFactor fs = cholesky(SymMatrix::sparse(S));
  const CholFactor fd = cholesky(SymMatrix::dense(Mat(S)));
  CHECK(fs.is_sparse());
  CHECK(fs.logdet() == doctest::Approx(fd.logdet()).epsilon(1e-12));
  Mat rhs = Mat::Identity(120, 3);
  CHECK((fs.solve(rhs) - fd.solve(rhs)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((fs.reconstruct() - Mat(S)).cwiseAbs().maxCoeff() < 1e-10);
  // small sparse inputs use the dense factorization
  CHECK_FALSE(cholesky(SymMatrix::sparse(banded(20))).is_sparse());
}

TEST_CASE("sample_transform has covariance M^{-1}") {
  const Mat M = random_spd(4, 5);
  const CholFactor f = cholesky(SymMatrix::dense(M));
  // the map is linear: its outer product must be M^{-1}
  const Mat T = f.sample_transform(Mat::Identity(4, 4));
  CHECK((T * T.transpose() - M.inverse()).cwiseAbs().maxCoeff() < 1e-12);
  const SpMat S = banded(80);
  const CholFactor g = cholesky(SymMatrix::sparse(S));
  const Mat Ts = g.sample_transform(Mat::Identity(80, 80));
  CHECK((Ts * Ts.transpose() - Mat(S).inverse()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ridge retry on a singular matrix") {
  Mat M(3, 3);
  M << 1, -1, 0, -1, 2, -1, 0, -1, 1;  // RW1 precision, rank 2
  const CholFactor f = cholesky(SymMatrix::dense(M));
  CHECK(f.ridge() > 0.0);
  CHECK(f.ridge() == doctest::Approx(1e-8 * M.diagonal().mean()));
  CholOptions strict;
  strict.allow_ridge = false;
  CHECK(THROWN_CODE(cholesky(SymMatrix::dense(M), strict)) == "NotPositiveDefinite");
  Mat neg = -Mat::Identity(3, 3);
  CHECK(THROWN_CODE(cholesky(SymMatrix::dense(neg))) == "NotPositiveDefinite");
}

TEST_CASE("input validation") {
  Mat A(2, 3);
  A.setZero();
  CHECK(THROWN_CODE(SymMatrix::dense(A)) == "DimensionMismatch");
  Mat B(2, 2);
  B << 1, 0.5, 0.4, 1;
  CHECK(THROWN_CODE(SymMatrix::dense(B)) == "InvalidArgument");
  const CholFactor f = cholesky(SymMatrix::dense(Mat::Identity(3, 3)));
  CHECK(THROWN_CODE(f.solve(Vec(Vec::Ones(4)))) == "DimensionMismatch");
}

TEST_CASE("posterior_cov_block") {
  const Mat M = random_spd(6, 9);
  const CholFactor f = cholesky(SymMatrix::dense(M));
  Mat L(2, 6), R(3, 6);
  RngStream rng(1, 1);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 6; ++j) L(i, j) = rng.normal();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 6; ++j) R(i, j) = rng.normal();
  const Mat expect = L * M.inverse() * R.transpose();
  CHECK((posterior_cov_block(f, L, R) - expect).cwiseAbs().maxCoeff() < 1e-12);
  const SpMat Ls = L.sparseView(), Rs = R.sparseView();
  CHECK((posterior_cov_block(f, Ls, Rs) - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("log_det_dense") {
  const Mat M = random_spd(5, 11);
  CHECK(log_det_dense(M) == doctest::Approx(std::log(M.determinant())).epsilon(1e-12));
}
