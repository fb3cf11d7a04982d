#pragma once
// Independent reference computations used only by the tests.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// e^x K_nu(x) = int_0^inf exp(-x (cosh t - 1)) cosh(nu t) dt, trapezoid on a doubly
// exponentially decaying integrand (spectrally accurate).
inline double bessel_k_scaled(double nu, double x) {
  const double step = 1.0 / 128.0;
  double sum = 0.5, peak = 1.0, prev = 1.0;
  for (int k = 1;; ++k) {
    const double t = k * step;
    const double c = -x * (std::cosh(t) - 1.0);
    const double term = 0.5 * (std::exp(c + std::abs(nu) * t) + std::exp(c - std::abs(nu) * t));
    sum += term;
    peak = std::max(peak, term);
    if (term < prev && term < 1e-22 * peak) break;
    prev = term;
  }
  return sum * step;
}

// Gauss-Hermite rule for weight exp(-x^2) via Golub-Welsch.
inline std::pair<Vec, Vec> gauss_hermite(int n) {
  Mat J = Mat::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(i / 2.0);
  Eigen::SelfAdjointEigenSolver<Mat> es(J);
  Vec w = es.eigenvectors().row(0).transpose().array().square() * std::sqrt(M_PI);
  return {es.eigenvalues(), w};
}

// E f(X) for X ~ N(mean, var).
inline double normal_expect(const std::function<double(double)>& f, double mean, double var, int n = 40) {
  auto [x, w] = gauss_hermite(n);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += w(i) * f(mean + std::sqrt(2.0 * var) * x(i));
  return s / std::sqrt(M_PI);
}

// E f(X, Y) for a bivariate normal.
inline double normal_expect2(const std::function<double(double, double)>& f, const Eigen::Vector2d& mean,
                             const Eigen::Matrix2d& cov, int n = 30) {
  auto [x, w] = gauss_hermite(n);
  Eigen::Matrix2d L = Eigen::Matrix2d::Zero();
  L(0, 0) = std::sqrt(cov(0, 0));
  if (L(0, 0) > 0) L(1, 0) = cov(1, 0) / L(0, 0);
  L(1, 1) = std::sqrt(std::max(0.0, cov(1, 1) - L(1, 0) * L(1, 0)));
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Eigen::Vector2d z(std::sqrt(2.0) * x(i), std::sqrt(2.0) * x(j));
      const Eigen::Vector2d v = mean + L * z;
      s += w(i) * w(j) * f(v(0), v(1));
    }
  return s / M_PI;
}

// Composite trapezoid on [a, b] with n intervals.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) s += f(a + i * h);
  return s * h;
}

// log N(y; mu, S) via a dense LDLT-free Cholesky.
inline double mvn_logpdf(const Vec& y, const Vec& mu, const Mat& S) {
  Eigen::LLT<Mat> llt(S);
  const Vec r = y - mu;
  const Vec z = llt.matrixL().solve(r);
  const double logdet = 2.0 * Mat(llt.matrixL()).diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(y.size()) * std::log(2.0 * M_PI) + logdet + z.squaredNorm());
}

// Sample mean and standard error.
inline std::pair<double, double> mean_se(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  s /= static_cast<double>(v.size() - 1);
  return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

}  // namespace oracle
