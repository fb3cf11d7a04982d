#include "lgmcheck/special.hpp"

#include <cmath>
#include <limits>

#include "lgmcheck/error.hpp"

namespace lgmcheck {

namespace {

constexpr double kPi = 3.141592653589793238;
constexpr double kEps = 1e-17;
constexpr int kMaxIt = 100000;

// Taylor coefficients of 1/Gamma(z) about 0, orders 2..12.
constexpr double kRGamma[] = {0.57721566490153286061,  -0.65587807152025388108, -0.042002635034095235529,
                              0.1665386113822914895,   -0.042197734555544336748, -0.0096219715278769735621,
                              0.0072189432466630995424, -0.0011651675918590651121, -0.00021524167411495097282,
                              0.00012805028238811618615, -0.000020134854780788238656};

// gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu), gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2
void temme_gammas(double mu, double& gam1, double& gam2, double& gampl, double& gammi) {
  gampl = 1.0 / std::tgamma(1.0 + mu);
  gammi = 1.0 / std::tgamma(1.0 - mu);
  gam2 = 0.5 * (gammi + gampl);
  if (std::abs(mu) < 0.1) {
    const double m2 = mu * mu;
    double s = 0.0, pw = 1.0;
    for (int k = 0; k <= 10; k += 2) {
      s += kRGamma[k] * pw;
      pw *= m2;
    }
    gam1 = -s;
  } else {
    gam1 = (gammi - gampl) / (2.0 * mu);
  }
}

// Scaled K_mu(x) e^x and K_{mu+1}(x) e^x for |mu| <= 1/2.
void k_pair_scaled(double mu, double x, double& kmu, double& k1) {
  const double xi = 1.0 / x, xi2 = 2.0 * xi, mu2 = mu * mu;
  if (x < 2.0) {
    const double x2 = 0.5 * x, pimu = kPi * mu;
    const double fact = std::abs(pimu) < 1e-15 ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < 1e-15 ? 1.0 : std::sinh(e) / e;
    double gam1, gam2, gampl, gammi;
    temme_gammas(mu, gam1, gam2, gampl, gammi);
    double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / gampl;
    double q = 0.5 / (e * gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    for (int i = 1; i <= kMaxIt; ++i) {
      ff = (i * ff + p + q) / (i * static_cast<double>(i) - mu2);
      c *= d / i;
      p /= (i - mu);
      q /= (i + mu);
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - i * ff);
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    const double ex = std::exp(x);
    kmu = sum * ex;
    k1 = sum1 * xi2 * ex;
    return;
  }
  // Steed's continued fraction (CF2) evaluated in scaled form.
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25 - mu2;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= kMaxIt; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  h = a1 * h;
  kmu = std::sqrt(kPi / (2.0 * x)) / s;
  k1 = kmu * (mu + x + 0.5 - h) * xi;
}

}  // namespace

double log_bessel_k_scaled(double nu, double x) {
  if (!(x > 0) || !std::isfinite(nu))
    throw Error(ErrorCode::InvalidArgument, "Bessel K needs x > 0 and finite order");
  if (std::isinf(x)) return -std::numeric_limits<double>::infinity();
  nu = std::abs(nu);
  const int nl = static_cast<int>(nu + 0.5);
  const double mu = nu - nl;
  double kmu, k1;
  k_pair_scaled(mu, x, kmu, k1);
  double logscale = 0.0;
  const double xi2 = 2.0 / x;
  for (int i = 1; i <= nl; ++i) {
    const double next = (mu + i) * xi2 * k1 + kmu;
    kmu = k1;
    k1 = next;
    if (k1 > 1e250) {
      kmu *= 1e-250;
      k1 *= 1e-250;
      logscale += 250.0 * std::log(10.0);
    }
  }
  return std::log(kmu) + logscale;
}

double log_bessel_k(double nu, double x) { return log_bessel_k_scaled(nu, x) - x; }

double bessel_k(double nu, double x) { return std::exp(log_bessel_k(nu, x)); }

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double norm_logpdf(double x, double var) { return -0.5 * std::log(2.0 * kPi * var) - 0.5 * x * x / var; }

}  // namespace lgmcheck
