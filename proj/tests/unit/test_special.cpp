#include <doctest.h>

#include <cmath>

#include "lgmcheck/special.hpp"
#include "oracles.hpp"

using namespace lgmcheck;

TEST_CASE("bessel K against the integral representation at 100 points") {
  const double orders[] = {0.0, 0.3, 0.5, 0.999, 1.0, 1.5, 2.0, 2.501, 3.7, 5.0};
  const double args[] = {0.003, 0.04, 0.3, 0.9, 1.7, 2.2, 4.0, 9.5, 25.0, 60.0};
  double worst = 0.0;
  for (double nu : orders)
    for (double x : args) {
      const double ref = std::log(oracle::bessel_k_scaled(nu, x));
      const double got = log_bessel_k_scaled(nu, x);
      // relative error of K itself
      const double rel = std::abs(std::expm1(got - ref));
      worst = std::max(worst, rel);
      CHECK_MESSAGE(rel < 1e-10, "nu=" << nu << " x=" << x);
    }
  MESSAGE("worst relative error " << worst);
}

TEST_CASE("bessel K closed forms and symmetry") {
  // K_{1/2}(x) = sqrt(pi / (2x)) e^{-x}
  for (double x : {0.01, 0.5, 3.0, 40.0})
    CHECK(bessel_k(0.5, x) == doctest::Approx(std::sqrt(M_PI / (2 * x)) * std::exp(-x)).epsilon(1e-13));
  // K_{3/2}(x) = sqrt(pi / (2x)) e^{-x} (1 + 1/x)
  for (double x : {0.01, 0.5, 3.0})
    CHECK(bessel_k(1.5, x) ==
          doctest::Approx(std::sqrt(M_PI / (2 * x)) * std::exp(-x) * (1 + 1 / x)).epsilon(1e-13));
  CHECK(bessel_k(-1.3, 0.8) == doctest::Approx(bessel_k(1.3, 0.8)).epsilon(1e-15));
  CHECK(log_bessel_k(1.0, 700.0) == doctest::Approx(log_bessel_k_scaled(1.0, 700.0) - 700.0));
  CHECK(std::isfinite(log_bessel_k(1.0, 1e4)));
}

TEST_CASE("normal helpers") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5));
  CHECK(norm_cdf(-1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
  // deep tail stays relative-accurate (Mills ratio gives 5.73e-300 at -37)
  CHECK(norm_cdf(-37.0) == doctest::Approx(5.725571222524e-300).epsilon(1e-6));
  CHECK(norm_logpdf(1.0, 4.0) == doctest::Approx(-0.5 * std::log(8 * M_PI) - 0.125));
}
