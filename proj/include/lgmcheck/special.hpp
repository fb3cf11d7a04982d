#pragma once

namespace lgmcheck {

// log K_nu(x) and log(e^x K_nu(x)) for nu >= 0 (nu < 0 uses K_{-nu} = K_nu), x > 0.
[[nodiscard]] double log_bessel_k(double nu, double x);
[[nodiscard]] double log_bessel_k_scaled(double nu, double x);
[[nodiscard]] double bessel_k(double nu, double x);

[[nodiscard]] double norm_cdf(double z);
[[nodiscard]] double norm_logpdf(double x, double var);

}  // namespace lgmcheck
