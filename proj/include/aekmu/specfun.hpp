#pragma once

#include <complex>

namespace aekmu::specfun {

using Complex = std::complex<double>;

/// Analytic continuation of log Gamma(z) (the branch that is real on the
/// positive real axis and continuous along any vertical line with Re z > 0).
/// Relative accuracy ~1e-13 for |z| <= 1e3.
/// Throws PoleError within 1e-14 of a non-positive integer.
Complex log_gamma(Complex z);

/// 1/Gamma(x) for real x, zero at the poles, sign handled.
double rgamma(double x);

/// Modified Bessel function of the first kind, nu > -1, x >= 0.
/// Power series below the switch point, large-argument asymptotic expansion
/// above; relative accuracy ~1e-11. Overflows past x ~ 705: use log_bessel_i.
double bessel_i(double nu, double x);

/// log I_nu(x) for x >= 0 (log-domain variant for large arguments).
double log_bessel_i(double nu, double x);

/// h(nu, c, v) = log of I_nu(c*sqrt(v)) / (c*sqrt(v)/2)^nu, an entire function
/// of v; the natural building block of the envelope convolution integrand.
double log_bessel_i_ratio(double nu, double c, double v);

/// Generalized Laguerre polynomial L_n^a(x), three-term recurrence.
double laguerre(int n, double a, double x);

/// Regularized confluent limit 0F1~(; b; z) = sum z^k / (k! Gamma(b+k)),
/// entire in both b and z.
double hyp0f1_regularized(double b, double z);

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x)/Gamma(a), a > 0.
double gamma_q(double a, double x);

/// Regularized lower incomplete gamma P(a, x) = 1 - Q(a, x).
double gamma_p(double a, double x);

/// Regularized lower incomplete gamma of complex order: P(a, x) for Re a > 0,
/// real x >= 0. Series for x < Re(a)+1, continued fraction otherwise.
Complex gamma_p_complex(Complex a, double x);

} // namespace aekmu::specfun
