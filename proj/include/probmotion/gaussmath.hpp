#pragma once

// Standard-normal and chi-distribution primitives used by sampling,
// likelihoods, and calibration.

namespace probmotion::gauss {

inline constexpr double ln_2pi = 1.8378770664093454836;  // log(2*pi)

double normal_pdf(double x);
double log_normal_pdf(double x);  // -x^2/2 - log(2*pi)/2

// Phi(x), accurate in both tails (computed from erfc).
double normal_cdf(double x);

// Phi^{-1}(p) for p in (0,1): rational initial guess plus Halley refinement,
// accurate to ~1e-15 in the central range. Throws Error(config) outside (0,1).
double normal_quantile(double p);

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

// CDF of the chi distribution with `dof` degrees of freedom evaluated at
// radius r: the probability that a standard normal vector of dimension `dof`
// has Euclidean norm <= r.
double chi_cdf(double r, double dof);

}  // namespace probmotion::gauss
