#pragma once

// Special functions and distribution tails. Continued fractions use the
// modified Lentz algorithm; target absolute error 1e-10 unless noted.

namespace aviary::stats {

// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double incomplete_beta(double a, double b, double x);
// Regularized lower and upper incomplete gamma P(a, x), Q(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

double normal_cdf(double z);
double normal_sf(double z);
// Inverse of normal_cdf for p in (0, 1) (Wichura's AS 241, ~1e-16 relative).
double normal_quantile(double p);

double t_cdf(double t, double df);
// P(|T| > |t|)
double t_sf_two_sided(double t, double df);

double f_cdf(double f, double df1, double df2);
double f_sf(double f, double df1, double df2);

double chi2_cdf(double x, double df);
double chi2_sf(double x, double df);

// Upper tail P(Q > q) of the studentized range of k normal means with df
// error degrees of freedom, by Gauss-Legendre double integration; absolute
// error <= 1e-6. Throws ValidationError on non-finite or out-of-domain input.
double srange_sf(double q, int k, double df);

}  // namespace aviary::stats
