#pragma once

// Univariate and bivariate normal / Student t distribution functions.
// Everything here is a pure function and safe to call from any thread.

namespace copmarkov {

double norm_pdf(double x);
/// Standard normal cdf. Saturates to 0 / 1 for |x| > 38.
double norm_cdf(double x);
/// Inverse of norm_cdf; p must lie in (0, 1).
double norm_quantile(double p);

double t_pdf(double x, double nu);
double t_cdf(double x, double nu);
double t_quantile(double p, double nu);

/// P(X <= x, Y <= y) for a standard bivariate normal with correlation rho.
///
/// Uses the Drezner-Wesolowsky single-integral reduction evaluated with
/// 6/12/20 point Gauss-Legendre rules (Genz's BVND). Symmetric in (x, y)
/// bit for bit; |rho| == 1 gives the Frechet bounds.
double bvn_cdf(double x, double y, double rho);

/// P(X <= x, Y <= y) for a bivariate Student t with nu degrees of freedom.
/// Integer nu uses the Dunnett-Sobel finite sums, anything else the
/// one-dimensional conditional integral.
double bvt_cdf(double x, double y, double rho, double nu);

/// First-order Debye function (1/x) * integral_0^x t / (e^t - 1) dt.
/// x == 0 is rejected; the limit there is 1.
double debye1(double x);

namespace detail {

double bvt_cdf_integer(double x, double y, double rho, int nu);
double bvt_cdf_quadrature(double x, double y, double rho, double nu);

}  // namespace detail

}  // namespace copmarkov
