#include "copmarkov/special_functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "copmarkov/error.hpp"

namespace copmarkov {
namespace {

constexpr double kSaturation = 38.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_nu(double nu) {
    if (!(nu > 0.0) || std::isnan(nu)) throw DomainError("degrees of freedom must be positive");
}

void require_correlation(double rho) {
    if (!(std::abs(rho) <= 1.0)) throw DomainError("correlation must lie in [-1, 1]");
}

// Gauss-Legendre abscissae (negative half) and weights for n = 6, 12, 20.
constexpr std::array<std::array<double, 10>, 3> kGlWeight{{
    {0.1713244923791705, 0.3607615730481384, 0.4679139345726904},
    {0.4717533638651177e-01, 0.1069393259953183, 0.1600783285433464, 0.2031674267230659,
     0.2334925365383547, 0.2491470458134029},
    {0.1761400713915212e-01, 0.4060142980038694e-01, 0.6267204833410906e-01,
     0.8327674157670475e-01, 0.1019301198172404, 0.1181945319615184, 0.1316886384491766,
     0.1420961093183821, 0.1491729864726037, 0.1527533871307259},
}};
constexpr std::array<std::array<double, 10>, 3> kGlAbscissa{{
    {-0.9324695142031522, -0.6612093864662647, -0.2386191860831970},
    {-0.9815606342467191, -0.9041172563704750, -0.7699026741943050, -0.5873179542866171,
     -0.3678314989981802, -0.1252334085114692},
    {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259, -0.8391169718222188,
     -0.7463319064601508, -0.6360536807265150, -0.5108670019508271, -0.3737060887154196,
     -0.2277858511416451, -0.7652652113349733e-01},
}};

// Upper orthant probability P(X > dh, Y > dk); Genz's BVND.
double bvn_upper(double dh, double dk, double r) {
    int ng = 0;
    int lg = 3;
    if (std::abs(r) < 0.3) {
        ng = 0;
        lg = 3;
    } else if (std::abs(r) < 0.75) {
        ng = 1;
        lg = 6;
    } else {
        ng = 2;
        lg = 10;
    }
    const auto& w = kGlWeight[ng];
    const auto& x = kGlAbscissa[ng];

    double h = dh;
    double k = dk;
    double hk = h * k;
    double bvn = 0.0;
    if (std::abs(r) < 0.925) {
        const double hs = (h * h + k * k) / 2.0;
        const double asr = std::asin(r);
        for (int i = 0; i < lg; ++i) {
            double sn = std::sin(asr * (x[i] + 1.0) / 2.0);
            bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            sn = std::sin(asr * (-x[i] + 1.0) / 2.0);
            bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
        return bvn * asr / (2.0 * kTwoPi) + norm_cdf(-h) * norm_cdf(-k);
    }

    if (r < 0.0) {
        k = -k;
        hk = -hk;
    }
    if (std::abs(r) < 1.0) {
        const double as = (1.0 - r) * (1.0 + r);
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 16.0;
        bvn = a * std::exp(-(bs / as + hk) / 2.0) *
              (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
        if (hk > -160.0) {
            const double b = std::sqrt(bs);
            bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * norm_cdf(-b / a) * b *
                   (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (int i = 0; i < lg; ++i) {
            double xs = (a * (x[i] + 1.0)) * (a * (x[i] + 1.0));
            double rs = std::sqrt(1.0 - xs);
            bvn += a * w[i] *
                   (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs -
                    std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
            xs = as * (-x[i] + 1.0) * (-x[i] + 1.0) / 4.0;
            rs = std::sqrt(1.0 - xs);
            bvn += a * w[i] * std::exp(-(bs / xs + hk) / 2.0) *
                   (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                    (1.0 + c * xs * (1.0 + d * xs)));
        }
        bvn = -bvn / kTwoPi;
    }
    if (r > 0.0) bvn += norm_cdf(-std::max(h, k));
    if (r < 0.0) bvn = -bvn + std::max(0.0, norm_cdf(-h) - norm_cdf(-k));
    return bvn;
}

// Shared argument handling for the bivariate cdfs: infinities, perfect
// (anti)dependence and argument ordering. Returns true when `out` is final.
template <class Marginal>
bool bivariate_edge_cases(double& x, double& y, double rho, Marginal marginal, double& out) {
    if (x > y) std::swap(x, y);
    if (x == -std::numeric_limits<double>::infinity()) {
        out = 0.0;
        return true;
    }
    if (x == std::numeric_limits<double>::infinity()) {
        out = 1.0;
        return true;
    }
    if (y == std::numeric_limits<double>::infinity()) {
        out = marginal(x);
        return true;
    }
    if (rho == 1.0) {
        out = marginal(x);
        return true;
    }
    if (rho == -1.0) {
        out = std::max(0.0, marginal(x) + marginal(y) - 1.0);
        return true;
    }
    return false;
}

double clamp_to_frechet(double value, double fx, double fy) {
    const double lower = std::max(0.0, fx + fy - 1.0);
    const double upper = std::min(fx, fy);
    return std::clamp(value, lower, upper);
}

double debye_integrand(double t) {
    if (t == 0.0) return 1.0;
    return t / std::expm1(t);
}

double simpson_step(double a, double fa, double b, double fb, double m, double fm, double whole,
                    double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = debye_integrand(lm);
    const double frm = debye_integrand(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
           simpson_step(m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

// Closed-form finite sum for integer degrees of freedom (Genz's STUDNT).
double t_cdf_integer(double t, int nu) {
    const double dnu = static_cast<double>(nu);
    if (nu == 1) return 0.5 + std::atan(t) / std::numbers::pi;
    if (nu == 2) return 0.5 + 0.5 * t / std::sqrt(2.0 + t * t);
    const double tt = t * t;
    const double cssthe = 1.0 / (1.0 + tt / dnu);
    double polyn = 1.0;
    for (int j = nu - 2; j >= 2; j -= 2) {
        polyn = 1.0 + (j - 1) * cssthe * polyn / j;
    }
    if (nu % 2 == 1) {
        const double ts = t / std::sqrt(dnu);
        return 0.5 + (std::atan(ts) + ts * cssthe * polyn) / std::numbers::pi;
    }
    return 0.5 + 0.5 * t / std::sqrt(dnu + tt) * polyn;
}

}  // namespace

double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi);
}

double norm_cdf(double x) {
    if (std::isnan(x)) throw DomainError("norm_cdf: NaN argument");
    if (x < -kSaturation) return 0.0;
    if (x > kSaturation) return 1.0;
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("norm_quantile: p must lie in (0, 1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double t_pdf(double x, double nu) {
    require_nu(nu);
    return boost::math::pdf(boost::math::students_t_distribution<double>(nu), x);
}

double t_cdf(double x, double nu) {
    require_nu(nu);
    if (std::isnan(x)) throw DomainError("t_cdf: NaN argument");
    if (std::isinf(x)) return x < 0.0 ? 0.0 : 1.0;
    if (nu <= 200.0 && std::round(nu) == nu) {
        const double p = t_cdf_integer(x, static_cast<int>(nu));
        // The finite sum loses relative accuracy in the tails.
        if (p > 1.0e-4 && p < 1.0 - 1.0e-4) return p;
    }
    return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x);
}

namespace {

// Hill (1970) starting value for the upper quantile at tail probability
// half_p, refined with second-order Taylor steps (Hill 1981).
double t_upper_quantile(double half_p, double nu) {
    const double two_p = 2.0 * half_p;
    const double a = 1.0 / (nu - 0.5);
    const double b = 48.0 / (a * a);
    double c = ((20700.0 * a / b - 98.0) * a - 16.0) * a + 96.36;
    const double d = ((94.5 / (b + c) - 3.0) / b + 1.0) * std::sqrt(a * std::numbers::pi / 2.0) * nu;
    double y = std::pow(d * two_p, 2.0 / nu);
    double q;
    if (y > 0.05 + a) {
        const double x = norm_quantile(half_p);
        y = x * x;
        if (nu < 5.0) c += 0.3 * (nu - 4.5) * (x + 0.6);
        c = (((0.05 * d * x - 5.0) * x - 7.0) * x - 2.0) * x + b + c;
        y = (((((0.4 * y + 6.3) * y + 36.0) * y + 94.5) / c - y - 3.0) / b + 1.0) * x;
        y = std::expm1(a * y * y);
        q = std::sqrt(nu * y);
    } else {
        y = ((1.0 / (((nu + 6.0) / (nu * y) - 0.089 * d - 0.822) * (nu + 2.0) * 3.0) + 0.5 / (nu + 4.0)) * y -
             1.0) * (nu + 1.0) / (nu + 2.0) +
            1.0 / y;
        q = std::sqrt(nu * y);
    }
    const double log_norm =
        std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi);
    for (int iter = 0; iter < 10; ++iter) {
        const double density = std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(q * q / nu));
        if (!(density > 0.0)) break;
        const double step = (t_cdf(-q, nu) - half_p) / density;
        if (!std::isfinite(step)) break;
        q += step * (1.0 + step * (q * (nu + 1.0) / (2.0 * (q * q + nu))));
        if (std::abs(step) <= 1.0e-14 * std::abs(q)) break;
    }
    return q;
}

}  // namespace

double t_quantile(double p, double nu) {
    require_nu(nu);
    if (!(p > 0.0 && p < 1.0)) throw DomainError("t_quantile: p must lie in (0, 1)");
    if (nu < 1.0 || p == 0.5) return boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
    // Work with the smaller tail probability; 1 - p is exact for p >= 1/2.
    const double tail = std::min(p, 1.0 - p);
    double q;
    if (nu == 1.0) {
        q = 1.0 / std::tan(std::numbers::pi * tail);
    } else if (nu == 2.0) {
        q = (1.0 - 2.0 * tail) / std::sqrt(2.0 * tail * (1.0 - tail));
    } else {
        q = t_upper_quantile(tail, nu);
    }
    return p < 0.5 ? -q : q;
}


double bvn_cdf(double x, double y, double rho) {
    require_correlation(rho);
    if (std::isnan(x) || std::isnan(y)) throw DomainError("bvn_cdf: NaN argument");
    if (x > kSaturation) x = std::numeric_limits<double>::infinity();
    if (y > kSaturation) y = std::numeric_limits<double>::infinity();
    if (x < -kSaturation) x = -std::numeric_limits<double>::infinity();
    if (y < -kSaturation) y = -std::numeric_limits<double>::infinity();
    double out = 0.0;
    if (bivariate_edge_cases(x, y, rho, norm_cdf, out)) return out;
    return clamp_to_frechet(bvn_upper(-x, -y, rho), norm_cdf(x), norm_cdf(y));
}

double bvt_cdf(double x, double y, double rho, double nu) {
    require_correlation(rho);
    require_nu(nu);
    if (std::isnan(x) || std::isnan(y)) throw DomainError("bvt_cdf: NaN argument");
    double out = 0.0;
    auto marginal = [nu](double v) { return t_cdf(v, nu); };
    if (bivariate_edge_cases(x, y, rho, marginal, out)) return out;
    const double rounded = std::round(nu);
    double value = 0.0;
    if (rounded == nu && nu <= 1.0e4) {
        value = detail::bvt_cdf_integer(x, y, rho, static_cast<int>(rounded));
    } else {
        value = detail::bvt_cdf_quadrature(x, y, rho, nu);
    }
    return clamp_to_frechet(value, t_cdf(x, nu), t_cdf(y, nu));
}

namespace detail {

// Dunnett & Sobel (1954) finite sums, following Genz's BVTL.
double bvt_cdf_integer(double dh, double dk, double r, int nu) {
    const double dnu = static_cast<double>(nu);
    const double snu = std::sqrt(dnu);
    const double ors = 1.0 - r * r;
    const double hrk = dh - r * dk;
    const double krh = dk - r * dh;
    double xnhk = 0.0;
    double xnkh = 0.0;
    if (std::abs(hrk) + ors > 0.0) {
        xnhk = hrk * hrk / (hrk * hrk + ors * (dnu + dk * dk));
        xnkh = krh * krh / (krh * krh + ors * (dnu + dh * dh));
    }
    const double hs = hrk < 0.0 ? -1.0 : 1.0;
    const double ks = krh < 0.0 ? -1.0 : 1.0;
    double bvt = 0.0;
    if (nu % 2 == 0) {
        bvt = std::atan2(std::sqrt(ors), -r) / kTwoPi;
        double gmph = dh / std::sqrt(16.0 * (dnu + dh * dh));
        double gmpk = dk / std::sqrt(16.0 * (dnu + dk * dk));
        double btnckh = 2.0 * std::atan2(std::sqrt(xnkh), std::sqrt(1.0 - xnkh)) / std::numbers::pi;
        double btpdkh = 2.0 * std::sqrt(xnkh * (1.0 - xnkh)) / std::numbers::pi;
        double btnchk = 2.0 * std::atan2(std::sqrt(xnhk), std::sqrt(1.0 - xnhk)) / std::numbers::pi;
        double btpdhk = 2.0 * std::sqrt(xnhk * (1.0 - xnhk)) / std::numbers::pi;
        for (int j = 1; j <= nu / 2; ++j) {
            const double dj = static_cast<double>(j);
            bvt += gmph * (1.0 + ks * btnckh);
            bvt += gmpk * (1.0 + hs * btnchk);
            btnckh += btpdkh;
            btpdkh = 2.0 * dj * btpdkh * (1.0 - xnkh) / (2.0 * dj + 1.0);
            btnchk += btpdhk;
            btpdhk = 2.0 * dj * btpdhk * (1.0 - xnhk) / (2.0 * dj + 1.0);
            gmph = gmph * (2.0 * dj - 1.0) / (2.0 * dj * (1.0 + dh * dh / dnu));
            gmpk = gmpk * (2.0 * dj - 1.0) / (2.0 * dj * (1.0 + dk * dk / dnu));
        }
    } else {
        const double qhrk = std::sqrt(dh * dh + dk * dk - 2.0 * r * dh * dk + dnu * ors);
        const double hkrn = dh * dk + r * dnu;
        const double hkn = dh * dk - dnu;
        const double hpk = dh + dk;
        bvt = std::atan2(-snu * (hkn * qhrk + hpk * hkrn), hkn * hkrn - dnu * hpk * qhrk) / kTwoPi;
        if (bvt < -1.0e-15) bvt += 1.0;
        double gmph = dh / (kTwoPi * snu * (1.0 + dh * dh / dnu));
        double gmpk = dk / (kTwoPi * snu * (1.0 + dk * dk / dnu));
        double btnckh = std::sqrt(xnkh);
        double btpdkh = btnckh;
        double btnchk = std::sqrt(xnhk);
        double btpdhk = btnchk;
        for (int j = 1; j <= (nu - 1) / 2; ++j) {
            const double dj = static_cast<double>(j);
            bvt += gmph * (1.0 + ks * btnckh);
            bvt += gmpk * (1.0 + hs * btnchk);
            btpdkh = (2.0 * dj - 1.0) * btpdkh * (1.0 - xnkh) / (2.0 * dj);
            btnckh += btpdkh;
            btpdhk = (2.0 * dj - 1.0) * btpdhk * (1.0 - xnhk) / (2.0 * dj);
            btnchk += btpdhk;
            gmph = gmph * 2.0 * dj / ((2.0 * dj + 1.0) * (1.0 + dh * dh / dnu));
            gmpk = gmpk * 2.0 * dj / ((2.0 * dj + 1.0) * (1.0 + dk * dk / dnu));
        }
    }
    return bvt;
}

// P(X <= x, Y <= y) = int_{-inf}^{x} t_nu(s) T_{nu+1}((y - rho s) / scale(s)) ds,
// with scale(s)^2 = (1 - rho^2)(nu + s^2) / (nu + 1).
double bvt_cdf_quadrature(double x, double y, double rho, double nu) {
    const double one_minus = (1.0 - rho) * (1.0 + rho);
    auto integrand = [&](double s) {
        const double scale = std::sqrt(one_minus * (nu + s * s) / (nu + 1.0));
        return t_pdf(s, nu) * t_cdf((y - rho * s) / scale, nu + 1.0);
    };
    double error = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, -std::numeric_limits<double>::infinity(), x, 15, 1.0e-12, &error);
}

}  // namespace detail

double debye1(double x) {
    if (x == 0.0 || std::isnan(x)) throw DomainError("debye1: argument must be non-zero");
    if (std::abs(x) < 1.0e-4) {
        const double x2 = x * x;
        return 1.0 - x / 4.0 + x2 / 36.0 - x2 * x2 / 3600.0;
    }
    const double fa = debye_integrand(0.0);
    const double fb = debye_integrand(x);
    const double m = 0.5 * x;
    const double fm = debye_integrand(m);
    const double whole = x / 6.0 * (fa + 4.0 * fm + fb);
    const double integral = simpson_step(0.0, fa, x, fb, m, fm, whole, 1.0e-14 * std::max(1.0, std::abs(x)), 48);
    return integral / x;
}

}  // namespace copmarkov
