#include "copmarkov/copula.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "copmarkov/error.hpp"
#include "copmarkov/special_functions.hpp"

namespace copmarkov {
namespace {

constexpr double kClampLow = 1.0e-10;
constexpr double kClampHigh = 1.0 - 1.0e-10;
constexpr double kFrankIndependence = 1.0e-5;

double clamp_unit(double u) { return std::clamp(u, kClampLow, kClampHigh); }

// One margin of a copula argument: the raw probability plus whatever
// family-specific transform the joint evaluation needs.
struct Margin {
    double u;
    double q;
};

Margin prepare(const CopulaSpec& spec, double u) {
    if (u <= 0.0 || u >= 1.0) return {u, 0.0};
    // Only the elliptical families go through a quantile that diverges at
    // 0 and 1; the Archimedean transforms are finite on the open interval.
    switch (spec.family) {
        case CopulaFamily::BVN:
            return {u, norm_quantile(clamp_unit(u))};
        case CopulaFamily::StudentT:
            return {u, t_quantile(clamp_unit(u), spec.nu)};
        case CopulaFamily::Gumbel:
            return {u, -std::log(u)};
        case CopulaFamily::SurvivalGumbel:
            return {u, -std::log1p(-u)};
        case CopulaFamily::Frank:
            return {u, u};
    }
    return {u, 0.0};
}

// exp(-(a^theta + b^theta)^(1/theta)) for a, b >= 0, scaled to avoid overflow.
double gumbel_core(double a, double b, double theta) {
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    if (hi == 0.0) return 1.0;
    const double ratio = lo / hi;
    const double s = hi * std::pow(1.0 + std::pow(ratio, theta), 1.0 / theta);
    return std::exp(-s);
}

double frank_core(double u1, double u2, double theta) {
    if (theta > 0.0) {
        const double num = std::expm1(-theta * u1) * std::expm1(-theta * u2);
        return -std::log1p(num / std::expm1(-theta)) / theta;
    }
    // theta < 0: rewrite with a = |theta| so that no exponential overflows.
    const double a = -theta;
    const double p1 = -std::expm1(-a * u1);
    const double p2 = -std::expm1(-a * u2);
    const double big = a * (u1 + u2 - 1.0) + std::log(p1 * p2 / -std::expm1(-a));
    const double log1pexp = big > 0.0 ? big + std::log1p(std::exp(-big)) : std::log1p(std::exp(big));
    return log1pexp / a;
}

double joint(const CopulaSpec& spec, Margin m1, Margin m2) {
    if (m1.u <= 0.0 || m2.u <= 0.0) return 0.0;
    if (m1.u >= 1.0) return std::min(m2.u, 1.0);
    if (m2.u >= 1.0) return m1.u;
    double value = 0.0;
    switch (spec.family) {
        case CopulaFamily::BVN:
            value = bvn_cdf(m1.q, m2.q, spec.theta);
            break;
        case CopulaFamily::StudentT:
            value = bvt_cdf(m1.q, m2.q, spec.theta, spec.nu);
            break;
        case CopulaFamily::Gumbel:
            value = gumbel_core(m1.q, m2.q, spec.theta);
            break;
        case CopulaFamily::SurvivalGumbel:
            value = m1.u + m2.u - 1.0 + gumbel_core(m1.q, m2.q, spec.theta);
            break;
        case CopulaFamily::Frank:
            value = std::abs(spec.theta) < kFrankIndependence ? m1.q * m2.q
                                                              : frank_core(m1.q, m2.q, spec.theta);
            break;
    }
    const double lower = std::max(0.0, m1.u + m2.u - 1.0);
    const double upper = std::min(m1.u, m2.u);
    return std::clamp(value, lower, upper);
}

void require_unit(double u) {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("copula argument outside [0, 1]");
}

// Frank tau = 1 + 4 (D1(theta) - 1) / theta, with its Taylor series near 0.
double frank_tau(double theta) {
    if (std::abs(theta) < 1.0e-2) {
        const double t2 = theta * theta;
        return theta / 9.0 - theta * t2 / 900.0 + theta * t2 * t2 / 52920.0;
    }
    return 1.0 + 4.0 * (debye1(theta) - 1.0) / theta;
}

}  // namespace

std::string_view family_name(CopulaFamily family) {
    switch (family) {
        case CopulaFamily::BVN:
            return "BVN";
        case CopulaFamily::Frank:
            return "Frank";
        case CopulaFamily::Gumbel:
            return "Gumbel";
        case CopulaFamily::SurvivalGumbel:
            return "s.Gumbel";
        case CopulaFamily::StudentT:
            return "t";
    }
    return "?";
}

std::string copula_label(const CopulaSpec& spec) {
    if (spec.family != CopulaFamily::StudentT) return std::string(family_name(spec.family));
    const double rounded = std::round(spec.nu);
    if (rounded == spec.nu) return "t" + std::to_string(static_cast<long long>(rounded));
    char buffer[32];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), spec.nu);
    (void)ec;
    return "t" + std::string(buffer, end);
}

CopulaSpec parse_copula_template(std::string_view token) {
    std::string lower(token);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "bvn" || lower == "normal") return CopulaSpec::bvn(0.0);
    if (lower == "frank") return CopulaSpec::frank(0.0);
    if (lower == "gumbel") return CopulaSpec::gumbel(1.0);
    if (lower == "sgumbel" || lower == "s.gumbel" || lower == "survival-gumbel")
        return CopulaSpec::survival_gumbel(1.0);
    if (lower.size() > 1 && lower[0] == 't') {
        double nu = 0.0;
        const char* first = lower.data() + 1;
        const char* last = lower.data() + lower.size();
        auto [ptr, ec] = std::from_chars(first, last, nu);
        if (ec == std::errc() && ptr == last && nu > 0.0) return CopulaSpec::student_t(0.0, nu);
    }
    throw DomainError("unknown copula family '" + std::string(token) + "'");
}

void validate(const CopulaSpec& spec) {
    if (std::isnan(spec.theta)) throw DomainError("copula parameter is NaN");
    switch (spec.family) {
        case CopulaFamily::BVN:
        case CopulaFamily::StudentT:
            if (!(std::abs(spec.theta) <= 1.0))
                throw DomainError("correlation parameter must lie in [-1, 1]");
            if (spec.family == CopulaFamily::StudentT && !(spec.nu > 0.0))
                throw DomainError("t copula needs positive degrees of freedom");
            break;
        case CopulaFamily::Gumbel:
        case CopulaFamily::SurvivalGumbel:
            if (!(spec.theta >= 1.0)) throw DomainError("Gumbel parameter must be >= 1");
            break;
        case CopulaFamily::Frank:
            if (!std::isfinite(spec.theta)) throw DomainError("Frank parameter must be finite");
            break;
    }
}

double copula_cdf(const CopulaSpec& spec, double u1, double u2) {
    validate(spec);
    require_unit(u1);
    require_unit(u2);
    return joint(spec, prepare(spec, u1), prepare(spec, u2));
}

std::array<double, 4> copula_corners(const CopulaSpec& spec, double lo1, double hi1, double lo2,
                                     double hi2) {
    const Margin a1 = prepare(spec, lo1);
    const Margin b1 = prepare(spec, hi1);
    const Margin a2 = prepare(spec, lo2);
    const Margin b2 = prepare(spec, hi2);
    return {joint(spec, a1, a2), joint(spec, b1, a2), joint(spec, a1, b2), joint(spec, b1, b2)};
}

bool is_product_copula(const CopulaSpec& spec) {
    switch (spec.family) {
        case CopulaFamily::BVN:
            return spec.theta == 0.0;
        case CopulaFamily::Frank:
            return std::abs(spec.theta) < kFrankIndependence;
        case CopulaFamily::Gumbel:
        case CopulaFamily::SurvivalGumbel:
            return spec.theta == 1.0;
        case CopulaFamily::StudentT:
            return false;
    }
    return false;
}

double rect_prob_raw(const CopulaSpec& spec, double a1, double b1, double a2, double b2) {
    validate(spec);
    for (double u : {a1, b1, a2, b2}) require_unit(u);
    if (a1 > b1 || a2 > b2) throw DomainError("rect_prob: lower bound exceeds upper bound");
    if (is_product_copula(spec)) return (b1 - a1) * (b2 - a2);
    const auto c = copula_corners(spec, a1, b1, a2, b2);
    // Summed pairwise so that swapping the two margins is exact.
    return (c[3] + c[0]) - (c[1] + c[2]);
}

double rect_prob(const CopulaSpec& spec, double a1, double b1, double a2, double b2) {
    return std::max(0.0, rect_prob_raw(spec, a1, b1, a2, b2));
}

double kendall_tau(const CopulaSpec& spec) {
    validate(spec);
    switch (spec.family) {
        case CopulaFamily::BVN:
        case CopulaFamily::StudentT:
            return 2.0 / std::numbers::pi * std::asin(spec.theta);
        case CopulaFamily::Gumbel:
        case CopulaFamily::SurvivalGumbel:
            return 1.0 - 1.0 / spec.theta;
        case CopulaFamily::Frank:
            return frank_tau(spec.theta);
    }
    return 0.0;
}

CopulaSpec tau_inverse(CopulaFamily family, double tau, double nu) {
    if (!(tau > -1.0 && tau < 1.0)) throw DomainError("Kendall's tau must lie in (-1, 1)");
    switch (family) {
        case CopulaFamily::BVN:
            return CopulaSpec::bvn(std::sin(std::numbers::pi * tau / 2.0));
        case CopulaFamily::StudentT:
            if (!(nu > 0.0)) throw DomainError("t copula needs positive degrees of freedom");
            return CopulaSpec::student_t(std::sin(std::numbers::pi * tau / 2.0), nu);
        case CopulaFamily::Gumbel:
        case CopulaFamily::SurvivalGumbel:
            if (tau < 0.0) throw DomainError("Gumbel families cannot attain negative tau");
            return {family, 1.0 / (1.0 - tau), 0.0};
        case CopulaFamily::Frank: {
            if (tau == 0.0) return CopulaSpec::frank(0.0);
            const double sign = tau > 0.0 ? 1.0 : -1.0;
            const double target = std::abs(tau);
            double hi = 1.0;
            while (frank_tau(hi) < target) hi *= 2.0;
            auto f = [target](double theta) { return frank_tau(theta) - target; };
            boost::math::tools::eps_tolerance<double> tol(50);
            std::uintmax_t iterations = 200;
            const auto [a, b] =
                boost::math::tools::toms748_solve(f, 0.0, hi, -target, f(hi), tol, iterations);
            return CopulaSpec::frank(sign * 0.5 * (a + b));
        }
    }
    throw DomainError("unknown copula family");
}

double to_unconstrained(const CopulaSpec& spec) {
    validate(spec);
    switch (spec.family) {
        case CopulaFamily::BVN:
        case CopulaFamily::StudentT:
            return std::atanh(std::clamp(spec.theta, -1.0 + 1e-16, 1.0 - 1e-16));
        case CopulaFamily::Gumbel:
        case CopulaFamily::SurvivalGumbel:
            return std::log(std::max(spec.theta - 1.0, 1e-300));
        case CopulaFamily::Frank:
            return spec.theta;
    }
    return 0.0;
}

CopulaSpec from_unconstrained(CopulaFamily family, double nu, double x) {
    switch (family) {
        case CopulaFamily::BVN:
            return CopulaSpec::bvn(std::tanh(x));
        case CopulaFamily::StudentT:
            return CopulaSpec::student_t(std::tanh(x), nu);
        case CopulaFamily::Gumbel:
        case CopulaFamily::SurvivalGumbel:
            return {family, 1.0 + std::exp(x), 0.0};
        case CopulaFamily::Frank:
            return CopulaSpec::frank(x);
    }
    throw DomainError("unknown copula family");
}

DensityGrid density_grid(const CopulaSpec& spec, int grid_size, double limit) {
    if (grid_size < 10) throw DomainError("density grid needs at least 10 cells per side");
    validate(spec);
    DensityGrid grid;
    grid.edges.resize(static_cast<std::size_t>(grid_size) + 1);
    std::vector<double> u(grid.edges.size());
    for (int k = 0; k <= grid_size; ++k) {
        grid.edges[k] = -limit + 2.0 * limit * k / grid_size;
        u[k] = norm_cdf(grid.edges[k]);
    }
    const double area = grid.cell_area();
    grid.density.resize(grid_size, grid_size);
    for (int i = 0; i < grid_size; ++i) {
        for (int j = 0; j < grid_size; ++j) {
            grid.density(i, j) = rect_prob(spec, u[i], u[i + 1], u[j], u[j + 1]) / area;
        }
    }
    return grid;
}

}  // namespace copmarkov
