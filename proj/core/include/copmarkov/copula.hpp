#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace copmarkov {

/// The parametric bivariate families used for serial and coupling dependence.
enum class CopulaFamily { BVN, Frank, Gumbel, SurvivalGumbel, StudentT };

inline constexpr std::array<CopulaFamily, 5> kAllFamilies{
    CopulaFamily::BVN, CopulaFamily::Frank, CopulaFamily::Gumbel, CopulaFamily::SurvivalGumbel,
    CopulaFamily::StudentT};

/// A copula family together with its dependence parameter.
///
/// Parameter ranges: BVN and StudentT take a correlation in [-1, 1];
/// Gumbel and SurvivalGumbel take theta >= 1; Frank takes any real theta,
/// where |theta| < 1e-5 is evaluated as the independence limit. `nu` is only
/// meaningful for StudentT.
struct CopulaSpec {
    CopulaFamily family = CopulaFamily::Gumbel;
    double theta = 1.0;
    double nu = 0.0;

    static CopulaSpec bvn(double rho) { return {CopulaFamily::BVN, rho, 0.0}; }
    static CopulaSpec frank(double theta) { return {CopulaFamily::Frank, theta, 0.0}; }
    static CopulaSpec gumbel(double theta) { return {CopulaFamily::Gumbel, theta, 0.0}; }
    static CopulaSpec survival_gumbel(double theta) {
        return {CopulaFamily::SurvivalGumbel, theta, 0.0};
    }
    static CopulaSpec student_t(double rho, double nu) { return {CopulaFamily::StudentT, rho, nu}; }
    /// Gumbel at theta = 1, which is exactly the product copula.
    static CopulaSpec independence() { return gumbel(1.0); }

    friend bool operator==(const CopulaSpec&, const CopulaSpec&) = default;
};

std::string_view family_name(CopulaFamily family);
/// Short display label: "BVN", "Frank", "Gumbel", "s.Gumbel", "t5".
std::string copula_label(const CopulaSpec& spec);
/// Parses a family token (bvn, frank, gumbel, sgumbel, t<nu>) into a template
/// spec sitting at the family's independence point (t: rho = 0).
CopulaSpec parse_copula_template(std::string_view token);

/// Throws DomainError when the parameter is outside the family's range.
void validate(const CopulaSpec& spec);

/// True when the spec is the product copula (Gumbel or s.Gumbel at 1, BVN at
/// 0, Frank inside its independence band).
bool is_product_copula(const CopulaSpec& spec);

/// C(u1, u2). Exact at the boundaries u = 0 and u = 1; interior arguments of
/// BVN and t are clamped to [1e-10, 1 - 1e-10] before the quantile transform.
double copula_cdf(const CopulaSpec& spec, double u1, double u2);

/// 180-degree rotation u1 + u2 - 1 + C(1 - u1, 1 - u2) of any copula cdf.
template <class Cdf>
double survival_cdf(Cdf&& base, double u1, double u2) {
    return u1 + u2 - 1.0 + base(1.0 - u1, 1.0 - u2);
}

/// C(b1,b2) - C(a1,b2) - C(b1,a2) + C(a1,a2) without clamping.
double rect_prob_raw(const CopulaSpec& spec, double a1, double b1, double a2, double b2);
/// Rectangle probability of [a1,b1] x [a2,b2], clamped at zero.
double rect_prob(const CopulaSpec& spec, double a1, double b1, double a2, double b2);

double kendall_tau(const CopulaSpec& spec);
/// Parameter with the requested Kendall's tau. `nu` is carried for StudentT.
CopulaSpec tau_inverse(CopulaFamily family, double tau, double nu = 0.0);

/// Map between the family's parameter range and the real line:
/// tanh for correlations, 1 + exp for Gumbel types, identity for Frank.
double to_unconstrained(const CopulaSpec& spec);
CopulaSpec from_unconstrained(CopulaFamily family, double nu, double x);

/// Copula density with standard normal margins on a square grid over
/// [-limit, limit]^2. Cell (i, j) covers [edges[i], edges[i+1]] in the first
/// coordinate and [edges[j], edges[j+1]] in the second.
struct DensityGrid {
    std::vector<double> edges;
    Eigen::MatrixXd density;

    double cell_area() const { return (edges[1] - edges[0]) * (edges[1] - edges[0]); }
    double total_mass() const { return density.sum() * cell_area(); }
};

DensityGrid density_grid(const CopulaSpec& spec, int grid_size, double limit = 4.0);

/// Evaluates C at the four corners of a rectangle, sharing the per-margin
/// transforms. Returns {C(lo1,lo2), C(hi1,lo2), C(lo1,hi2), C(hi1,hi2)}.
std::array<double, 4> copula_corners(const CopulaSpec& spec, double lo1, double hi1, double lo2,
                                     double hi2);

}  // namespace copmarkov
