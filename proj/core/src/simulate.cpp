#include "copmarkov/simulate.hpp"

#include <cmath>
#include <string>

#include "copmarkov/error.hpp"
#include "copmarkov/special_functions.hpp"
#include "internal.hpp"

namespace copmarkov {
namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct CoupleDraw {
    std::vector<int> y_male;
    std::vector<int> y_female;
    Eigen::MatrixXd x_male;
    Eigen::MatrixXd x_female;
};

// Inverse-cdf draw from a table in row-major order; rounding slack at the top
// falls to the last cell with positive mass.
std::pair<int, int> draw_cell(const Eigen::MatrixXd& table, double u) {
    double cumulative = 0.0;
    std::pair<int, int> last{-1, -1};
    for (Eigen::Index a = 0; a < table.rows(); ++a) {
        for (Eigen::Index b = 0; b < table.cols(); ++b) {
            const double p = table(a, b);
            if (!(p > 0.0)) continue;
            cumulative += p;
            last = {static_cast<int>(a) + 1, static_cast<int>(b) + 1};
            if (u < cumulative) return last;
        }
    }
    if (last.first < 0) throw NumericalFailure("joint probability table has no mass");
    return last;
}

void check_design(const JointModelParams& jm, const SimDesign& design, int& covariate_dim) {
    validate(jm.male.margin);
    validate(jm.female.margin);
    validate(jm.male.copula);
    validate(jm.female.copula);
    validate(jm.coupling);
    if (design.couples < 1 || design.waves < 1)
        throw DomainError("simulation needs at least one couple and one wave");
    for (const SerialModel* s : {&jm.male, &jm.female}) {
        if (s->margin.categories() > kMaxSimulatedCategories)
            throw DomainError("simulation supports at most " +
                              std::to_string(kMaxSimulatedCategories) + " categories");
    }
    switch (design.covariates) {
        case CovariateDesign::None:
            covariate_dim = 0;
            break;
        case CovariateDesign::StandardNormal:
            if (design.covariate_dim < 1) throw DomainError("standard normal design needs p >= 1");
            covariate_dim = design.covariate_dim;
            break;
        case CovariateDesign::Fixed: {
            const auto rows = static_cast<Eigen::Index>(design.couples * design.waves);
            if (design.fixed_male.rows() != rows || design.fixed_female.rows() != rows ||
                design.fixed_male.cols() != design.fixed_female.cols())
                throw DomainError("fixed design matrices need couples * waves rows and equal widths");
            covariate_dim = static_cast<int>(design.fixed_male.cols());
            break;
        }
    }
    if (jm.male.margin.beta.size() != static_cast<std::size_t>(covariate_dim) ||
        jm.female.margin.beta.size() != static_cast<std::size_t>(covariate_dim))
        throw DomainError("regression vectors do not match the covariate design");
}

double dot(const Eigen::MatrixXd& x, Eigen::Index row, const std::vector<double>& beta) {
    double s = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k) s += x(row, static_cast<Eigen::Index>(k)) * beta[k];
    return s;
}

CoupleDraw draw_couple(const JointModelParams& jm, const SimDesign& design, int p,
                       std::size_t couple) {
    SplitMix64 rng = SplitMix64::keyed(design.seed, couple);
    const auto T = static_cast<Eigen::Index>(design.waves);
    CoupleDraw out;
    out.x_male.resize(T, p);
    out.x_female.resize(T, p);
    if (design.covariates == CovariateDesign::StandardNormal) {
        for (Eigen::Index t = 0; t < T; ++t) {
            for (Eigen::Index k = 0; k < p; ++k) out.x_male(t, k) = rng.normal();
            for (Eigen::Index k = 0; k < p; ++k) out.x_female(t, k) = rng.normal();
        }
    } else if (design.covariates == CovariateDesign::Fixed) {
        const auto start = static_cast<Eigen::Index>(couple * design.waves);
        out.x_male = design.fixed_male.middleRows(start, T);
        out.x_female = design.fixed_female.middleRows(start, T);
    }
    WaveState state{};
    for (Eigen::Index t = 0; t < T; ++t) {
        const double mu_m = dot(out.x_male, t, jm.male.margin.beta);
        const double mu_f = dot(out.x_female, t, jm.female.margin.beta);
        Eigen::MatrixXd table;
        if (t == 0) {
            table = joint_table_initial(mu_m, mu_f, jm);
        } else {
            state.mu_male = mu_m;
            state.mu_female = mu_f;
            table = joint_table_t(state, jm);
        }
        const auto [ym, yf] = draw_cell(table, rng.uniform());
        out.y_male.push_back(ym);
        out.y_female.push_back(yf);
        state.y_prev_male = ym;
        state.y_prev_female = yf;
        state.mu_prev_male = mu_m;
        state.mu_prev_female = mu_f;
    }
    return out;
}

}  // namespace

SplitMix64 SplitMix64::keyed(std::uint64_t seed, std::uint64_t stream) {
    return SplitMix64(mix64(seed + 0x9e3779b97f4a7c15ULL) ^ mix64(stream * 0xd1342543de82ef95ULL + 1));
}

std::uint64_t SplitMix64::next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
}

double SplitMix64::uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double SplitMix64::normal() { return norm_quantile(uniform()); }

OrdinalPanel simulate_panel(const JointModelParams& jm, const SimDesign& design) {
    int p = 0;
    check_design(jm, design, p);
    std::vector<CoupleDraw> draws(design.couples);
    detail::parallel_chunks(design.couples, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) draws[c] = draw_couple(jm, design, p, c);
    });
    OrdinalPanel panel(jm.male.margin.categories(), jm.female.margin.categories(), p);
    for (std::size_t c = 0; c < draws.size(); ++c) {
        auto& d = draws[c];
        panel.add_couple(std::to_string(c + 1), 1, std::move(d.y_male), std::move(d.y_female),
                         d.x_male, d.x_female);
    }
    return panel;
}

double tau_b_from_table(const Eigen::MatrixXd& table) {
    const Eigen::Index R = table.rows();
    const Eigen::Index C = table.cols();
    if ((table.array() < 0.0).any() || !table.allFinite())
        throw DomainError("contingency table needs finite non-negative entries");
    double concordant = 0.0;
    double discordant = 0.0;
    for (Eigen::Index a = 0; a < R; ++a) {
        for (Eigen::Index b = 0; b < C; ++b) {
            const double n = table(a, b);
            if (n == 0.0) continue;
            if (a + 1 < R) {
                if (b + 1 < C) concordant += n * table.bottomRightCorner(R - a - 1, C - b - 1).sum();
                if (b > 0) discordant += n * table.bottomLeftCorner(R - a - 1, b).sum();
            }
        }
    }
    const double total = table.sum();
    const double rows = table.rowwise().sum().squaredNorm();
    const double cols = table.colwise().sum().squaredNorm();
    const double denom = std::sqrt((total * total - rows) / 2.0 * ((total * total - cols) / 2.0));
    if (!(denom > 0.0)) throw DegenerateResult("Kendall's tau undefined: a coordinate is constant");
    return (concordant - discordant) / denom;
}

double empirical_tau(const OrdinalPanel& panel, Pairing pairing, Gender gender) {
    Eigen::MatrixXd table;
    std::size_t pairs = 0;
    if (pairing == Pairing::WithinCouple) {
        table = Eigen::MatrixXd::Zero(panel.categories(Gender::Male), panel.categories(Gender::Female));
        const auto ym = panel.responses(Gender::Male);
        const auto yf = panel.responses(Gender::Female);
        for (std::size_t i = 0; i < ym.size(); ++i) table(ym[i] - 1, yf[i] - 1) += 1.0;
        pairs = ym.size();
    } else {
        const int K = panel.categories(gender);
        table = Eigen::MatrixXd::Zero(K, K);
        for (std::size_t c = 0; c < panel.couple_count(); ++c) {
            const auto y = panel.responses(gender, c);
            for (std::size_t t = 1; t < y.size(); ++t) {
                table(y[t - 1] - 1, y[t] - 1) += 1.0;
                ++pairs;
            }
        }
    }
    if (pairs < 2) throw DegenerateResult("Kendall's tau needs at least two pairs");
    return tau_b_from_table(table);
}

}  // namespace copmarkov
