#include "copmarkov/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "copmarkov/error.hpp"
#include "internal.hpp"

namespace copmarkov {
namespace {

std::vector<double> transition_cdf_row(const SerialModel& model, int y_prev, double mu,
                                       double mu_prev) {
    const int K = model.margin.categories();
    std::vector<double> row(static_cast<std::size_t>(K) + 1);
    row[0] = 0.0;
    // Separately rounded conditional cdfs can dip by an ulp; keep the row monotone.
    for (int y = 1; y < K; ++y)
        row[y] = std::max(row[y - 1], transition_cdf(y, y_prev, mu, mu_prev, model));
    row[K] = 1.0;
    return row;
}

std::vector<double> marginal_cdf_row(const MarginalParams& margin, double mu) {
    const int K = margin.categories();
    std::vector<double> row(static_cast<std::size_t>(K) + 1);
    for (int y = 0; y <= K; ++y) row[y] = ordinal_cdf(y, mu, margin);
    return row;
}

Eigen::MatrixXd rectangle_table(const CopulaSpec& coupling, const std::vector<double>& male,
                                const std::vector<double>& female) {
    const auto rows = static_cast<Eigen::Index>(male.size() - 1);
    const auto cols = static_cast<Eigen::Index>(female.size() - 1);
    Eigen::MatrixXd table(rows, cols);
    for (Eigen::Index a = 0; a < rows; ++a) {
        for (Eigen::Index b = 0; b < cols; ++b) {
            table(a, b) = rect_prob(coupling, male[a], male[a + 1], female[b], female[b + 1]);
        }
    }
    return table;
}

void check_category(int y, const SerialModel& model) {
    if (y < 1 || y > model.margin.categories())
        throw DomainError("category " + std::to_string(y) + " outside 1..K");
}

}  // namespace

double joint_pmf_t(int y_male, int y_female, const WaveState& state, const JointModelParams& jm) {
    check_category(y_male, jm.male);
    check_category(y_female, jm.female);
    const auto& s = state;
    const double m_lo = transition_cdf(y_male - 1, s.y_prev_male, s.mu_male, s.mu_prev_male, jm.male);
    const double m_hi =
        std::max(m_lo, transition_cdf(y_male, s.y_prev_male, s.mu_male, s.mu_prev_male, jm.male));
    const double f_lo =
        transition_cdf(y_female - 1, s.y_prev_female, s.mu_female, s.mu_prev_female, jm.female);
    const double f_hi = std::max(
        f_lo, transition_cdf(y_female, s.y_prev_female, s.mu_female, s.mu_prev_female, jm.female));
    return rect_prob(jm.coupling, m_lo, m_hi, f_lo, f_hi);
}

double joint_pmf_initial(int y_male, int y_female, double mu_male, double mu_female,
                         const JointModelParams& jm) {
    check_category(y_male, jm.male);
    check_category(y_female, jm.female);
    return rect_prob(jm.coupling, ordinal_cdf(y_male - 1, mu_male, jm.male.margin),
                     ordinal_cdf(y_male, mu_male, jm.male.margin),
                     ordinal_cdf(y_female - 1, mu_female, jm.female.margin),
                     ordinal_cdf(y_female, mu_female, jm.female.margin));
}

Eigen::MatrixXd joint_table_t(const WaveState& state, const JointModelParams& jm) {
    const auto& s = state;
    return rectangle_table(
        jm.coupling, transition_cdf_row(jm.male, s.y_prev_male, s.mu_male, s.mu_prev_male),
        transition_cdf_row(jm.female, s.y_prev_female, s.mu_female, s.mu_prev_female));
}

Eigen::MatrixXd joint_table_initial(double mu_male, double mu_female, const JointModelParams& jm) {
    return rectangle_table(jm.coupling, marginal_cdf_row(jm.male.margin, mu_male),
                           marginal_cdf_row(jm.female.margin, mu_female));
}

std::vector<double> coupling_contributions(const OrdinalPanel& panel,
                                           const std::vector<CdfInterval>& male,
                                           const std::vector<CdfInterval>& female,
                                           const CopulaSpec& coupling, LoglikStats* stats) {
    validate(coupling);
    if (male.size() != panel.observation_count() || female.size() != panel.observation_count())
        throw DomainError("interval arrays do not match the panel");
    const bool product = is_product_copula(coupling);
    std::vector<double> contributions(panel.couple_count());
    std::vector<std::size_t> floored(panel.couple_count(), 0);
    detail::parallel_chunks(panel.couple_count(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            double sum = 0.0;
            auto floored_log = [&](double p, std::size_t t) {
                if (std::isnan(p) || p < -1.0e-10)
                    throw EvaluationError("invalid joint probability", c, t);
                if (p < detail::kProbabilityFloor) {
                    ++floored[c];
                    p = detail::kProbabilityFloor;
                }
                return std::log(p);
            };
            for (std::size_t t = 0; t < panel.waves(c); ++t) {
                const std::size_t i = panel.offset(c) + t;
                if (product) {
                    // The joint term factorises; logging each factor matches the
                    // two serial likelihoods term by term, floors included.
                    sum += floored_log(male[i].mass, t) + floored_log(female[i].mass, t);
                    continue;
                }
                const auto corners =
                    copula_corners(coupling, male[i].lo, male[i].hi, female[i].lo, female[i].hi);
                sum += floored_log((corners[3] + corners[0]) - (corners[1] + corners[2]), t);
            }
            contributions[c] = sum;
        }
    });
    if (stats) {
        for (std::size_t f : floored) stats->floored_terms += f;
    }
    return contributions;
}

std::vector<double> loglik_joint_contributions(const OrdinalPanel& panel, const JointModelParams& jm,
                                               LoglikStats* stats) {
    return coupling_contributions(panel, conditional_intervals(panel, Gender::Male, jm.male),
                                  conditional_intervals(panel, Gender::Female, jm.female),
                                  jm.coupling, stats);
}

double loglik_joint(const OrdinalPanel& panel, const JointModelParams& jm, LoglikStats* stats) {
    return detail::ordered_sum(loglik_joint_contributions(panel, jm, stats));
}

}  // namespace copmarkov
