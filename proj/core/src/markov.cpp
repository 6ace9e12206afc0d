#include "copmarkov/markov.hpp"

#include <algorithm>
#include <cmath>

#include "copmarkov/error.hpp"
#include "internal.hpp"

namespace copmarkov {
namespace {

struct TransitionTerms {
    double lo;
    double hi;
    double pmf;
};

// Rectangle [prev_lo, prev_hi] x [cur_lo, cur_hi] of the serial copula,
// normalised by the previous wave's marginal probability.
TransitionTerms transition_terms(const CopulaSpec& copula, double prev_lo, double prev_hi,
                                 double cur_lo, double cur_hi, double cur_mass) {
    if (is_product_copula(copula)) return {cur_lo, cur_hi, cur_mass};
    const double f_prev = prev_hi - prev_lo;
    const auto c = copula_corners(copula, prev_lo, prev_hi, cur_lo, cur_hi);
    const double lo = (c[1] - c[0]) / f_prev;
    const double hi = (c[3] - c[2]) / f_prev;
    const double pmf = ((c[3] + c[0]) - (c[1] + c[2])) / f_prev;
    const double lo_c = std::clamp(lo, 0.0, 1.0);
    return {lo_c, std::clamp(hi, lo_c, 1.0), pmf};
}

void check_model(const OrdinalPanel& panel, Gender gender, const SerialModel& model) {
    validate(model.margin);
    validate(model.copula);
    if (model.margin.categories() != panel.categories(gender))
        throw DomainError("margin has a different number of categories than the panel");
}

double floored_log(double p, std::size_t& floored, std::size_t couple, std::size_t wave) {
    if (std::isnan(p) || p < -1.0e-10) throw EvaluationError("invalid probability", couple, wave);
    if (p < detail::kProbabilityFloor) {
        ++floored;
        p = detail::kProbabilityFloor;
    }
    return std::log(p);
}

}  // namespace

double pair_pmf(int y_t, int y_prev, double mu_t, double mu_prev, const SerialModel& model) {
    const auto& m = model.margin;
    return rect_prob(model.copula, ordinal_cdf(y_prev - 1, mu_prev, m), ordinal_cdf(y_prev, mu_prev, m),
                     ordinal_cdf(y_t - 1, mu_t, m), ordinal_cdf(y_t, mu_t, m));
}

double transition_pmf(int y_t, int y_prev, double mu_t, double mu_prev, const SerialModel& model) {
    const double f_prev = ordinal_pmf(y_prev, mu_prev, model.margin);
    if (!(f_prev > 0.0)) throw DomainError("previous category has zero marginal probability");
    return pair_pmf(y_t, y_prev, mu_t, mu_prev, model) / f_prev;
}

double transition_cdf(int y_t, int y_prev, double mu_t, double mu_prev, const SerialModel& model) {
    const auto& m = model.margin;
    const double f_prev = ordinal_pmf(y_prev, mu_prev, m);
    if (!(f_prev > 0.0)) throw DomainError("previous category has zero marginal probability");
    const double v = ordinal_cdf(y_t, mu_t, m);
    const double upper = copula_cdf(model.copula, ordinal_cdf(y_prev, mu_prev, m), v);
    const double lower = copula_cdf(model.copula, ordinal_cdf(y_prev - 1, mu_prev, m), v);
    return std::clamp((upper - lower) / f_prev, 0.0, 1.0);
}

double loglik_markov(const OrdinalPanel& panel, Gender gender, const SerialModel& model,
                     LoglikStats* stats) {
    check_model(panel, gender, model);
    const Eigen::VectorXd mu = linear_predictor(panel, gender, model.margin);
    const auto y = panel.responses(gender);
    const auto& m = model.margin;
    std::vector<double> contributions(panel.couple_count());
    std::vector<std::size_t> floored(panel.couple_count(), 0);
    detail::parallel_chunks(panel.couple_count(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            const std::size_t first = panel.offset(c);
            double sum = floored_log(ordinal_pmf(y[first], mu[first], m), floored[c], c, 0);
            for (std::size_t t = 1; t < panel.waves(c); ++t) {
                const std::size_t i = first + t;
                const auto terms = transition_terms(
                    model.copula, ordinal_cdf(y[i - 1] - 1, mu[i - 1], m),
                    ordinal_cdf(y[i - 1], mu[i - 1], m), ordinal_cdf(y[i] - 1, mu[i], m),
                    ordinal_cdf(y[i], mu[i], m), ordinal_pmf(y[i], mu[i], m));
                sum += floored_log(terms.pmf, floored[c], c, t);
            }
            contributions[c] = sum;
        }
    });
    if (stats) {
        for (std::size_t f : floored) stats->floored_terms += f;
    }
    return detail::ordered_sum(std::move(contributions));
}

std::vector<CdfInterval> conditional_intervals(const OrdinalPanel& panel, Gender gender,
                                               const SerialModel& model) {
    check_model(panel, gender, model);
    const Eigen::VectorXd mu = linear_predictor(panel, gender, model.margin);
    const auto y = panel.responses(gender);
    const auto& m = model.margin;
    std::vector<CdfInterval> out(panel.observation_count());
    detail::parallel_chunks(panel.couple_count(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            const std::size_t first = panel.offset(c);
            out[first] = {ordinal_cdf(y[first] - 1, mu[first], m), ordinal_cdf(y[first], mu[first], m),
                          ordinal_pmf(y[first], mu[first], m)};
            for (std::size_t t = 1; t < panel.waves(c); ++t) {
                const std::size_t i = first + t;
                const auto terms = transition_terms(
                    model.copula, ordinal_cdf(y[i - 1] - 1, mu[i - 1], m),
                    ordinal_cdf(y[i - 1], mu[i - 1], m), ordinal_cdf(y[i] - 1, mu[i], m),
                    ordinal_cdf(y[i], mu[i], m), ordinal_pmf(y[i], mu[i], m));
                out[i] = {terms.lo, terms.hi, terms.pmf};
            }
        }
    });
    return out;
}

}  // namespace copmarkov
