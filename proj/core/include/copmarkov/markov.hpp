#pragma once

#include <cstddef>
#include <vector>

#include "copmarkov/copula.hpp"
#include "copmarkov/ordinal_margin.hpp"
#include "copmarkov/panel.hpp"

namespace copmarkov {

/// One ordinal series: its margin plus the copula of consecutive observations.
struct SerialModel {
    MarginalParams margin;
    CopulaSpec copula;
};

/// Bookkeeping shared by the log-likelihood evaluators.
struct LoglikStats {
    /// Terms whose probability fell below 1e-300 and was floored before the log.
    std::size_t floored_terms = 0;
};

/// P(Y_t = y_t, Y_{t-1} = y_prev): serial-copula mass of the rectangle
/// [F(y_prev - 1), F(y_prev)] x [F(y_t - 1), F(y_t)].
double pair_pmf(int y_t, int y_prev, double mu_t, double mu_prev, const SerialModel& model);
/// P(Y_t = y_t | Y_{t-1} = y_prev).
double transition_pmf(int y_t, int y_prev, double mu_t, double mu_prev, const SerialModel& model);
/// P(Y_t <= y_t | Y_{t-1} = y_prev) for y_t in 0..K.
double transition_cdf(int y_t, int y_prev, double mu_t, double mu_prev, const SerialModel& model);

/// Markov log-likelihood of one series: first wave from the static margin,
/// later waves from the transition pmf.
double loglik_markov(const OrdinalPanel& panel, Gender gender, const SerialModel& model,
                     LoglikStats* stats = nullptr);

/// Conditional-cdf interval [F(y - 1 | past), F(y | past)] of an observation.
struct CdfInterval {
    double lo;
    double hi;
    /// Probability of the observed category, computed directly rather than as
    /// hi - lo so that it keeps its accuracy in the tails.
    double mass;
};

/// One interval per observation (panel order): the static margin at a
/// couple's first wave, the transition cdf given the previous wave afterwards.
std::vector<CdfInterval> conditional_intervals(const OrdinalPanel& panel, Gender gender,
                                               const SerialModel& model);

}  // namespace copmarkov
