#include "copmarkov/ordinal_margin.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "copmarkov/error.hpp"
#include "copmarkov/panel.hpp"
#include "copmarkov/special_functions.hpp"
#include "internal.hpp"

namespace copmarkov {

std::string_view link_name(LinkFunction link) {
    return link == LinkFunction::Probit ? "probit" : "logit";
}

LinkFunction parse_link(std::string_view token) {
    if (token == "probit") return LinkFunction::Probit;
    if (token == "logit") return LinkFunction::Logit;
    throw DomainError("unknown link function '" + std::string(token) + "'");
}

double link_cdf(LinkFunction link, double x) {
    if (link == LinkFunction::Probit) return norm_cdf(x);
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double link_quantile(LinkFunction link, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("link quantile needs p in (0, 1)");
    if (link == LinkFunction::Probit) return norm_quantile(p);
    return std::log(p) - std::log1p(-p);
}

void validate(const MarginalParams& params) {
    if (params.cutpoints.empty()) throw DomainError("an ordinal margin needs K >= 2 categories");
    for (std::size_t k = 0; k < params.cutpoints.size(); ++k) {
        if (!std::isfinite(params.cutpoints[k])) throw DomainError("non-finite cutpoint");
        if (k > 0 && !(params.cutpoints[k] > params.cutpoints[k - 1]))
            throw DomainError("cutpoints must be strictly increasing");
    }
    for (double b : params.beta) {
        if (!std::isfinite(b)) throw DomainError("non-finite regression coefficient");
    }
}

double ordinal_cdf(int y, double mu, const MarginalParams& params) {
    const int K = params.categories();
    if (y < 0 || y > K) throw DomainError("category " + std::to_string(y) + " outside 0..K");
    if (y == 0) return 0.0;
    if (y == K) return 1.0;
    return link_cdf(params.link, params.cutpoints[static_cast<std::size_t>(y - 1)] + mu);
}

double ordinal_pmf(int y, double mu, const MarginalParams& params) {
    if (y < 1 || y > params.categories())
        throw DomainError("category " + std::to_string(y) + " outside 1..K");
    // Above the median the survival function keeps its relative accuracy
    // where 1 - F has already rounded to zero. Both links are symmetric.
    if (y > 1) {
        const double lower = params.cutpoints[static_cast<std::size_t>(y - 2)] + mu;
        if (lower > 0.0) {
            const double upper_tail =
                y == params.categories()
                    ? 0.0
                    : link_cdf(params.link, -(params.cutpoints[static_cast<std::size_t>(y - 1)] + mu));
            return link_cdf(params.link, -lower) - upper_tail;
        }
    }
    return ordinal_cdf(y, mu, params) - ordinal_cdf(y - 1, mu, params);
}

Eigen::VectorXd linear_predictor(const OrdinalPanel& panel, Gender gender,
                                 const MarginalParams& params) {
    if (static_cast<int>(params.beta.size()) != panel.covariate_dim())
        throw DomainError("regression vector does not match covariate dimension");
    if (panel.covariate_dim() == 0)
        return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(panel.observation_count()));
    const Eigen::Map<const Eigen::VectorXd> beta(params.beta.data(),
                                                 static_cast<Eigen::Index>(params.beta.size()));
    return panel.covariates(gender) * beta;
}

double loglik_indep(const OrdinalPanel& panel, Gender gender, const MarginalParams& params) {
    validate(params);
    if (params.categories() != panel.categories(gender))
        throw DomainError("margin has a different number of categories than the panel");
    const Eigen::VectorXd mu = linear_predictor(panel, gender, params);
    const auto y = panel.responses(gender);
    std::vector<double> contributions(panel.couple_count());
    detail::parallel_chunks(panel.couple_count(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            double sum = 0.0;
            for (std::size_t i = panel.offset(c); i < panel.offset(c) + panel.waves(c); ++i) {
                const double p = ordinal_pmf(y[i], mu[static_cast<Eigen::Index>(i)], params);
                if (!(p > 0.0))
                    throw EvaluationError("zero-probability observation", c, i - panel.offset(c));
                sum += std::log(p);
            }
            contributions[c] = sum;
        }
    });
    return detail::ordered_sum(std::move(contributions));
}

}  // namespace copmarkov
