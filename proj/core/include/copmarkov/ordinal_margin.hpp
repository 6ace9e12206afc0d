#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace copmarkov {

class OrdinalPanel;
enum class Gender;

/// Latent-variable cdf of the ordinal regression: normal (ordered probit) or
/// logistic (cumulative logit).
enum class LinkFunction { Probit, Logit };

std::string_view link_name(LinkFunction link);
LinkFunction parse_link(std::string_view token);

double link_cdf(LinkFunction link, double x);
double link_quantile(LinkFunction link, double p);

/// Cutpoints alpha_1 < ... < alpha_{K-1} and regression coefficients for one
/// series. alpha_0 = -inf and alpha_K = +inf are implicit.
struct MarginalParams {
    LinkFunction link = LinkFunction::Probit;
    std::vector<double> cutpoints;
    std::vector<double> beta;

    int categories() const { return static_cast<int>(cutpoints.size()) + 1; }
};

/// Throws DomainError unless K >= 2 and the cutpoints are finite and strictly increasing.
void validate(const MarginalParams& params);

/// P(Y <= y) = F(alpha_y + mu) for y in 0..K.
double ordinal_cdf(int y, double mu, const MarginalParams& params);
/// P(Y = y) for y in 1..K.
double ordinal_pmf(int y, double mu, const MarginalParams& params);

/// Linear predictor x_t' beta for every observation of one series, in panel order.
Eigen::VectorXd linear_predictor(const OrdinalPanel& panel, Gender gender,
                                 const MarginalParams& params);

/// Serial-independence log-likelihood of one series.
double loglik_indep(const OrdinalPanel& panel, Gender gender, const MarginalParams& params);

}  // namespace copmarkov
