#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "copmarkov/coupling.hpp"
#include "copmarkov/error.hpp"
#include "generators.hpp"

using namespace copmarkov;

namespace {

// Transition cdf written out from copula_cdf.
double cond_cdf(int y, int y_prev, double mu, double mu_prev, const SerialModel& s) {
    const auto& m = s.margin;
    const double lo = ordinal_cdf(y_prev - 1, mu_prev, m);
    const double hi = ordinal_cdf(y_prev, mu_prev, m);
    const double v = ordinal_cdf(y, mu, m);
    return (copula_cdf(s.copula, hi, v) - copula_cdf(s.copula, lo, v)) / (hi - lo);
}

double joint_oracle(int a, int b, const WaveState& st, const JointModelParams& jm) {
    const double a_lo = cond_cdf(a - 1, st.y_prev_male, st.mu_male, st.mu_prev_male, jm.male);
    const double a_hi = cond_cdf(a, st.y_prev_male, st.mu_male, st.mu_prev_male, jm.male);
    const double b_lo = cond_cdf(b - 1, st.y_prev_female, st.mu_female, st.mu_prev_female, jm.female);
    const double b_hi = cond_cdf(b, st.y_prev_female, st.mu_female, st.mu_prev_female, jm.female);
    const auto& c = jm.coupling;
    return copula_cdf(c, a_hi, b_hi) - copula_cdf(c, a_lo, b_hi) - copula_cdf(c, a_hi, b_lo) +
           copula_cdf(c, a_lo, b_lo);
}

WaveState random_state(gen::Rng& rng, int km, int kf) {
    return {rng.integer(1, km), rng.integer(1, kf), rng.uniform(-1, 1), rng.uniform(-1, 1),
            rng.uniform(-1, 1), rng.uniform(-1, 1)};
}

}  // namespace

TEST(JointPmfT, IndependenceCouplingFactorises) {
    gen::Rng rng(61);
    for (int rep = 0; rep < 30; ++rep) {
        JointModelParams jm = gen::joint_model(rng, 4, 3, 0, LinkFunction::Probit);
        jm.coupling = CopulaSpec::independence();
        const WaveState st = random_state(rng, 4, 3);
        // Conditional cdfs carry rounding of order eps / f(y_prev).
        if (ordinal_pmf(st.y_prev_male, st.mu_prev_male, jm.male.margin) < 1e-3 ||
            ordinal_pmf(st.y_prev_female, st.mu_prev_female, jm.female.margin) < 1e-3)
            continue;
        for (int a = 1; a <= 4; ++a) {
            for (int b = 1; b <= 3; ++b) {
                const double expected =
                    transition_pmf(a, st.y_prev_male, st.mu_male, st.mu_prev_male, jm.male) *
                    transition_pmf(b, st.y_prev_female, st.mu_female, st.mu_prev_female, jm.female);
                // Conditional cdfs differ from the pmf route by rounding of order
                // eps / f(y_prev) on values of order one.
                ASSERT_NEAR(joint_pmf_t(a, b, st, jm), expected, 1e-10);
            }
        }
    }
}

TEST(JointPmfT, TwoCategoryBvnCorner) {
    JointModelParams jm;
    jm.male = {{LinkFunction::Probit, {0.0}, {}}, CopulaSpec::independence()};
    jm.female = jm.male;
    jm.coupling = CopulaSpec::bvn(0.5);
    const WaveState st{1, 2, 0.0, 0.0, 0.0, 0.0};
    EXPECT_NEAR(joint_pmf_t(1, 1, st, jm), 1.0 / 3.0, 1e-12);
}

TEST(JointPmfT, MatchesBruteForceCopulaEnumeration) {
    gen::Rng rng(62);
    for (int rep = 0; rep < 60; ++rep) {
        const int km = rng.integer(2, 6);
        const int kf = rng.integer(2, 6);
        const JointModelParams jm = gen::joint_model(rng, km, kf, 0, LinkFunction::Logit);
        const WaveState st = random_state(rng, km, kf);
        const Eigen::MatrixXd table = joint_table_t(st, jm);
        ASSERT_EQ(table.rows(), km);
        ASSERT_EQ(table.cols(), kf);
        for (int a = 1; a <= km; ++a) {
            for (int b = 1; b <= kf; ++b) {
                ASSERT_NEAR(table(a - 1, b - 1), joint_oracle(a, b, st, jm), 1e-12);
                ASSERT_NEAR(joint_pmf_t(a, b, st, jm), table(a - 1, b - 1), 1e-13);
            }
        }
    }
}

TEST(JointTables, NormalisedAcrossFamilies) {
    gen::Rng rng(63);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const int km = rng.integer(2, 8);
        const int kf = rng.integer(2, 8);
        const JointModelParams jm = gen::joint_model(rng, km, kf, 0, LinkFunction::Probit);
        const WaveState st = random_state(rng, km, kf);
        worst = std::max(worst, std::abs(joint_table_t(st, jm).sum() - 1.0));
        worst = std::max(worst, std::abs(joint_table_initial(st.mu_male, st.mu_female, jm).sum() - 1.0));
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(JointPmfInitial, IndependenceAndExchangeability) {
    gen::Rng rng(64);
    JointModelParams jm = gen::joint_model(rng, 5, 5, 0, LinkFunction::Probit);
    jm.coupling = CopulaSpec::independence();
    for (int a = 1; a <= 5; ++a) {
        for (int b = 1; b <= 5; ++b) {
            EXPECT_NEAR(joint_pmf_initial(a, b, 0.2, -0.4, jm),
                        ordinal_pmf(a, 0.2, jm.male.margin) * ordinal_pmf(b, -0.4, jm.female.margin),
                        1e-14);
        }
    }
    jm.female = jm.male;
    for (CopulaFamily family : kAllFamilies) {
        jm.coupling = gen::copula(rng, family);
        for (int a = 1; a <= 5; ++a) {
            for (int b = 1; b <= 5; ++b) {
                EXPECT_NEAR(joint_pmf_initial(a, b, 0.3, 0.3, jm), joint_pmf_initial(b, a, 0.3, 0.3, jm),
                            1e-9)
                    << copula_label(jm.coupling);
            }
        }
    }
}

TEST(LoglikJoint, IndependenceCouplingIsSumOfMarkov) {
    gen::Rng rng(65);
    for (int rep = 0; rep < 10; ++rep) {
        const OrdinalPanel panel = gen::panel(rng, 50, 1, 7, 5, 4, 2);
        JointModelParams jm = gen::joint_model(rng, 5, 4, 2, LinkFunction::Probit);
        jm.coupling = CopulaSpec::independence();
        EXPECT_NEAR(loglik_joint(panel, jm),
                    loglik_markov(panel, Gender::Male, jm.male) +
                        loglik_markov(panel, Gender::Female, jm.female),
                    1e-9);
    }
}

TEST(LoglikJoint, ContributionsDecomposeTotal) {
    gen::Rng rng(66);
    const OrdinalPanel panel = gen::panel(rng, 70, 1, 7, 4, 4, 1);
    const JointModelParams jm = gen::joint_model(rng, 4, 4, 1, LinkFunction::Logit);
    const auto parts = loglik_joint_contributions(panel, jm);
    ASSERT_EQ(parts.size(), panel.couple_count());
    const double total = std::accumulate(parts.begin(), parts.end(), 0.0);
    EXPECT_NEAR(loglik_joint(panel, jm), total, 1e-9);
    const auto cached = coupling_contributions(panel, conditional_intervals(panel, Gender::Male, jm.male),
                                               conditional_intervals(panel, Gender::Female, jm.female),
                                               jm.coupling);
    for (std::size_t c = 0; c < parts.size(); ++c) EXPECT_NEAR(cached[c], parts[c], 1e-12);
}

TEST(LoglikJoint, ContributionOfOneCoupleByHand) {
    gen::Rng rng(67);
    const OrdinalPanel panel = gen::panel(rng, 1, 4, 4, 3, 4, 1);
    const JointModelParams jm = gen::joint_model(rng, 3, 4, 1, LinkFunction::Probit);
    const auto ym = panel.responses(Gender::Male);
    const auto yf = panel.responses(Gender::Female);
    const auto xm = panel.covariates(Gender::Male);
    const auto xf = panel.covariates(Gender::Female);
    const double bm = jm.male.margin.beta[0];
    const double bf = jm.female.margin.beta[0];
    double expected = std::log(joint_pmf_initial(ym[0], yf[0], bm * xm(0, 0), bf * xf(0, 0), jm));
    for (int t = 1; t < 4; ++t) {
        const WaveState st{ym[t - 1], yf[t - 1], bm * xm(t - 1, 0), bf * xf(t - 1, 0), bm * xm(t, 0),
                           bf * xf(t, 0)};
        expected += std::log(joint_pmf_t(ym[t], yf[t], st, jm));
    }
    EXPECT_NEAR(loglik_joint(panel, jm), expected, 1e-10);
}

TEST(LoglikJoint, PermutationInvariantToTheLastBit) {
    gen::Rng rng(68);
    const OrdinalPanel panel = gen::panel(rng, 150, 1, 7, 5, 5, 2);
    const JointModelParams jm = gen::joint_model(rng, 5, 5, 2, LinkFunction::Probit);
    std::vector<std::size_t> order(panel.couple_count());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng.engine());
    EXPECT_EQ(loglik_joint(panel, jm), loglik_joint(panel.select(order), jm));
}

TEST(LoglikJoint, DifferentCategoryCountsPerGender) {
    gen::Rng rng(69);
    const OrdinalPanel panel = gen::panel(rng, 20, 2, 5, 2, 7, 0);
    const JointModelParams jm = gen::joint_model(rng, 2, 7, 0, LinkFunction::Probit);
    EXPECT_TRUE(std::isfinite(loglik_joint(panel, jm)));
    JointModelParams wrong = jm;
    std::swap(wrong.male, wrong.female);
    EXPECT_THROW(loglik_joint(panel, wrong), DomainError);
}
