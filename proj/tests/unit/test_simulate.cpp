#include <array>
#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "copmarkov/error.hpp"
#include "copmarkov/parallel.hpp"
#include "copmarkov/simulate.hpp"
#include "copmarkov/special_functions.hpp"
#include "generators.hpp"

using namespace copmarkov;

namespace {

JointModelParams model_k(int k, const CopulaSpec& serial, const CopulaSpec& coupling) {
    MarginalParams m;
    for (int j = 1; j < k; ++j) m.cutpoints.push_back(-1.0 + 2.0 * j / k);
    JointModelParams jm;
    jm.male = {m, serial};
    jm.female = {m, serial};
    jm.coupling = coupling;
    return jm;
}

bool same_panel(const OrdinalPanel& a, const OrdinalPanel& b) {
    if (a.couple_count() != b.couple_count()) return false;
    for (Gender g : {Gender::Male, Gender::Female}) {
        const auto ya = a.responses(g);
        const auto yb = b.responses(g);
        if (!std::equal(ya.begin(), ya.end(), yb.begin(), yb.end())) return false;
        if (a.covariates(g) != b.covariates(g)) return false;
    }
    return true;
}

}  // namespace

TEST(SplitMix64, KnownSequenceAndUniformRange) {
    // Reference outputs of the published SplitMix64 for state 0.
    SplitMix64 r(0);
    EXPECT_EQ(r.next(), 0xe220a8397b1dcdafULL);
    EXPECT_EQ(r.next(), 0x6e789e6aa1b965f4ULL);
    EXPECT_EQ(r.next(), 0x06c45d188009454fULL);
    SplitMix64 u(7);
    for (int i = 0; i < 100000; ++i) {
        const double x = u.uniform();
        ASSERT_GT(x, 0.0);
        ASSERT_LT(x, 1.0);
    }
}

TEST(SimulatePanel, SameSeedSameBits) {
    gen::Rng rng(1);
    const JointModelParams jm = gen::joint_model(rng, 5, 4, 2, LinkFunction::Probit);
    SimDesign d;
    d.couples = 300;
    d.waves = 6;
    d.covariates = CovariateDesign::StandardNormal;
    d.covariate_dim = 2;
    d.seed = 2024;
    const OrdinalPanel a = simulate_panel(jm, d);
    const OrdinalPanel b = simulate_panel(jm, d);
    EXPECT_TRUE(same_panel(a, b));
    d.seed = 2025;
    EXPECT_FALSE(same_panel(a, simulate_panel(jm, d)));
}

TEST(SimulatePanel, ThreadCountDoesNotChangeDraws) {
    gen::Rng rng(2);
    const JointModelParams jm = gen::joint_model(rng, 4, 4, 1, LinkFunction::Logit);
    SimDesign d;
    d.couples = 257;
    d.waves = 4;
    d.covariates = CovariateDesign::StandardNormal;
    d.covariate_dim = 1;
    d.seed = 99;
    const std::size_t before = worker_threads();
    set_worker_threads(1);
    const OrdinalPanel one = simulate_panel(jm, d);
    set_worker_threads(4);
    const OrdinalPanel four = simulate_panel(jm, d);
    set_worker_threads(before);
    EXPECT_TRUE(same_panel(one, four));
}

TEST(SimulatePanel, PrefixOfCouplesIsStable) {
    gen::Rng rng(3);
    const JointModelParams jm = gen::joint_model(rng, 3, 3, 0, LinkFunction::Probit);
    SimDesign d;
    d.couples = 40;
    d.waves = 3;
    d.seed = 5;
    const OrdinalPanel big = simulate_panel(jm, d);
    d.couples = 10;
    const OrdinalPanel small = simulate_panel(jm, d);
    for (std::size_t i = 0; i < small.observation_count(); ++i) {
        ASSERT_EQ(small.responses(Gender::Male)[i], big.responses(Gender::Male)[i]);
        ASSERT_EQ(small.responses(Gender::Female)[i], big.responses(Gender::Female)[i]);
    }
}

TEST(SimulatePanel, ComonotoneSerialCopulaFreezesCategories) {
    const JointModelParams jm = model_k(5, CopulaSpec::bvn(1.0), CopulaSpec::frank(4.0));
    SimDesign d;
    d.couples = 200;
    d.waves = 8;
    d.seed = 11;
    const OrdinalPanel p = simulate_panel(jm, d);
    for (Gender g : {Gender::Male, Gender::Female}) {
        for (std::size_t c = 0; c < p.couple_count(); ++c) {
            const auto y = p.responses(g, c);
            for (std::size_t t = 1; t < y.size(); ++t) ASSERT_EQ(y[t], y[0]);
        }
    }
}

TEST(SimulatePanel, IndependenceFrequenciesMatchMargins) {
    const JointModelParams jm = model_k(4, CopulaSpec::independence(), CopulaSpec::independence());
    SimDesign d;
    d.couples = 10000;
    d.waves = 10;
    d.seed = 12;
    const OrdinalPanel p = simulate_panel(jm, d);
    for (Gender g : {Gender::Male, Gender::Female}) {
        std::array<double, 5> counts{};
        for (int y : p.responses(g)) counts[y] += 1.0;
        for (int k = 1; k <= 4; ++k) {
            EXPECT_NEAR(counts[k] / 1e5, ordinal_pmf(k, 0.0, jm.male.margin), 0.01);
        }
    }
}

TEST(SimulatePanel, TwoWaveBinaryPathsMatchModel) {
    JointModelParams jm = model_k(2, CopulaSpec::gumbel(2.0), CopulaSpec::bvn(0.4));
    jm.female.copula = CopulaSpec::frank(-3.0);
    jm.female.margin.cutpoints = {0.4};
    SimDesign d;
    d.couples = 100000;
    d.waves = 2;
    d.seed = 13;
    const OrdinalPanel p = simulate_panel(jm, d);
    std::map<std::array<int, 4>, double> freq;
    for (std::size_t c = 0; c < p.couple_count(); ++c) {
        const auto ym = p.responses(Gender::Male, c);
        const auto yf = p.responses(Gender::Female, c);
        freq[{ym[0], yf[0], ym[1], yf[1]}] += 1.0;
    }
    const double n = static_cast<double>(d.couples);
    double total = 0.0;
    for (int a = 1; a <= 2; ++a) {
        for (int b = 1; b <= 2; ++b) {
            for (int c = 1; c <= 2; ++c) {
                for (int e = 1; e <= 2; ++e) {
                    const double prob =
                        joint_pmf_initial(a, b, 0, 0, jm) * joint_pmf_t(c, e, {a, b, 0, 0, 0, 0}, jm);
                    total += prob;
                    const double se = std::sqrt(prob * (1 - prob) / n);
                    const std::array<int, 4> path{a, b, c, e};
                    EXPECT_NEAR(freq[path] / n, prob, 3 * se) << a << b << c << e;
                }
            }
        }
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(SimulatePanel, DesignValidation) {
    const JointModelParams jm = model_k(3, CopulaSpec::bvn(0.2), CopulaSpec::bvn(0.2));
    SimDesign d;
    d.couples = 0;
    EXPECT_THROW(simulate_panel(jm, d), DomainError);
    d.couples = 5;
    d.covariates = CovariateDesign::StandardNormal;
    EXPECT_THROW(simulate_panel(jm, d), DomainError);
    d.covariates = CovariateDesign::None;
    const JointModelParams big = model_k(16, CopulaSpec::bvn(0.2), CopulaSpec::bvn(0.2));
    EXPECT_THROW(simulate_panel(big, d), DomainError);
    const JointModelParams edge = model_k(15, CopulaSpec::bvn(0.2), CopulaSpec::bvn(0.2));
    EXPECT_NO_THROW(simulate_panel(edge, d));
}

TEST(SimulatePanel, FixedDesignUsesGivenCovariates) {
    JointModelParams jm = model_k(3, CopulaSpec::bvn(0.3), CopulaSpec::bvn(0.3));
    jm.male.margin.beta = {0.5};
    jm.female.margin.beta = {-0.5};
    SimDesign d;
    d.couples = 3;
    d.waves = 2;
    d.covariates = CovariateDesign::Fixed;
    d.fixed_male = Eigen::MatrixXd::Constant(6, 1, 1.5);
    d.fixed_female = Eigen::MatrixXd::Constant(6, 1, -2.0);
    const OrdinalPanel p = simulate_panel(jm, d);
    EXPECT_EQ(p.covariates(Gender::Male), d.fixed_male);
    EXPECT_EQ(p.covariates(Gender::Female), d.fixed_female);
    d.fixed_female = Eigen::MatrixXd::Zero(5, 1);
    EXPECT_THROW(simulate_panel(jm, d), DomainError);
}

TEST(TauB, TablesAndDegenerateCases) {
    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(3, 3);
    diag.diagonal().setConstant(10.0);
    EXPECT_NEAR(tau_b_from_table(diag), 1.0, 1e-15);
    Eigen::MatrixXd anti = Eigen::MatrixXd::Zero(3, 3);
    anti(0, 2) = anti(1, 1) = anti(2, 0) = 1.0;
    EXPECT_NEAR(tau_b_from_table(anti), -1.0, 1e-15);
    EXPECT_NEAR(tau_b_from_table(Eigen::MatrixXd::Ones(4, 3)), 0.0, 1e-15);
    // 2x2 table: tau-b equals the phi coefficient.
    Eigen::MatrixXd t(2, 2);
    t << 20, 5, 10, 15;
    const double phi = (20.0 * 15 - 5.0 * 10) / std::sqrt(25.0 * 25 * 30 * 20);
    EXPECT_NEAR(tau_b_from_table(t), phi, 1e-14);
    Eigen::MatrixXd bad = t;
    bad(0, 0) = -1;
    EXPECT_THROW(tau_b_from_table(bad), DomainError);
    Eigen::MatrixXd row = Eigen::MatrixXd::Zero(2, 2);
    row(0, 0) = row(0, 1) = 3;
    EXPECT_THROW(tau_b_from_table(row), DegenerateResult);
}

TEST(EmpiricalTau, PerfectAndIndependentPairs) {
    OrdinalPanel perfect(5, 5, 0);
    for (int c = 0; c < 50; ++c) {
        const int y = 1 + c % 5;
        perfect.add_couple("c" + std::to_string(c), 1, {y, 1 + (c + 1) % 5}, {y, 1 + (c + 1) % 5},
                           Eigen::MatrixXd(2, 0), Eigen::MatrixXd(2, 0));
    }
    EXPECT_NEAR(empirical_tau(perfect, Pairing::WithinCouple), 1.0, 1e-15);

    const JointModelParams ind = model_k(5, CopulaSpec::independence(), CopulaSpec::independence());
    SimDesign d;
    d.couples = 10000;
    d.waves = 3;
    d.seed = 14;
    const OrdinalPanel p = simulate_panel(ind, d);
    EXPECT_LT(std::abs(empirical_tau(p, Pairing::WithinCouple)), 0.02);
    EXPECT_LT(std::abs(empirical_tau(p, Pairing::Lag, Gender::Female)), 0.02);

    OrdinalPanel one(3, 3, 0);
    one.add_couple("a", 1, {1}, {2}, Eigen::MatrixXd(1, 0), Eigen::MatrixXd(1, 0));
    EXPECT_THROW(empirical_tau(one, Pairing::WithinCouple), DegenerateResult);
    EXPECT_THROW(empirical_tau(one, Pairing::Lag), DegenerateResult);
}

TEST(EmpiricalTau, DiscretisationAttenuatesTowardsTableValue) {
    const double tau = 0.2;
    const CopulaSpec coupling = tau_inverse(CopulaFamily::BVN, tau);
    JointModelParams jm = model_k(11, CopulaSpec::independence(), coupling);
    // Skewed categories, three quarters of the mass in the top one, as on a
    // satisfaction scale. With balanced categories tau-b overshoots tau
    // (about 0.213 at K = 11) because ties shrink its denominator.
    for (int j = 1; j < 11; ++j) jm.male.margin.cutpoints[j - 1] = norm_quantile(0.25 * j / 10.0);
    jm.female.margin = jm.male.margin;
    const double table_tau = tau_b_from_table(joint_table_initial(0, 0, jm));
    EXPECT_GT(table_tau, 0.1);
    EXPECT_LT(table_tau, tau);
    SimDesign d;
    d.couples = 20000;
    d.waves = 1;
    d.seed = 15;
    const double sample = empirical_tau(simulate_panel(jm, d), Pairing::WithinCouple);
    EXPECT_GT(sample, 0.1);
    EXPECT_LT(sample, tau);
    EXPECT_NEAR(sample, table_tau, 0.02);
}
