#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "copmarkov/error.hpp"
#include "copmarkov/special_functions.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace copmarkov;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double center(double rho) { return 0.25 + std::asin(rho) / (2.0 * std::numbers::pi); }
}  // namespace

TEST(NormCdf, SymmetryAndKnownValues) {
    EXPECT_EQ(norm_cdf(0.0), 0.5);
    for (double x = -6.0; x <= 6.0; x += 0.37) {
        EXPECT_NEAR(norm_cdf(-x), 1.0 - norm_cdf(x), 1e-15);
    }
    const double oracle = 0.5 * (1.0 + oracle::erf_series(1.96 / std::numbers::sqrt2));
    EXPECT_NEAR(norm_cdf(1.96), oracle, 1e-12);
    EXPECT_NEAR(norm_cdf(1.96), 0.9750021048517795, 1e-12);
}

TEST(NormCdf, AgreesWithSeriesOracle) {
    for (double x = -4.0; x <= 4.0; x += 0.125) {
        const double oracle = 0.5 * (1.0 + oracle::erf_series(x / std::numbers::sqrt2));
        EXPECT_NEAR(norm_cdf(x), oracle, 1e-13) << x;
    }
}

TEST(NormCdf, SaturatesAndHandlesInfinity) {
    EXPECT_EQ(norm_cdf(-39.0), 0.0);
    EXPECT_EQ(norm_cdf(39.0), 1.0);
    EXPECT_EQ(norm_cdf(-kInf), 0.0);
    EXPECT_EQ(norm_cdf(kInf), 1.0);
}

TEST(NormCdf, MonotoneOnFineGrid) {
    double prev = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double v = norm_cdf(-10.0 + 20.0 * i / 10000.0);
        ASSERT_GE(v, prev);
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
        prev = v;
    }
}

TEST(NormQuantile, KnownValuesAndBisection) {
    EXPECT_EQ(norm_quantile(0.5), 0.0);
    EXPECT_NEAR(norm_quantile(norm_cdf(1.3)), 1.3, 1e-10);
    const double bisected = oracle::bisect([](double x) { return oracle::phi_cdf(x) - 0.975; }, 0, 5);
    EXPECT_NEAR(norm_quantile(0.975), bisected, 1e-10);
    EXPECT_NEAR(norm_quantile(0.975), 1.959963984540054, 1e-12);
}

TEST(NormQuantile, RejectsOutOfRange) {
    EXPECT_THROW(norm_quantile(0.0), DomainError);
    EXPECT_THROW(norm_quantile(1.0), DomainError);
    EXPECT_THROW(norm_quantile(-0.1), DomainError);
    EXPECT_THROW(norm_quantile(std::nan("")), DomainError);
}

TEST(NormQuantile, RoundTripAcrossRange) {
    for (double lp = -8.0; lp <= -0.31; lp += 0.05) {
        for (double p : {std::pow(10.0, lp), 1.0 - std::pow(10.0, lp)}) {
            const double back = norm_cdf(norm_quantile(p));
            EXPECT_LT(std::abs(back - p), 1e-9) << p;
        }
    }
}

TEST(TCdf, KnownValues) {
    EXPECT_EQ(t_cdf(0.0, 3.0), 0.5);
    EXPECT_NEAR(t_cdf(0.0, 2.5), 0.5, 1e-15);
    EXPECT_NEAR(t_cdf(1.0, 1.0), 0.75, 1e-15);
    EXPECT_NEAR(t_cdf(2.0, 5.0), oracle::t_cdf(2.0, 5.0), 1e-13);
    EXPECT_NEAR(t_cdf(2.0, 5.0), 0.94903026, 1e-8);
}

TEST(TCdf, AgreesWithIncompleteBetaOracle) {
    for (double nu : {0.5, 1.0, 1.7, 2.0, 3.0, 4.0, 5.5, 7.0, 10.0, 30.0, 250.0}) {
        for (double x = -25.0; x <= 25.0; x += 0.731) {
            const double ref = oracle::t_cdf(x, nu);
            EXPECT_NEAR(t_cdf(x, nu), ref, 1e-13 + 1e-10 * std::min(ref, 1.0 - ref))
                << "x=" << x << " nu=" << nu;
        }
    }
}

TEST(TCdf, MonotoneAndRejectsBadNu) {
    for (double nu : {1.0, 4.0, 6.5}) {
        double prev = 0.0;
        for (int i = 0; i <= 10000; ++i) {
            const double v = t_cdf(-50.0 + 100.0 * i / 10000.0, nu);
            ASSERT_GE(v, prev);
            ASSERT_LE(v, 1.0);
            prev = v;
        }
    }
    EXPECT_THROW(t_cdf(0.0, 0.0), DomainError);
    EXPECT_THROW(t_cdf(0.0, -2.0), DomainError);
    EXPECT_EQ(t_cdf(-kInf, 3.0), 0.0);
    EXPECT_EQ(t_cdf(kInf, 3.0), 1.0);
}

TEST(TQuantile, MatchesIndependentCdfAcrossDegreesOfFreedom) {
    for (double nu : {1.0, 1.5, 2.0, 3.0, 7.0, 25.0, 150.0, 400.0}) {
        for (double lp = -9.0; lp <= -0.31; lp += 0.25) {
            const double tail = std::pow(10.0, lp);
            const double q = t_quantile(tail, nu);
            EXPECT_NEAR(oracle::t_cdf(q, nu), tail, 1e-8 * tail) << nu << " " << tail;
        }
    }
}

TEST(TQuantile, KnownValuesAndRoundTrip) {
    EXPECT_EQ(t_quantile(0.5, 3.0), 0.0);
    EXPECT_NEAR(t_quantile(0.75, 1.0), 1.0, 1e-12);
    const double bisected =
        oracle::bisect([](double x) { return oracle::t_cdf(x, 5.0) - 0.95; }, 0.0, 10.0);
    EXPECT_NEAR(t_quantile(0.95, 5.0), bisected, 1e-9);
    EXPECT_NEAR(t_quantile(0.95, 5.0), 2.015048373, 1e-8);
    for (double nu : {1.0, 2.0, 3.0, 4.5, 10.0}) {
        for (double lp = -8.0; lp <= -0.31; lp += 0.1) {
            for (double p : {std::pow(10.0, lp), 1.0 - std::pow(10.0, lp)}) {
                EXPECT_LT(std::abs(t_cdf(t_quantile(p, nu), nu) - p), 1e-9) << p << " " << nu;
            }
        }
    }
    EXPECT_THROW(t_quantile(1.0, 3.0), DomainError);
    EXPECT_THROW(t_quantile(0.3, 0.0), DomainError);
}

TEST(BvnCdf, CenterValueClosedForm) {
    EXPECT_NEAR(bvn_cdf(0.0, 0.0, 0.5), 1.0 / 3.0, 1e-12);
    for (int i = -9; i <= 9; ++i) {
        const double rho = i / 10.0;
        EXPECT_LE(std::abs(bvn_cdf(0.0, 0.0, rho) - center(rho)), 1e-7) << rho;
    }
}

TEST(BvnCdf, IndependenceAndMargins) {
    for (double x = -3.0; x <= 3.0; x += 0.7) {
        for (double y = -3.0; y <= 3.0; y += 0.9) {
            EXPECT_NEAR(bvn_cdf(x, y, 0.0), norm_cdf(x) * norm_cdf(y), 1e-14);
            EXPECT_NEAR(bvn_cdf(kInf, y, 0.6), norm_cdf(y), 1e-15);
            EXPECT_NEAR(bvn_cdf(x, kInf, -0.6), norm_cdf(x), 1e-15);
        }
    }
}

TEST(BvnCdf, AgreesWithQuadratureOracle) {
    gen::Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform(-4, 4);
        const double y = rng.uniform(-4, 4);
        const double rho = rng.uniform(-0.99, 0.99);
        EXPECT_NEAR(bvn_cdf(x, y, rho), oracle::bvn_cdf(x, y, rho), 1e-7)
            << x << " " << y << " " << rho;
    }
}

TEST(BvnCdf, ExactSymmetryAndRectangles) {
    gen::Rng rng(12);
    for (int i = 0; i < 2000; ++i) {
        const double x = rng.uniform(-5, 5);
        const double y = rng.uniform(-5, 5);
        const double rho = rng.uniform(-1, 1);
        ASSERT_EQ(bvn_cdf(x, y, rho), bvn_cdf(y, x, rho));
        const double x2 = x + rng.uniform(0, 2);
        const double y2 = y + rng.uniform(0, 2);
        const double rect =
            bvn_cdf(x2, y2, rho) - bvn_cdf(x, y2, rho) - bvn_cdf(x2, y, rho) + bvn_cdf(x, y, rho);
        ASSERT_GE(rect, -1e-12);
    }
}

TEST(BvnCdf, FrechetLimitsAndErrors) {
    EXPECT_NEAR(bvn_cdf(0.3, -0.2, 1.0), norm_cdf(-0.2), 1e-15);
    EXPECT_NEAR(bvn_cdf(0.3, -0.2, -1.0), std::max(0.0, norm_cdf(0.3) + norm_cdf(-0.2) - 1.0), 1e-15);
    EXPECT_THROW(bvn_cdf(0.0, 0.0, 1.2), DomainError);
    EXPECT_EQ(bvn_cdf(-40.0, 0.0, 0.3), 0.0);
}

TEST(BvtCdf, CenterValueForIntegerNu) {
    for (int nu = 1; nu <= 10; ++nu) {
        for (int i = -9; i <= 9; ++i) {
            const double rho = i / 10.0;
            EXPECT_LE(std::abs(bvt_cdf(0.0, 0.0, rho, nu) - center(rho)), 1e-6) << nu << " " << rho;
        }
    }
    EXPECT_LE(std::abs(bvt_cdf(0.0, 0.0, 0.35, 2.5) - center(0.35)), 1e-6);
}

TEST(BvtCdf, MarginsAndLargeNuLimit) {
    for (double nu : {1.0, 3.0, 4.5}) {
        for (double x = -4.0; x <= 4.0; x += 0.8) {
            EXPECT_NEAR(bvt_cdf(x, kInf, 0.4, nu), t_cdf(x, nu), 1e-12);
            EXPECT_NEAR(bvt_cdf(kInf, x, -0.4, nu), t_cdf(x, nu), 1e-12);
        }
    }
    EXPECT_NEAR(bvt_cdf(1.0, 1.0, 0.5, 1000.0), bvn_cdf(1.0, 1.0, 0.5), 1e-3);
    EXPECT_THROW(bvt_cdf(0.0, 0.0, 0.5, 0.0), DomainError);
    EXPECT_THROW(bvt_cdf(0.0, 0.0, -1.5, 4.0), DomainError);
}

TEST(BvtCdf, AgreesWithQuadratureOracle) {
    gen::Rng rng(13);
    for (int i = 0; i < 40; ++i) {
        const double x = rng.uniform(-4, 4);
        const double y = rng.uniform(-4, 4);
        const double rho = rng.uniform(-0.95, 0.95);
        const double nu = i % 2 == 0 ? rng.integer(1, 10) : rng.uniform(0.8, 12.0);
        EXPECT_NEAR(bvt_cdf(x, y, rho, nu), oracle::bvt_cdf(x, y, rho, nu), 1e-6)
            << x << " " << y << " " << rho << " " << nu;
    }
}

TEST(BvtCdf, IntegerAndQuadratureRoutesAgree) {
    gen::Rng rng(14);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform(-5, 5);
        const double y = rng.uniform(-5, 5);
        const double rho = rng.uniform(-0.95, 0.95);
        const int nu = rng.integer(1, 12);
        EXPECT_NEAR(detail::bvt_cdf_integer(x, y, rho, nu),
                    detail::bvt_cdf_quadrature(x, y, rho, nu), 1e-8);
    }
}

TEST(Debye1, KnownValuesAndLimits) {
    EXPECT_NEAR(debye1(1.0), oracle::debye1(1.0), 1e-12);
    EXPECT_NEAR(debye1(1.0), 0.777504634112248, 1e-10);
    EXPECT_NEAR(debye1(10.0), oracle::debye1(10.0), 1e-12);
    EXPECT_NEAR(debye1(10.0), 0.164443465679946, 1e-10);
    EXPECT_NEAR(debye1(1e-8), 1.0, 1e-8);
    EXPECT_NEAR(debye1(-1e-8), 1.0, 1e-8);
    EXPECT_THROW(debye1(0.0), DomainError);
}

TEST(Debye1, AgreesWithOracleAndStaysInUnitInterval) {
    for (double x = -30.0; x <= 30.0; x += 0.613) {
        if (std::abs(x) < 1e-12) continue;
        EXPECT_NEAR(debye1(x), oracle::debye1(x), 1e-10) << x;
        if (x > 0) {
            EXPECT_GT(debye1(x), 0.0);
            EXPECT_LT(debye1(x), 1.0);
        }
    }
    for (double x : {5e-5, 9e-5, 1.1e-4, -9e-5}) EXPECT_NEAR(debye1(x), oracle::debye1(x), 1e-10);
}
