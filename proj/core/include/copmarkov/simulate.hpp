#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "copmarkov/coupling.hpp"
#include "copmarkov/panel.hpp"

namespace copmarkov {

/// SplitMix64: a 64-bit counter-based generator. Each couple draws from its
/// own stream keyed by (seed, couple index), so a couple's draws do not
/// depend on how many couples precede it or on scheduling.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}
    /// Stream for one couple.
    static SplitMix64 keyed(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next();
    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();
    double normal();

private:
    std::uint64_t state_;
};

enum class CovariateDesign {
    /// No covariates: mu = 0 everywhere.
    None,
    /// p independent standard normal columns per gender, drawn per couple-wave.
    StandardNormal,
    /// User-supplied matrices with one row per couple-wave (couple-major order).
    Fixed,
};

struct SimDesign {
    std::size_t couples = 1;
    std::size_t waves = 1;
    CovariateDesign covariates = CovariateDesign::None;
    /// Column count for StandardNormal.
    int covariate_dim = 0;
    /// Used with Fixed; both need couples * waves rows.
    Eigen::MatrixXd fixed_male;
    Eigen::MatrixXd fixed_female;
    std::uint64_t seed = 0;
};

/// Largest category count the table sampler accepts.
inline constexpr int kMaxSimulatedCategories = 15;

/// Draws a panel from the joint model: wave 1 from the initial joint table,
/// later waves from the transition table given the realised previous
/// categories. Tables are inverted in row-major (male, female) order using
/// one uniform per couple-wave.
OrdinalPanel simulate_panel(const JointModelParams& jm, const SimDesign& design);

enum class Pairing {
    /// (male, female) at the same wave.
    WithinCouple,
    /// (previous wave, current wave) of one series.
    Lag,
};

/// Kendall's tau-b of the requested response pairs. Throws DegenerateResult
/// when fewer than two pairs exist or either coordinate is constant.
double empirical_tau(const OrdinalPanel& panel, Pairing pairing, Gender gender = Gender::Male);

/// Tau-b of a contingency table of counts or probabilities.
double tau_b_from_table(const Eigen::MatrixXd& table);

}  // namespace copmarkov
