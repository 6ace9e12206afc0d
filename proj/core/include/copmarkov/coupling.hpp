#pragma once

#include <vector>

#include "copmarkov/copula.hpp"
#include "copmarkov/markov.hpp"
#include "copmarkov/panel.hpp"

namespace copmarkov {

/// Full parameter set: a serial model per gender plus the coupling copula
/// joining the two conditional-on-past distributions at every wave.
struct JointModelParams {
    SerialModel male;
    SerialModel female;
    CopulaSpec coupling;

    const SerialModel& serial(Gender gender) const {
        return gender == Gender::Male ? male : female;
    }
    SerialModel& serial(Gender gender) { return gender == Gender::Male ? male : female; }
};

/// Previous-wave categories and linear predictors of both series.
struct WaveState {
    int y_prev_male;
    int y_prev_female;
    double mu_prev_male;
    double mu_prev_female;
    double mu_male;
    double mu_female;
};

/// Joint pmf of (Y_t1, Y_t2) given the previous wave.
double joint_pmf_t(int y_male, int y_female, const WaveState& state, const JointModelParams& jm);
/// Joint pmf at a couple's first wave (coupling copula over the static margins).
double joint_pmf_initial(int y_male, int y_female, double mu_male, double mu_female,
                         const JointModelParams& jm);

/// Full K1 x K2 table of joint_pmf_t (row = male category - 1).
Eigen::MatrixXd joint_table_t(const WaveState& state, const JointModelParams& jm);
Eigen::MatrixXd joint_table_initial(double mu_male, double mu_female, const JointModelParams& jm);

/// Per-couple log-likelihood contributions (first wave plus all transitions).
std::vector<double> loglik_joint_contributions(const OrdinalPanel& panel, const JointModelParams& jm,
                                               LoglikStats* stats = nullptr);

/// Joint log-likelihood, summed independently of couple order.
double loglik_joint(const OrdinalPanel& panel, const JointModelParams& jm,
                    LoglikStats* stats = nullptr);

/// Contributions from precomputed conditional intervals of both series.
std::vector<double> coupling_contributions(const OrdinalPanel& panel,
                                           const std::vector<CdfInterval>& male,
                                           const std::vector<CdfInterval>& female,
                                           const CopulaSpec& coupling, LoglikStats* stats = nullptr);

}  // namespace copmarkov
