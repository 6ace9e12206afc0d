#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "copmarkov/coupling.hpp"
#include "copmarkov/optimizer.hpp"

namespace copmarkov {

/// Copula families to fit: one serial family per gender and a coupling
/// family. Only `family` and `nu` are read; the dependence parameters are
/// initialised from the data.
struct FamilyChoice {
    CopulaSpec serial_male = CopulaSpec::independence();
    CopulaSpec serial_female = CopulaSpec::independence();
    CopulaSpec coupling = CopulaSpec::independence();

    const CopulaSpec& serial(Gender gender) const {
        return gender == Gender::Male ? serial_male : serial_female;
    }
};

/// Outcome of one optimisation stage.
struct StageRecord {
    std::string label;
    double loglik = 0.0;
    int iterations = 0;
    double grad_norm = 0.0;
    OptimizerStatus status = OptimizerStatus::Converged;
};

/// Stage 1a: margin fitted under serial independence.
struct MarginFit {
    Gender gender = Gender::Male;
    MarginalParams margin;
    double loglik = 0.0;
    StageRecord stage;
};

/// Stages 1a-1c for one series.
struct SerialFit {
    Gender gender = Gender::Male;
    MarginFit independent;
    /// Stage 1b: serial copula with the stage 1a margin held fixed.
    SerialModel partial;
    double loglik_partial = 0.0;
    /// Stage 1c: margin and serial copula jointly.
    SerialModel model;
    double loglik = 0.0;
    std::vector<StageRecord> stages;
};

/// Standard errors in natural coordinates, laid out like JointModelParams.
struct ParameterErrors {
    std::vector<double> cutpoints_male;
    std::vector<double> beta_male;
    std::vector<double> cutpoints_female;
    std::vector<double> beta_female;
    double theta_male = 0.0;
    double theta_female = 0.0;
    double theta_coupling = 0.0;
    double tau_male = 0.0;
    double tau_female = 0.0;
    double tau_coupling = 0.0;
};

struct StandardErrorResult {
    /// Empty when the observed information is not positive definite.
    std::optional<ParameterErrors> errors;
    /// Eigenvalues of the observed information in unconstrained coordinates.
    std::vector<double> information_eigenvalues;
};

struct FitReport {
    FamilyChoice families;
    LinkFunction link = LinkFunction::Probit;
    std::vector<std::string> covariate_names_male;
    std::vector<std::string> covariate_names_female;

    double loglik_indep_male = 0.0;
    double loglik_indep_female = 0.0;
    double loglik_partial_male = 0.0;
    double loglik_partial_female = 0.0;
    double loglik_markov_male = 0.0;
    double loglik_markov_female = 0.0;
    double loglik_joint_stage4 = 0.0;
    double loglik_joint = 0.0;
    /// loglik_joint minus the sum of the two Markov log-likelihoods.
    double dependence_gain = 0.0;

    JointModelParams estimates;
    double tau_male = 0.0;
    double tau_female = 0.0;
    double tau_coupling = 0.0;
    std::optional<ParameterErrors> errors;
    std::vector<double> information_eigenvalues;

    std::vector<StageRecord> stages;
    std::size_t floored_terms = 0;
    std::string convention_note;
};

/// Gain of the joint model over two independent Markov models.
double dependence_gain(double loglik_joint, double loglik_markov_male, double loglik_markov_female);

/// Cutpoint coding used by the optimiser: alpha_1 free, alpha_{k+1} = alpha_k + exp(d_k).
Eigen::VectorXd encode_margin(const MarginalParams& margin);
MarginalParams decode_margin(std::span<const double> x, LinkFunction link, int categories,
                             int covariates);
/// Unconstrained vector [male margin, male theta, female margin, female theta, coupling theta].
Eigen::VectorXd encode_joint(const JointModelParams& jm);
JointModelParams decode_joint(const Eigen::VectorXd& x, const JointModelParams& shape);

/// Cutpoints from the link quantiles of the smoothed cumulative category
/// proportions, beta = 0.
MarginalParams initial_margin(const OrdinalPanel& panel, Gender gender, LinkFunction link);

MarginFit fit_margin(const OrdinalPanel& panel, Gender gender, LinkFunction link,
                     const OptimizerSettings& settings);
SerialFit fit_serial(const OrdinalPanel& panel, const MarginFit& margin, const CopulaSpec& family,
                     const OptimizerSettings& settings);
SerialFit fit_serial(const OrdinalPanel& panel, Gender gender, const CopulaSpec& family,
                     LinkFunction link, const OptimizerSettings& settings);

/// Stages 4 and 5 given the two serial fits; standard errors are optional
/// because they dominate the cost of a scan.
FitReport fit_joint(const OrdinalPanel& panel, const SerialFit& male, const SerialFit& female,
                    const CopulaSpec& coupling_family, const OptimizerSettings& settings,
                    bool with_standard_errors = true);

/// The full staged procedure: 1a-1c per gender, then 4 and 5.
FitReport fit_stagewise(const OrdinalPanel& panel, const FamilyChoice& families, LinkFunction link,
                        const OptimizerSettings& settings, bool with_standard_errors = true);

/// Square roots of the diagonal of the inverse observed information, mapped
/// to natural coordinates by the delta method.
StandardErrorResult standard_errors(const OrdinalPanel& panel, const JointModelParams& jm);

struct WaldResult {
    double z = 0.0;
    double p_value = 1.0;
};

/// z = estimate / se with a two-sided normal p-value.
WaldResult wald_test(double estimate, double se);

}  // namespace copmarkov
