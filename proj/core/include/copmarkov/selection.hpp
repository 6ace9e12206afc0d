#pragma once

#include <optional>
#include <string>
#include <vector>

#include "copmarkov/estimation.hpp"

namespace copmarkov {

/// Copula templates to try. Student t entries are expanded over `t_df`.
struct CandidateSet {
    std::vector<CopulaFamily> families;
    std::vector<int> t_df;

    /// BVN, Frank, Gumbel, s.Gumbel and t with 1..10 degrees of freedom.
    static CandidateSet defaults();
    /// Templates in the fixed tie-break order: BVN, Frank, Gumbel, s.Gumbel, t1, t2, ...
    std::vector<CopulaSpec> expand() const;
};

/// Parses "bvn,frank,gumbel,sgumbel,t" style lists; a bare "t" uses `t_df`,
/// "t4" adds that one member.
CandidateSet parse_candidates(const std::string& list, const std::vector<int>& t_df);

struct SerialCandidate {
    CopulaSpec family;
    std::optional<SerialFit> fit;
    std::string failure;
    double loglik() const;
};

struct CouplingCandidate {
    CopulaSpec family;
    std::optional<FitReport> fit;
    std::string failure;
    double loglik() const;
};

/// Candidates ordered by maximised log-likelihood (failures last); ties keep
/// candidate order.
struct SerialScan {
    Gender gender = Gender::Male;
    MarginFit independent;
    std::vector<SerialCandidate> ranked;
};

struct CouplingScan {
    std::vector<CouplingCandidate> ranked;
};

/// Stage 1a once, then stages 1b-1c per candidate. Throws NumericalFailure
/// only when every candidate fails.
SerialScan scan_serial(const OrdinalPanel& panel, Gender gender, const CandidateSet& candidates,
                       LinkFunction link, const OptimizerSettings& settings);

/// Stages 4-5 per coupling candidate with the serial fits held at their
/// stage 1c values.
CouplingScan scan_coupling(const OrdinalPanel& panel, const SerialFit& male, const SerialFit& female,
                           const CandidateSet& candidates, const OptimizerSettings& settings,
                           bool with_standard_errors = false);

struct VuongResult {
    double mean = 0.0;
    double sd = 0.0;
    double z = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

/// D_i = per-couple log-likelihood of fit2 minus fit1; z = sqrt(N) mean / sd
/// with a two-sided normal p-value. Model 1 fits better when the mean is negative.
/// Throws DegenerateResult when sd = 0.
VuongResult vuong_test(const OrdinalPanel& panel, const JointModelParams& fit1,
                       const JointModelParams& fit2);

/// Per-couple differences used by vuong_test, in couple order.
std::vector<double> vuong_differences(const OrdinalPanel& panel, const JointModelParams& fit1,
                                      const JointModelParams& fit2);

}  // namespace copmarkov
