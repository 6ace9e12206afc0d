#include "copmarkov/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "copmarkov/error.hpp"
#include "copmarkov/special_functions.hpp"

namespace copmarkov {
namespace {

constexpr double kFailed = -std::numeric_limits<double>::infinity();

template <class Candidate>
void rank(std::vector<Candidate>& candidates) {
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.loglik() > b.loglik(); });
}

template <class Candidate>
void require_any(const std::vector<Candidate>& candidates, const char* what) {
    if (candidates.empty()) throw DomainError(std::string(what) + " scan needs at least one candidate");
    for (const auto& c : candidates) {
        if (c.fit) return;
    }
    std::string msg = std::string("every ") + what + " candidate failed:";
    for (const auto& c : candidates) msg += " [" + copula_label(c.family) + ": " + c.failure + "]";
    throw NumericalFailure(msg);
}

}  // namespace

CandidateSet CandidateSet::defaults() {
    return {{CopulaFamily::BVN, CopulaFamily::Frank, CopulaFamily::Gumbel,
             CopulaFamily::SurvivalGumbel, CopulaFamily::StudentT},
            {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}};
}

std::vector<CopulaSpec> CandidateSet::expand() const {
    std::vector<CopulaSpec> out;
    for (CopulaFamily family : kAllFamilies) {
        if (std::find(families.begin(), families.end(), family) == families.end()) continue;
        if (family == CopulaFamily::StudentT) {
            std::vector<int> df = t_df;
            std::sort(df.begin(), df.end());
            df.erase(std::unique(df.begin(), df.end()), df.end());
            for (int nu : df) {
                if (nu < 1) throw DomainError("t degrees of freedom must be positive");
                out.push_back(CopulaSpec::student_t(0.0, nu));
            }
        } else {
            const bool gumbel_type =
                family == CopulaFamily::Gumbel || family == CopulaFamily::SurvivalGumbel;
            out.push_back({family, gumbel_type ? 1.0 : 0.0, 0.0});
        }
    }
    return out;
}

CandidateSet parse_candidates(const std::string& list, const std::vector<int>& t_df) {
    CandidateSet set;
    std::stringstream in(list);
    std::string token;
    while (std::getline(in, token, ',')) {
        if (token.empty()) continue;
        if (token == "t") {
            set.families.push_back(CopulaFamily::StudentT);
            set.t_df.insert(set.t_df.end(), t_df.begin(), t_df.end());
            continue;
        }
        const CopulaSpec spec = parse_copula_template(token);
        set.families.push_back(spec.family);
        if (spec.family == CopulaFamily::StudentT) set.t_df.push_back(static_cast<int>(spec.nu));
    }
    if (set.families.empty()) throw InputError("empty candidate list");
    return set;
}

double SerialCandidate::loglik() const { return fit ? fit->loglik : kFailed; }
double CouplingCandidate::loglik() const { return fit ? fit->loglik_joint : kFailed; }

SerialScan scan_serial(const OrdinalPanel& panel, Gender gender, const CandidateSet& candidates,
                       LinkFunction link, const OptimizerSettings& settings) {
    SerialScan scan;
    scan.gender = gender;
    scan.independent = fit_margin(panel, gender, link, settings);
    for (const CopulaSpec& family : candidates.expand()) {
        SerialCandidate c{family, std::nullopt, {}};
        try {
            c.fit = fit_serial(panel, scan.independent, family, settings);
        } catch (const NumericalFailure& e) {
            c.failure = e.what();
        } catch (const DomainError& e) {
            c.failure = e.what();
        }
        scan.ranked.push_back(std::move(c));
    }
    require_any(scan.ranked, "serial");
    rank(scan.ranked);
    return scan;
}

CouplingScan scan_coupling(const OrdinalPanel& panel, const SerialFit& male, const SerialFit& female,
                           const CandidateSet& candidates, const OptimizerSettings& settings,
                           bool with_standard_errors) {
    CouplingScan scan;
    for (const CopulaSpec& family : candidates.expand()) {
        CouplingCandidate c{family, std::nullopt, {}};
        try {
            c.fit = fit_joint(panel, male, female, family, settings, with_standard_errors);
        } catch (const NumericalFailure& e) {
            c.failure = e.what();
        } catch (const DomainError& e) {
            c.failure = e.what();
        }
        scan.ranked.push_back(std::move(c));
    }
    require_any(scan.ranked, "coupling");
    rank(scan.ranked);
    return scan;
}

std::vector<double> vuong_differences(const OrdinalPanel& panel, const JointModelParams& fit1,
                                      const JointModelParams& fit2) {
    const auto l1 = loglik_joint_contributions(panel, fit1);
    const auto l2 = loglik_joint_contributions(panel, fit2);
    std::vector<double> d(l1.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = l2[i] - l1[i];
    return d;
}

VuongResult vuong_test(const OrdinalPanel& panel, const JointModelParams& fit1,
                       const JointModelParams& fit2) {
    const auto d = vuong_differences(panel, fit1, fit2);
    VuongResult r;
    r.n = d.size();
    if (r.n < 2) throw DegenerateResult("Vuong test needs at least two couples");
    // Index-order sums: negating every D_i negates the mean exactly.
    double sum = 0.0;
    for (double v : d) sum += v;
    r.mean = sum / static_cast<double>(r.n);
    double ss = 0.0;
    for (double v : d) ss += (v - r.mean) * (v - r.mean);
    r.sd = std::sqrt(ss / static_cast<double>(r.n - 1));
    if (!(r.sd > 0.0)) throw DegenerateResult("Vuong test undefined: the two fits give identical densities");
    r.z = std::sqrt(static_cast<double>(r.n)) * r.mean / r.sd;
    r.p_value = std::min(1.0, 2.0 * norm_cdf(-std::abs(r.z)));
    return r;
}

}  // namespace copmarkov
