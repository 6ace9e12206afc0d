#pragma once

#include <optional>
#include <string>
#include <vector>

#include "copmarkov/estimation.hpp"
#include "copmarkov/selection.hpp"

namespace copmarkov {

/// Fixed-point with the given number of decimals; negative zero prints as 0.
std::string format_fixed(double value, int decimals = 3);
/// "0.172 (0.006)" when a standard error is present, "0.172" otherwise.
std::string format_estimate(double estimate, std::optional<double> se, int decimals = 3);
/// "<0.001" below 0.001, three decimals otherwise.
std::string format_p_value(double p);

/// JSON documents; every real is written with round-trip precision.
std::string fit_report_json(const FitReport& report);
FitReport fit_report_from_json(const std::string& text);
std::string joint_params_json(const JointModelParams& jm);
JointModelParams joint_params_from_json(const std::string& text);
std::string vuong_json(const VuongResult& result, const std::string& model1, const std::string& model2);

/// Aligned text table, one column per gender, rows: cutpoints, covariates,
/// serial tau, coupling tau, log-likelihoods. Estimates at three decimals,
/// log-likelihoods at one.
std::string fit_report_table(const FitReport& report);

/// Serial scan for both genders: candidates across columns (male, female
/// pair per candidate), parameters down the rows, serial log-likelihood last.
std::string serial_scan_table(const SerialScan& male, const SerialScan& female);
std::string serial_scan_json(const SerialScan& male, const SerialScan& female);

/// Vuong comparison of each coupling candidate against a reference
/// candidate; empty for the reference itself and for failed candidates.
struct ScanComparison {
    std::string reference;
    std::vector<std::optional<VuongResult>> results;
};

/// Coupling scan in ranked order with an optional Vuong row at the bottom.
/// Throws InputError when no candidate produced a fit.
std::string coupling_scan_table(const CouplingScan& scan, const ScanComparison* comparison = nullptr);
std::string coupling_scan_json(const CouplingScan& scan, const ScanComparison* comparison = nullptr);

std::string vuong_table(const VuongResult& result, const std::string& model1,
                        const std::string& model2);

}  // namespace copmarkov
