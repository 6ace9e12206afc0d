#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace copmarkov {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A likelihood term could not be evaluated (non-finite or negative probability).
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& what, std::size_t couple, std::size_t wave)
        : std::runtime_error(what + " (couple " + std::to_string(couple) + ", wave " +
                             std::to_string(wave) + ")"),
          couple_(couple), wave_(wave) {}

    std::size_t couple() const noexcept { return couple_; }
    std::size_t wave() const noexcept { return wave_; }

private:
    std::size_t couple_;
    std::size_t wave_;
};

/// Malformed data, configuration or command-line input.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An optimisation stage failed to converge or produced non-finite values.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A named estimation stage stopped without converging.
class StageFailure : public NumericalFailure {
public:
    StageFailure(const std::string& what, std::string stage, std::vector<double> last_iterate)
        : NumericalFailure(what), stage_(std::move(stage)), last_iterate_(std::move(last_iterate)) {}

    const std::string& stage() const noexcept { return stage_; }
    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

private:
    std::string stage_;
    std::vector<double> last_iterate_;
};

/// Test statistic undefined for the supplied inputs (e.g. zero variance).
class DegenerateResult : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace copmarkov
