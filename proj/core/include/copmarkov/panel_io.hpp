#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "copmarkov/error.hpp"
#include "copmarkov/estimation.hpp"
#include "copmarkov/panel.hpp"

namespace copmarkov {

enum class CsvErrorKind {
    MissingFile,
    EmptyFile,
    Header,
    MalformedRow,
    CategoryOutOfRange,
    UnbalancedCouple,
    WaveSequence,
    ConstantCovariate,
};

const char* csv_error_name(CsvErrorKind kind);

/// Loader error with its location. `line` and `column` are 1-based, 0 when
/// not applicable; `couple` is empty when no couple is implicated.
class CsvError : public InputError {
public:
    CsvError(CsvErrorKind kind, const std::string& what, std::size_t line = 0,
             std::size_t column = 0, std::string couple = {});

    CsvErrorKind kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& couple() const noexcept { return couple_; }

private:
    CsvErrorKind kind_;
    std::size_t line_;
    std::size_t column_;
    std::string couple_;
};

/// Declared category counts; a missing count is inferred as the largest
/// observed category (at least 2).
struct LoadOptions {
    std::optional<int> categories_male;
    std::optional<int> categories_female;
};

/// Reads `couple_id,wave,y_m,y_f,x_m_1..x_m_p,x_f_1..x_f_p`. Rows of a couple
/// may appear in any order but its waves must be consecutive without
/// duplicates. Couples keep the order of their first row.
OrdinalPanel read_csv(std::istream& in, const LoadOptions& options = {});
OrdinalPanel load_csv(const std::string& path, const LoadOptions& options = {});

/// Writes the same schema with reals at 17 significant digits.
void write_csv(const OrdinalPanel& panel, std::ostream& out);
void write_csv(const OrdinalPanel& panel, const std::string& path);

/// Number of couples observed for each panel length T.
std::map<std::size_t, std::size_t> wave_count_distribution(const OrdinalPanel& panel);

/// Settings shared by the command-line tools; every field can come from a
/// flat `key = value` file (`#` starts a comment).
struct RunConfig {
    std::optional<int> categories_male;
    std::optional<int> categories_female;
    LinkFunction link = LinkFunction::Probit;
    FamilyChoice families{CopulaSpec::bvn(0.0), CopulaSpec::bvn(0.0), CopulaSpec::bvn(0.0)};
    std::string candidates = "bvn,frank,gumbel,sgumbel,t";
    std::vector<int> t_df{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    OptimizerSettings optimizer;
    bool flip_mu_sign = false;
    int threads = 1;
    std::string data_path;
    std::string output_path;
};

/// Applies the keys of a config file on top of `base`. Unknown keys and bad
/// values throw InputError naming the line.
RunConfig read_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
void validate(const RunConfig& config);

/// Parses "1,3,5" and "1-10" style integer lists.
std::vector<int> parse_int_list(const std::string& text);

/// Whole-file helpers that report I/O failures with the path and system message.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace copmarkov
