#include "copmarkov/panel_io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace copmarkov {
namespace {

std::string location(std::size_t line, std::size_t column) {
    std::string s;
    if (line) s += "line " + std::to_string(line);
    if (column) s += (s.empty() ? "" : ", ") + std::string("column ") + std::to_string(column);
    return s;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

bool missing_value(const std::string& field) {
    return field.empty() || field == "NA" || field == "na" || field == "NaN" || field == ".";
}

template <class T>
bool parse_number(const std::string& field, T& value) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last;
}

struct Row {
    int wave;
    int y[2];
    std::vector<double> x[2];
    std::size_t line;
};

struct CoupleRows {
    std::string id;
    std::vector<Row> rows;
};

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool parse_bool(const std::string& v, bool& out) {
    if (v == "true" || v == "1" || v == "yes") {
        out = true;
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        out = false;
        return true;
    }
    return false;
}

}  // namespace

const char* csv_error_name(CsvErrorKind kind) {
    switch (kind) {
        case CsvErrorKind::MissingFile:
            return "missing_file";
        case CsvErrorKind::EmptyFile:
            return "empty_file";
        case CsvErrorKind::Header:
            return "header";
        case CsvErrorKind::MalformedRow:
            return "malformed_row";
        case CsvErrorKind::CategoryOutOfRange:
            return "category_out_of_range";
        case CsvErrorKind::UnbalancedCouple:
            return "unbalanced_couple";
        case CsvErrorKind::WaveSequence:
            return "wave_sequence";
        case CsvErrorKind::ConstantCovariate:
            return "constant_covariate";
    }
    return "unknown";
}

CsvError::CsvError(CsvErrorKind kind, const std::string& what, std::size_t line, std::size_t column,
                   std::string couple)
    : InputError([&] {
          std::string msg = what;
          const std::string where = location(line, column);
          if (!where.empty()) msg += " (" + where + ")";
          if (!couple.empty()) msg += " [couple " + couple + "]";
          return msg;
      }()),
      kind_(kind), line_(line), column_(column), couple_(std::move(couple)) {}

OrdinalPanel read_csv(std::istream& in, const LoadOptions& options) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw CsvError(CsvErrorKind::EmptyFile, "file is empty");
    ++line_no;
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const auto header = split_fields(line);
    if (header.size() < 4 || (header.size() - 4) % 2 != 0)
        throw CsvError(CsvErrorKind::Header,
                       "header needs couple_id,wave,y_m,y_f and matching x_m_k/x_f_k columns", 1);
    const int p = static_cast<int>(header.size() - 4) / 2;
    std::vector<std::string> expected{"couple_id", "wave", "y_m", "y_f"};
    for (int k = 1; k <= p; ++k) expected.push_back("x_m_" + std::to_string(k));
    for (int k = 1; k <= p; ++k) expected.push_back("x_f_" + std::to_string(k));
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] != expected[c])
            throw CsvError(CsvErrorKind::Header,
                           "expected header field '" + expected[c] + "', found '" + header[c] + "'", 1,
                           c + 1);
    }

    std::vector<CoupleRows> couples;
    std::unordered_map<std::string, std::size_t> index;
    int max_category[2] = {0, 0};
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw CsvError(CsvErrorKind::MalformedRow,
                           "expected " + std::to_string(header.size()) + " fields, found " +
                               std::to_string(fields.size()),
                           line_no);
        const std::string& id = fields[0];
        if (id.empty()) throw CsvError(CsvErrorKind::MalformedRow, "empty couple id", line_no, 1);
        Row row{};
        row.line = line_no;
        if (!parse_number(fields[1], row.wave))
            throw CsvError(CsvErrorKind::MalformedRow, "wave '" + fields[1] + "' is not an integer",
                           line_no, 2, id);
        for (int g = 0; g < 2; ++g) {
            const std::string& f = fields[2 + g];
            const char* name = g == 0 ? "y_m" : "y_f";
            if (missing_value(f))
                throw CsvError(CsvErrorKind::UnbalancedCouple,
                               std::string(name) + " missing at wave " + std::to_string(row.wave),
                               line_no, 3 + g, id);
            if (!parse_number(f, row.y[g]))
                throw CsvError(CsvErrorKind::MalformedRow,
                               std::string(name) + " value '" + f + "' is not an integer", line_no,
                               3 + g, id);
            const std::optional<int>& declared =
                g == 0 ? options.categories_male : options.categories_female;
            if (row.y[g] < 1 || (declared && row.y[g] > *declared))
                throw CsvError(CsvErrorKind::CategoryOutOfRange,
                               std::string(name) + " category " + f + " outside 1.." +
                                   (declared ? std::to_string(*declared) : std::string("K")),
                               line_no, 3 + g, id);
            max_category[g] = std::max(max_category[g], row.y[g]);
        }
        for (int g = 0; g < 2; ++g) {
            for (int k = 0; k < p; ++k) {
                const std::size_t col = 4 + static_cast<std::size_t>(g * p + k);
                double v = 0.0;
                if (missing_value(fields[col]) || !parse_number(fields[col], v) || !std::isfinite(v))
                    throw CsvError(CsvErrorKind::MalformedRow,
                                   header[col] + " value '" + fields[col] + "' is not a finite number",
                                   line_no, col + 1, id);
                row.x[g].push_back(v);
            }
        }
        auto [it, inserted] = index.try_emplace(id, couples.size());
        if (inserted) couples.push_back({id, {}});
        couples[it->second].rows.push_back(std::move(row));
    }
    if (couples.empty()) throw CsvError(CsvErrorKind::EmptyFile, "file has a header but no rows");

    const int K[2] = {options.categories_male.value_or(std::max(2, max_category[0])),
                      options.categories_female.value_or(std::max(2, max_category[1]))};
    if (K[0] < 2 || K[1] < 2) throw InputError("declared category counts must be at least 2");

    OrdinalPanel panel(K[0], K[1], p);
    std::vector<std::string> names[2];
    for (int k = 1; k <= p; ++k) {
        names[0].push_back("x_m_" + std::to_string(k));
        names[1].push_back("x_f_" + std::to_string(k));
    }
    panel.set_covariate_names(names[0], names[1]);

    for (auto& couple : couples) {
        auto& rows = couple.rows;
        std::stable_sort(rows.begin(), rows.end(),
                         [](const Row& a, const Row& b) { return a.wave < b.wave; });
        for (std::size_t t = 1; t < rows.size(); ++t) {
            if (rows[t].wave == rows[t - 1].wave)
                throw CsvError(CsvErrorKind::WaveSequence,
                               "duplicate wave " + std::to_string(rows[t].wave), rows[t].line, 2,
                               couple.id);
            if (rows[t].wave != rows[t - 1].wave + 1)
                throw CsvError(CsvErrorKind::WaveSequence,
                               "waves " + std::to_string(rows[t - 1].wave) + " and " +
                                   std::to_string(rows[t].wave) + " are not consecutive",
                               rows[t].line, 2, couple.id);
        }
        const auto T = static_cast<Eigen::Index>(rows.size());
        std::vector<int> y[2];
        Eigen::MatrixXd x[2] = {Eigen::MatrixXd(T, p), Eigen::MatrixXd(T, p)};
        for (Eigen::Index t = 0; t < T; ++t) {
            const Row& r = rows[static_cast<std::size_t>(t)];
            for (int g = 0; g < 2; ++g) {
                y[g].push_back(r.y[g]);
                for (int k = 0; k < p; ++k) x[g](t, k) = r.x[g][static_cast<std::size_t>(k)];
            }
        }
        panel.add_couple(couple.id, rows.front().wave, std::move(y[0]), std::move(y[1]), x[0], x[1]);
    }

    for (Gender g : kGenders) {
        const auto cov = panel.covariates(g);
        for (int k = 0; k < p; ++k) {
            const auto column = cov.col(k);
            if (column.maxCoeff() == column.minCoeff()) {
                const std::size_t col = 5 + static_cast<std::size_t>(static_cast<int>(g) * p + k);
                throw CsvError(CsvErrorKind::ConstantCovariate,
                               "covariate " + header[col - 1] +
                                   " is constant; the cutpoints already act as an intercept",
                               0, col);
            }
        }
    }
    return panel;
}

OrdinalPanel load_csv(const std::string& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw CsvError(CsvErrorKind::MissingFile, "cannot open '" + path + "': " + std::strerror(errno));
    return read_csv(in, options);
}

void write_csv(const OrdinalPanel& panel, std::ostream& out) {
    const int p = panel.covariate_dim();
    out << "couple_id,wave,y_m,y_f";
    for (int k = 1; k <= p; ++k) out << ",x_m_" << k;
    for (int k = 1; k <= p; ++k) out << ",x_f_" << k;
    out << '\n';
    const auto ym = panel.responses(Gender::Male);
    const auto yf = panel.responses(Gender::Female);
    const auto xm = panel.covariates(Gender::Male);
    const auto xf = panel.covariates(Gender::Female);
    for (std::size_t c = 0; c < panel.couple_count(); ++c) {
        for (std::size_t t = 0; t < panel.waves(c); ++t) {
            const std::size_t i = panel.offset(c) + t;
            const auto row = static_cast<Eigen::Index>(i);
            out << panel.couple_id(c) << ',' << panel.first_wave(c) + static_cast<int>(t) << ','
                << ym[i] << ',' << yf[i];
            for (int k = 0; k < p; ++k) out << ',' << format_real(xm(row, k));
            for (int k = 0; k < p; ++k) out << ',' << format_real(xf(row, k));
            out << '\n';
        }
    }
}

void write_csv(const OrdinalPanel& panel, const std::string& path) {
    std::ostringstream out;
    write_csv(panel, out);
    write_text_file(path, out.str());
}

std::map<std::size_t, std::size_t> wave_count_distribution(const OrdinalPanel& panel) {
    std::map<std::size_t, std::size_t> out;
    for (std::size_t c = 0; c < panel.couple_count(); ++c) ++out[panel.waves(c)];
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        token = trim(token);
        const auto dash = token.find('-');
        int a = 0;
        int b = 0;
        if (dash != std::string::npos && dash > 0) {
            if (!parse_number(token.substr(0, dash), a) || !parse_number(token.substr(dash + 1), b) ||
                b < a)
                throw InputError("bad integer range '" + token + "'");
            for (int k = a; k <= b; ++k) out.push_back(k);
        } else {
            if (!parse_number(token, a)) throw InputError("bad integer '" + token + "'");
            out.push_back(a);
        }
    }
    return out;
}

RunConfig read_config(std::istream& in, RunConfig config) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto bad = [&](const std::string& why) {
            return InputError("config line " + std::to_string(line_no) + ": " + key + ": " + why);
        };
        try {
            int i = 0;
            double d = 0.0;
            if (key == "categories_m" || key == "categories_f") {
                if (!parse_number(value, i)) throw bad("expected an integer");
                (key == "categories_m" ? config.categories_male : config.categories_female) = i;
            } else if (key == "link") {
                config.link = parse_link(value);
            } else if (key == "serial_m") {
                config.families.serial_male = parse_copula_template(value);
            } else if (key == "serial_f") {
                config.families.serial_female = parse_copula_template(value);
            } else if (key == "coupling") {
                config.families.coupling = parse_copula_template(value);
            } else if (key == "candidates") {
                config.candidates = value;
            } else if (key == "t_df") {
                config.t_df = parse_int_list(value);
            } else if (key == "gradient_tolerance") {
                if (!parse_number(value, d)) throw bad("expected a number");
                config.optimizer.gradient_tolerance = d;
            } else if (key == "max_iterations") {
                if (!parse_number(value, i)) throw bad("expected an integer");
                config.optimizer.max_iterations = i;
            } else if (key == "step_scale") {
                if (!parse_number(value, d)) throw bad("expected a number");
                config.optimizer.step_scale = d;
            } else if (key == "flip_mu_sign") {
                if (!parse_bool(value, config.flip_mu_sign)) throw bad("expected true or false");
            } else if (key == "threads") {
                if (!parse_number(value, i)) throw bad("expected an integer");
                config.threads = i;
            } else if (key == "data") {
                config.data_path = value;
            } else if (key == "out") {
                config.output_path = value;
            } else {
                throw bad("unknown key");
            }
        } catch (const DomainError& e) {
            throw bad(e.what());
        } catch (const InputError& e) {
            if (std::string(e.what()).rfind("config line", 0) == 0) throw;
            throw bad(e.what());
        }
    }
    validate(config);
    return config;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::istringstream in(read_text_file(path));
    return read_config(in, std::move(base));
}

void validate(const RunConfig& config) {
    for (const auto& k : {config.categories_male, config.categories_female}) {
        if (k && *k < 2) throw InputError("category counts must be at least 2");
    }
    try {
        validate(config.optimizer);
    } catch (const DomainError& e) {
        throw InputError(e.what());
    }
    for (int nu : config.t_df) {
        if (nu < 1) throw InputError("t degrees of freedom must be positive");
    }
    if (config.threads < 1) throw InputError("threads must be at least 1");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "': " + std::strerror(errno));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path + "': " + std::strerror(errno));
    out << content;
    out.flush();
    if (!out) throw InputError("write to '" + path + "' failed: " + std::strerror(errno));
}

}  // namespace copmarkov
