#include "copmarkov/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "copmarkov/error.hpp"

namespace copmarkov {
namespace {

using nlohmann::json;

const char* family_token(CopulaFamily family) {
    switch (family) {
        case CopulaFamily::BVN:
            return "bvn";
        case CopulaFamily::Frank:
            return "frank";
        case CopulaFamily::Gumbel:
            return "gumbel";
        case CopulaFamily::SurvivalGumbel:
            return "sgumbel";
        case CopulaFamily::StudentT:
            return "t";
    }
    return "?";
}

CopulaFamily family_from_token(const std::string& token) {
    for (CopulaFamily f : kAllFamilies) {
        if (token == family_token(f)) return f;
    }
    throw InputError("unknown copula family '" + token + "' in JSON");
}

json copula_json(const CopulaSpec& spec) {
    json j{{"family", family_token(spec.family)}, {"label", copula_label(spec)}, {"theta", spec.theta}};
    if (spec.family == CopulaFamily::StudentT) j["nu"] = spec.nu;
    return j;
}

CopulaSpec copula_from(const json& j) {
    CopulaSpec spec{family_from_token(j.at("family").get<std::string>()), j.at("theta").get<double>(),
                    j.value("nu", 0.0)};
    validate(spec);
    return spec;
}

json serial_json(const SerialModel& s) {
    return {{"link", std::string(link_name(s.margin.link))},
            {"cutpoints", s.margin.cutpoints},
            {"beta", s.margin.beta},
            {"copula", copula_json(s.copula)}};
}

SerialModel serial_from(const json& j) {
    SerialModel s;
    s.margin.link = parse_link(j.at("link").get<std::string>());
    s.margin.cutpoints = j.at("cutpoints").get<std::vector<double>>();
    s.margin.beta = j.at("beta").get<std::vector<double>>();
    s.copula = copula_from(j.at("copula"));
    validate(s.margin);
    return s;
}

json joint_json(const JointModelParams& jm) {
    return {{"male", serial_json(jm.male)},
            {"female", serial_json(jm.female)},
            {"coupling", copula_json(jm.coupling)}};
}

JointModelParams joint_from(const json& j) {
    JointModelParams jm;
    jm.male = serial_from(j.at("male"));
    jm.female = serial_from(j.at("female"));
    jm.coupling = copula_from(j.at("coupling"));
    return jm;
}

json errors_json(const ParameterErrors& e) {
    return {{"cutpoints_male", e.cutpoints_male},
            {"beta_male", e.beta_male},
            {"cutpoints_female", e.cutpoints_female},
            {"beta_female", e.beta_female},
            {"theta_male", e.theta_male},
            {"theta_female", e.theta_female},
            {"theta_coupling", e.theta_coupling},
            {"tau_male", e.tau_male},
            {"tau_female", e.tau_female},
            {"tau_coupling", e.tau_coupling}};
}

ParameterErrors errors_from(const json& j) {
    ParameterErrors e;
    e.cutpoints_male = j.at("cutpoints_male").get<std::vector<double>>();
    e.beta_male = j.at("beta_male").get<std::vector<double>>();
    e.cutpoints_female = j.at("cutpoints_female").get<std::vector<double>>();
    e.beta_female = j.at("beta_female").get<std::vector<double>>();
    e.theta_male = j.at("theta_male").get<double>();
    e.theta_female = j.at("theta_female").get<double>();
    e.theta_coupling = j.at("theta_coupling").get<double>();
    e.tau_male = j.at("tau_male").get<double>();
    e.tau_female = j.at("tau_female").get<double>();
    e.tau_coupling = j.at("tau_coupling").get<double>();
    return e;
}

OptimizerStatus status_from(const std::string& name) {
    for (OptimizerStatus s : {OptimizerStatus::Converged, OptimizerStatus::MaxIterations,
                              OptimizerStatus::LineSearchFailed, OptimizerStatus::NonFinite}) {
        if (name == status_name(s)) return s;
    }
    throw InputError("unknown optimizer status '" + name + "' in JSON");
}

json fit_json(const FitReport& r) {
    json stages = json::array();
    for (const auto& s : r.stages) {
        stages.push_back({{"label", s.label},
                          {"loglik", s.loglik},
                          {"iterations", s.iterations},
                          {"grad_norm", s.grad_norm},
                          {"status", status_name(s.status)}});
    }
    return {{"link", std::string(link_name(r.link))},
            {"families",
             {{"serial_male", copula_json(r.families.serial_male)},
              {"serial_female", copula_json(r.families.serial_female)},
              {"coupling", copula_json(r.families.coupling)}}},
            {"covariate_names", {{"male", r.covariate_names_male}, {"female", r.covariate_names_female}}},
            {"loglik",
             {{"indep_male", r.loglik_indep_male},
              {"indep_female", r.loglik_indep_female},
              {"partial_male", r.loglik_partial_male},
              {"partial_female", r.loglik_partial_female},
              {"markov_male", r.loglik_markov_male},
              {"markov_female", r.loglik_markov_female},
              {"joint_stage4", r.loglik_joint_stage4},
              {"joint", r.loglik_joint}}},
            {"dependence_gain", r.dependence_gain},
            {"estimates", joint_json(r.estimates)},
            {"tau", {{"male", r.tau_male}, {"female", r.tau_female}, {"coupling", r.tau_coupling}}},
            {"standard_errors", r.errors ? errors_json(*r.errors) : json(nullptr)},
            {"information_eigenvalues", r.information_eigenvalues},
            {"stages", stages},
            {"floored_terms", r.floored_terms},
            {"convention_note", r.convention_note}};
}

FitReport fit_from(const json& j) {
    FitReport r;
    r.link = parse_link(j.at("link").get<std::string>());
    const auto& fam = j.at("families");
    r.families = {copula_from(fam.at("serial_male")), copula_from(fam.at("serial_female")),
                  copula_from(fam.at("coupling"))};
    r.covariate_names_male = j.at("covariate_names").at("male").get<std::vector<std::string>>();
    r.covariate_names_female = j.at("covariate_names").at("female").get<std::vector<std::string>>();
    const auto& l = j.at("loglik");
    r.loglik_indep_male = l.at("indep_male").get<double>();
    r.loglik_indep_female = l.at("indep_female").get<double>();
    r.loglik_partial_male = l.at("partial_male").get<double>();
    r.loglik_partial_female = l.at("partial_female").get<double>();
    r.loglik_markov_male = l.at("markov_male").get<double>();
    r.loglik_markov_female = l.at("markov_female").get<double>();
    r.loglik_joint_stage4 = l.at("joint_stage4").get<double>();
    r.loglik_joint = l.at("joint").get<double>();
    r.dependence_gain = j.at("dependence_gain").get<double>();
    r.estimates = joint_from(j.at("estimates"));
    r.tau_male = j.at("tau").at("male").get<double>();
    r.tau_female = j.at("tau").at("female").get<double>();
    r.tau_coupling = j.at("tau").at("coupling").get<double>();
    if (!j.at("standard_errors").is_null()) r.errors = errors_from(j.at("standard_errors"));
    r.information_eigenvalues = j.at("information_eigenvalues").get<std::vector<double>>();
    for (const auto& s : j.at("stages")) {
        r.stages.push_back({s.at("label").get<std::string>(), s.at("loglik").get<double>(),
                            s.at("iterations").get<int>(), s.at("grad_norm").get<double>(),
                            status_from(s.at("status").get<std::string>())});
    }
    r.floored_terms = j.at("floored_terms").get<std::size_t>();
    r.convention_note = j.at("convention_note").get<std::string>();
    return r;
}

template <class F>
auto parse_json(const std::string& text, F&& build) {
    try {
        return build(json::parse(text));
    } catch (const json::exception& e) {
        throw InputError(std::string("invalid JSON: ") + e.what());
    } catch (const DomainError& e) {
        throw InputError(std::string("invalid model in JSON: ") + e.what());
    }
}

json vuong_object(const VuongResult& v) {
    return {{"mean", v.mean}, {"sd", v.sd}, {"z", v.z}, {"p_value", v.p_value}, {"n", v.n}};
}

// Plain text grid: first column left-aligned, the rest right-aligned.
class TextTable {
public:
    void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }
    void rule() { rows_.push_back({}); }

    std::string str() const {
        std::vector<std::size_t> width;
        for (const auto& r : rows_) {
            if (width.size() < r.size()) width.resize(r.size(), 0);
            for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
        }
        std::size_t total = 0;
        for (std::size_t w : width) total += w + 3;
        std::ostringstream out;
        for (const auto& r : rows_) {
            if (r.empty()) {
                out << std::string(total > 3 ? total - 3 : 0, '-') << '\n';
                continue;
            }
            std::string line;
            for (std::size_t c = 0; c < width.size(); ++c) {
                const std::string cell = c < r.size() ? r[c] : "";
                const std::string pad(width[c] - cell.size(), ' ');
                if (c > 0) line += "   ";
                line += c == 0 ? cell + pad : pad + cell;
            }
            while (!line.empty() && line.back() == ' ') line.pop_back();
            out << line << '\n';
        }
        return out.str();
    }

private:
    std::vector<std::vector<std::string>> rows_;
};

std::string covariate_label(const std::vector<std::string>& male, const std::vector<std::string>& female,
                            std::size_t k) {
    const std::string m = k < male.size() ? male[k] : "";
    const std::string f = k < female.size() ? female[k] : "";
    return m == f ? m : m + " / " + f;
}

template <class T>
std::optional<T> at(const std::vector<T>& v, std::size_t k) {
    if (k < v.size()) return v[k];
    return std::nullopt;
}

std::string cell(const std::vector<double>& values, const std::vector<double>* errors, std::size_t k) {
    if (k >= values.size()) return "";
    return format_estimate(values[k], errors ? at(*errors, k) : std::nullopt);
}

// Parameter rows shared by the fit and scan tables; appends one male/female
// column pair per model to `rows`.
struct ColumnPair {
    const SerialModel* male;
    const SerialModel* female;
    const ParameterErrors* errors;
};

void parameter_rows(TextTable& table, const std::vector<std::string>& head,
                    const std::vector<ColumnPair>& columns, const std::vector<std::string>& names_m,
                    const std::vector<std::string>& names_f) {
    std::size_t cuts = 0;
    std::size_t covs = 0;
    for (const auto& c : columns) {
        for (const SerialModel* s : {c.male, c.female}) {
            if (!s) continue;
            cuts = std::max(cuts, s->margin.cutpoints.size());
            covs = std::max(covs, s->margin.beta.size());
        }
    }
    table.row(head);
    std::vector<std::string> genders{""};
    for (std::size_t i = 0; i < columns.size(); ++i) {
        genders.push_back("Males");
        genders.push_back("Females");
    }
    table.row(genders);
    table.rule();
    auto add = [&](const std::string& label, auto&& pick) {
        std::vector<std::string> r{label};
        for (const auto& c : columns) {
            r.push_back(c.male ? pick(*c.male, c.errors, Gender::Male) : "");
            r.push_back(c.female ? pick(*c.female, c.errors, Gender::Female) : "");
        }
        table.row(std::move(r));
    };
    for (std::size_t k = 0; k < cuts; ++k) {
        add("alpha_" + std::to_string(k + 1), [&](const SerialModel& s, const ParameterErrors* e, Gender g) {
            const auto* se = e ? (g == Gender::Male ? &e->cutpoints_male : &e->cutpoints_female) : nullptr;
            return cell(s.margin.cutpoints, se, k);
        });
    }
    for (std::size_t k = 0; k < covs; ++k) {
        add(covariate_label(names_m, names_f, k),
            [&](const SerialModel& s, const ParameterErrors* e, Gender g) {
                const auto* se = e ? (g == Gender::Male ? &e->beta_male : &e->beta_female) : nullptr;
                return cell(s.margin.beta, se, k);
            });
    }
    add("tau_j", [&](const SerialModel& s, const ParameterErrors* e, Gender g) {
        std::optional<double> se;
        if (e) se = g == Gender::Male ? e->tau_male : e->tau_female;
        return format_estimate(kendall_tau(s.copula), se);
    });
}

}  // namespace

std::string format_fixed(double value, int decimals) {
    if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s = buf;
    if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::string format_estimate(double estimate, std::optional<double> se, int decimals) {
    std::string s = format_fixed(estimate, decimals);
    if (se) s += " (" + format_fixed(*se, decimals) + ")";
    return s;
}

std::string format_p_value(double p) { return p < 0.001 ? "<0.001" : format_fixed(p, 3); }

std::string fit_report_json(const FitReport& report) { return fit_json(report).dump(2) + "\n"; }

FitReport fit_report_from_json(const std::string& text) {
    return parse_json(text, [](const json& j) { return fit_from(j); });
}

std::string joint_params_json(const JointModelParams& jm) { return joint_json(jm).dump(2) + "\n"; }

JointModelParams joint_params_from_json(const std::string& text) {
    return parse_json(text, [](const json& j) {
        // A full fit report is accepted as well as a bare parameter document.
        return joint_from(j.contains("estimates") ? j.at("estimates") : j);
    });
}

std::string vuong_json(const VuongResult& result, const std::string& model1, const std::string& model2) {
    json j = vuong_object(result);
    j["model1"] = model1;
    j["model2"] = model2;
    return j.dump(2) + "\n";
}

std::string fit_report_table(const FitReport& r) {
    TextTable table;
    const ParameterErrors* errors = r.errors ? &*r.errors : nullptr;
    parameter_rows(table,
                   {"C_12|t: " + copula_label(r.estimates.coupling),
                    "serial " + copula_label(r.estimates.male.copula),
                    "serial " + copula_label(r.estimates.female.copula)},
                   {{&r.estimates.male, &r.estimates.female, errors}}, r.covariate_names_male,
                   r.covariate_names_female);
    table.row({"tau", format_estimate(r.tau_coupling, errors ? std::optional(errors->tau_coupling)
                                                               : std::nullopt)});
    table.rule();
    table.row({"l_j|t", format_fixed(r.loglik_markov_male, 1), format_fixed(r.loglik_markov_female, 1)});
    table.row({"l_12|t", format_fixed(r.loglik_joint, 1)});
    table.row({"dependence gain", format_fixed(r.dependence_gain, 1)});
    table.rule();
    std::string out = table.str();
    out += "link: " + std::string(link_name(r.link)) + "\n";
    if (!r.errors && !r.information_eigenvalues.empty()) {
        out += "standard errors unavailable: observed information is not positive definite "
               "(smallest eigenvalue " +
               format_fixed(*std::min_element(r.information_eigenvalues.begin(),
                                              r.information_eigenvalues.end()),
                            6) +
               ")\n";
    }
    if (r.floored_terms > 0)
        out += "probabilities floored at 1e-300: " + std::to_string(r.floored_terms) + "\n";
    if (!r.convention_note.empty()) out += r.convention_note + "\n";
    return out;
}

std::string serial_scan_table(const SerialScan& male, const SerialScan& female) {
    std::vector<std::string> labels;
    for (const auto* scan : {&male, &female}) {
        for (const auto& c : scan->ranked) {
            const std::string l = copula_label(c.family);
            if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
        }
    }
    auto find = [](const SerialScan& scan, const std::string& label) -> const SerialCandidate* {
        for (const auto& c : scan.ranked) {
            if (copula_label(c.family) == label) return &c;
        }
        return nullptr;
    };
    std::vector<ColumnPair> columns;
    std::vector<std::string> head{"C_j|t"};
    std::vector<std::string> loglik{"l_j|t"};
    bool any = false;
    for (const auto& l : labels) {
        const SerialCandidate* m = find(male, l);
        const SerialCandidate* f = find(female, l);
        const SerialModel* ms = m && m->fit ? &m->fit->model : nullptr;
        const SerialModel* fs = f && f->fit ? &f->fit->model : nullptr;
        any = any || ms || fs;
        columns.push_back({ms, fs, nullptr});
        head.push_back(l);
        head.push_back("");
        loglik.push_back(ms ? format_fixed(m->fit->loglik, 1) : "failed");
        loglik.push_back(fs ? format_fixed(f->fit->loglik, 1) : "failed");
    }
    if (!any) throw InputError("empty scan: no candidate produced a fit");
    TextTable table;
    parameter_rows(table, head, columns, {}, {});
    table.rule();
    table.row(loglik);
    table.rule();
    return table.str();
}

std::string serial_scan_json(const SerialScan& male, const SerialScan& female) {
    json out;
    for (const auto* scan : {&male, &female}) {
        json list = json::array();
        for (const auto& c : scan->ranked) {
            json item{{"family", copula_json(c.family)}};
            if (c.fit) {
                item["loglik"] = c.fit->loglik;
                item["loglik_partial"] = c.fit->loglik_partial;
                item["tau"] = kendall_tau(c.fit->model.copula);
                item["model"] = serial_json(c.fit->model);
            } else {
                item["failure"] = c.failure;
            }
            list.push_back(item);
        }
        out[gender_name(scan->gender)] = {{"loglik_indep", scan->independent.loglik}, {"ranked", list}};
    }
    return out.dump(2) + "\n";
}

std::string coupling_scan_table(const CouplingScan& scan, const ScanComparison* comparison) {
    std::vector<ColumnPair> columns;
    std::vector<std::string> head{"C_12|t"};
    std::vector<std::string> tau{"tau"};
    std::vector<std::string> loglik{"l_12|t"};
    std::vector<std::string> vuong{"Vuong z0 / p"};
    bool any = false;
    for (std::size_t i = 0; i < scan.ranked.size(); ++i) {
        const auto& c = scan.ranked[i];
        head.push_back(copula_label(c.family));
        head.push_back("");
        if (c.fit) {
            any = true;
            const ParameterErrors* e = c.fit->errors ? &*c.fit->errors : nullptr;
            columns.push_back({&c.fit->estimates.male, &c.fit->estimates.female, e});
            tau.push_back(format_estimate(c.fit->tau_coupling,
                                          e ? std::optional(e->tau_coupling) : std::nullopt));
            tau.push_back("");
            loglik.push_back(format_fixed(c.fit->loglik_joint, 1));
            loglik.push_back("");
        } else {
            columns.push_back({nullptr, nullptr, nullptr});
            tau.insert(tau.end(), {"failed", ""});
            loglik.insert(loglik.end(), {"failed", ""});
        }
        const std::optional<VuongResult>* v =
            comparison && i < comparison->results.size() ? &comparison->results[i] : nullptr;
        if (v && *v) {
            vuong.push_back(format_fixed((*v)->z, 3));
            vuong.push_back(format_p_value((*v)->p_value));
        } else {
            vuong.insert(vuong.end(), {"-", ""});
        }
    }
    if (!any) throw InputError("empty scan: no candidate produced a fit");
    const FitReport* names = nullptr;
    for (const auto& c : scan.ranked) {
        if (c.fit) {
            names = &*c.fit;
            break;
        }
    }
    TextTable table;
    parameter_rows(table, head, columns, names->covariate_names_male, names->covariate_names_female);
    table.row(tau);
    table.rule();
    table.row(loglik);
    if (comparison) {
        table.rule();
        table.row(vuong);
    }
    table.rule();
    std::string out = table.str();
    if (comparison) out += "Vuong statistics against " + comparison->reference + "\n";
    return out;
}

std::string coupling_scan_json(const CouplingScan& scan, const ScanComparison* comparison) {
    json list = json::array();
    bool any = false;
    for (std::size_t i = 0; i < scan.ranked.size(); ++i) {
        const auto& c = scan.ranked[i];
        json item{{"family", copula_json(c.family)}};
        if (c.fit) {
            any = true;
            item["loglik"] = c.fit->loglik_joint;
            item["tau"] = c.fit->tau_coupling;
            item["fit"] = fit_json(*c.fit);
        } else {
            item["failure"] = c.failure;
        }
        if (comparison && i < comparison->results.size() && comparison->results[i])
            item["vuong"] = vuong_object(*comparison->results[i]);
        list.push_back(item);
    }
    if (!any) throw InputError("empty scan: no candidate produced a fit");
    json out{{"ranked", list}};
    if (comparison) out["vuong_reference"] = comparison->reference;
    return out.dump(2) + "\n";
}

std::string vuong_table(const VuongResult& r, const std::string& model1, const std::string& model2) {
    TextTable table;
    table.row({"model 1", model1});
    table.row({"model 2", model2});
    table.rule();
    table.row({"N", std::to_string(r.n)});
    table.row({"mean D", format_fixed(r.mean, 6)});
    table.row({"sd D", format_fixed(r.sd, 6)});
    table.row({"z0", format_fixed(r.z, 3)});
    table.row({"p-value", format_p_value(r.p_value)});
    std::string out = table.str();
    out += r.mean < 0.0 ? "model 1 fits better\n" : "model 2 fits better\n";
    return out;
}

}  // namespace copmarkov
