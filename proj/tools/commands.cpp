#include "commands.hpp"

#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "copmarkov/error.hpp"
#include "copmarkov/estimation.hpp"
#include "copmarkov/panel_io.hpp"
#include "copmarkov/parallel.hpp"
#include "copmarkov/report.hpp"
#include "copmarkov/selection.hpp"
#include "copmarkov/simulate.hpp"

namespace copmarkov::cli {
namespace {

std::string shortest(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

CopulaSpec family_arg(const std::string& token) {
    try {
        return parse_copula_template(token);
    } catch (const DomainError& e) {
        throw InputError(e.what());
    }
}

/// Flags shared by the commands that read a panel.
struct DataFlags {
    std::optional<std::string> data;
    std::optional<std::string> config;
    std::optional<int> categories_m;
    std::optional<int> categories_f;
    std::optional<std::string> link;
    std::optional<int> threads;
    bool flip_mu_sign = false;

    void add(CLI::App* app) {
        app->add_option("--data", data, "Panel CSV (couple_id,wave,y_m,y_f,x_m_k..,x_f_k..)");
        app->add_option("--config", config, "key = value configuration file");
        app->add_option("--categories-m", categories_m, "Number of male categories K");
        app->add_option("--categories-f", categories_f, "Number of female categories K");
        app->add_option("--link", link, "probit or logit");
        app->add_option("--threads", threads, "Worker threads for likelihood evaluation");
        app->add_flag("--flip-mu-sign", flip_mu_sign,
                      "Negate covariates so a positive coefficient raises high categories");
    }

    RunConfig resolve() const {
        RunConfig cfg;
        if (config) cfg = load_config(*config, cfg);
        if (data) cfg.data_path = *data;
        if (categories_m) cfg.categories_male = *categories_m;
        if (categories_f) cfg.categories_female = *categories_f;
        if (link) {
            try {
                cfg.link = parse_link(*link);
            } catch (const DomainError& e) {
                throw InputError(e.what());
            }
        }
        if (threads) cfg.threads = *threads;
        if (flip_mu_sign) cfg.flip_mu_sign = true;
        validate(cfg);
        set_worker_threads(cfg.threads);
        return cfg;
    }
};

OrdinalPanel load_panel(const RunConfig& cfg, std::ostream& out) {
    if (cfg.data_path.empty()) throw InputError("no data file given (--data or 'data' in the config)");
    OrdinalPanel panel = load_csv(cfg.data_path, {cfg.categories_male, cfg.categories_female});
    out << "panel: " << panel.couple_count() << " couples, " << panel.observation_count()
        << " couple-waves, K = " << panel.categories(Gender::Male) << "/"
        << panel.categories(Gender::Female) << ", waves per couple:";
    for (const auto& [T, count] : wave_count_distribution(panel)) out << " T=" << T << " x" << count;
    out << "\n";
    return cfg.flip_mu_sign ? panel.with_negated_covariates() : panel;
}

void note_sign(FitReport& report, bool flipped) {
    if (flipped)
        report.convention_note =
            "covariates were negated before fitting: a positive coefficient moves mass toward "
            "higher categories";
}

void write_pair(const std::string& stem, const std::string& json, const std::string& text) {
    write_text_file(stem + ".json", json);
    write_text_file(stem + ".txt", text);
}

struct FitFlags : DataFlags {
    std::optional<std::string> serial_m;
    std::optional<std::string> serial_f;
    std::optional<std::string> coupling;
    std::string out = "fit";
    bool no_se = false;
};

int cmd_fit(const FitFlags& f, std::ostream& out) {
    RunConfig cfg = f.resolve();
    if (f.serial_m) cfg.families.serial_male = family_arg(*f.serial_m);
    if (f.serial_f) cfg.families.serial_female = family_arg(*f.serial_f);
    if (f.coupling) cfg.families.coupling = family_arg(*f.coupling);
    const OrdinalPanel panel = load_panel(cfg, out);
    FitReport report = fit_stagewise(panel, cfg.families, cfg.link, cfg.optimizer, !f.no_se);
    note_sign(report, cfg.flip_mu_sign);
    const std::string table = fit_report_table(report);
    write_pair(f.out, fit_report_json(report), table);
    out << table;
    return kExitOk;
}

struct ScanFlags : DataFlags {
    std::optional<std::string> candidates;
    std::optional<std::string> coupling_candidates;
    std::optional<std::string> tdf;
    std::string reference = "bvn";
    std::string out = "scan";
    bool with_se = false;
};

ScanComparison compare_to_reference(const OrdinalPanel& panel, const CouplingScan& scan,
                                    const std::string& reference_token) {
    const std::string reference = copula_label(family_arg(reference_token));
    ScanComparison cmp{reference, std::vector<std::optional<VuongResult>>(scan.ranked.size())};
    const FitReport* ref = nullptr;
    for (const auto& c : scan.ranked) {
        if (c.fit && copula_label(c.family) == reference) ref = &*c.fit;
    }
    if (!ref) return cmp;
    for (std::size_t i = 0; i < scan.ranked.size(); ++i) {
        const auto& c = scan.ranked[i];
        if (!c.fit || copula_label(c.family) == reference) continue;
        try {
            cmp.results[i] = vuong_test(panel, ref->estimates, c.fit->estimates);
        } catch (const DegenerateResult&) {
        }
    }
    return cmp;
}

int cmd_scan(const ScanFlags& f, std::ostream& out) {
    RunConfig cfg = f.resolve();
    if (f.candidates) cfg.candidates = *f.candidates;
    if (f.tdf) cfg.t_df = parse_int_list(*f.tdf);
    validate(cfg);
    const CandidateSet serial = parse_candidates(cfg.candidates, cfg.t_df);
    const CandidateSet coupling =
        parse_candidates(f.coupling_candidates.value_or(cfg.candidates), cfg.t_df);
    const OrdinalPanel panel = load_panel(cfg, out);

    const SerialScan male = scan_serial(panel, Gender::Male, serial, cfg.link, cfg.optimizer);
    const SerialScan female = scan_serial(panel, Gender::Female, serial, cfg.link, cfg.optimizer);
    const std::string serial_table = serial_scan_table(male, female);
    write_pair(f.out + "_serial", serial_scan_json(male, female), serial_table);
    out << serial_table;

    const SerialFit& best_m = *male.ranked.front().fit;
    const SerialFit& best_f = *female.ranked.front().fit;
    out << "serial choice: male " << copula_label(best_m.model.copula) << ", female "
        << copula_label(best_f.model.copula) << "\n";
    CouplingScan joint = scan_coupling(panel, best_m, best_f, coupling, cfg.optimizer, f.with_se);
    for (auto& c : joint.ranked) {
        if (c.fit) note_sign(*c.fit, cfg.flip_mu_sign);
    }
    const ScanComparison cmp = compare_to_reference(panel, joint, f.reference);
    const std::string joint_table = coupling_scan_table(joint, &cmp);
    write_pair(f.out + "_coupling", coupling_scan_json(joint, &cmp), joint_table);
    out << joint_table;
    for (const auto& c : joint.ranked) {
        if (c.fit) {
            out << copula_label(c.family) << ": l = " << format_fixed(c.fit->loglik_joint, 1)
                << ", tau = " << format_fixed(c.fit->tau_coupling) << "\n";
        } else {
            out << copula_label(c.family) << ": failed (" << c.failure << ")\n";
        }
    }
    return kExitOk;
}

struct VuongFlags : DataFlags {
    std::string fit1;
    std::string fit2;
    std::optional<std::string> out;
};

int cmd_vuong(const VuongFlags& f, std::ostream& out) {
    RunConfig cfg = f.resolve();
    const JointModelParams m1 = joint_params_from_json(read_text_file(f.fit1));
    const JointModelParams m2 = joint_params_from_json(read_text_file(f.fit2));
    if (!cfg.categories_male) cfg.categories_male = m1.male.margin.categories();
    if (!cfg.categories_female) cfg.categories_female = m1.female.margin.categories();
    const OrdinalPanel panel = load_panel(cfg, out);
    const VuongResult r = vuong_test(panel, m1, m2);
    const std::string l1 = copula_label(m1.coupling);
    const std::string l2 = copula_label(m2.coupling);
    const std::string table = vuong_table(r, f.fit1 + " (" + l1 + ")", f.fit2 + " (" + l2 + ")");
    if (f.out) write_pair(*f.out, vuong_json(r, f.fit1, f.fit2), table);
    out << table;
    return kExitOk;
}

struct SimulateFlags {
    std::uint64_t seed = 1;
    std::size_t n = 100;
    std::size_t T = 7;
    std::optional<std::string> model;
    int categories_m = 5;
    int categories_f = 5;
    std::string link = "probit";
    std::string serial_m = "gumbel";
    std::string serial_f = "gumbel";
    std::string coupling = "bvn";
    double tau_m = 0.0;
    double tau_f = 0.0;
    double tau_c = 0.0;
    int covariates = 0;
    std::string beta_m;
    std::string beta_f;
    std::string out;
    std::optional<std::string> model_out;
};

std::vector<double> parse_reals(const std::string& text, std::size_t expected, const char* flag) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(token, &used));
            if (used != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw InputError(std::string(flag) + ": '" + token + "' is not a number");
        }
    }
    if (text.empty()) out.assign(expected, 0.0);
    if (out.size() != expected)
        throw InputError(std::string(flag) + " needs " + std::to_string(expected) + " values");
    return out;
}

SerialModel serial_from_flags(int K, LinkFunction link, const std::string& family, double tau,
                              std::vector<double> beta) {
    if (K < 2) throw InputError("category counts must be at least 2");
    SerialModel s;
    s.margin.link = link;
    for (int k = 1; k < K; ++k)
        s.margin.cutpoints.push_back(link_quantile(link, static_cast<double>(k) / K));
    s.margin.beta = std::move(beta);
    const CopulaSpec tmpl = family_arg(family);
    s.copula = tau_inverse(tmpl.family, tau, tmpl.nu);
    return s;
}

int cmd_simulate(const SimulateFlags& f, std::ostream& out) {
    JointModelParams jm;
    const auto p = static_cast<std::size_t>(std::max(f.covariates, 0));
    if (f.model) {
        jm = joint_params_from_json(read_text_file(*f.model));
    } else {
        LinkFunction link;
        try {
            link = parse_link(f.link);
            jm.male = serial_from_flags(f.categories_m, link, f.serial_m, f.tau_m,
                                        parse_reals(f.beta_m, p, "--beta-m"));
            jm.female = serial_from_flags(f.categories_f, link, f.serial_f, f.tau_f,
                                          parse_reals(f.beta_f, p, "--beta-f"));
            const CopulaSpec c = family_arg(f.coupling);
            jm.coupling = tau_inverse(c.family, f.tau_c, c.nu);
        } catch (const DomainError& e) {
            throw InputError(e.what());
        }
    }
    SimDesign design;
    design.couples = f.n;
    design.waves = f.T;
    design.seed = f.seed;
    design.covariate_dim = static_cast<int>(jm.male.margin.beta.size());
    design.covariates =
        design.covariate_dim > 0 ? CovariateDesign::StandardNormal : CovariateDesign::None;
    const OrdinalPanel panel = [&] {
        try {
            return simulate_panel(jm, design);
        } catch (const DomainError& e) {
            throw InputError(e.what());
        }
    }();
    write_csv(panel, f.out);
    if (f.model_out) write_text_file(*f.model_out, joint_params_json(jm));
    out << "wrote " << panel.couple_count() << " couples x " << f.T << " waves to " << f.out << "\n";
    return kExitOk;
}

struct TauFlags {
    std::string family;
    std::optional<double> theta;
    std::optional<double> tau;
    std::optional<double> df;
};

CopulaSpec spec_from(const std::string& family, std::optional<double> theta, std::optional<double> tau,
                     std::optional<double> df) {
    CopulaSpec tmpl = family_arg(family == "t" && df ? "t" + shortest(*df) : family);
    if (tmpl.family == CopulaFamily::StudentT && df) tmpl.nu = *df;
    if (theta.has_value() == tau.has_value()) throw InputError("give exactly one of --theta and --tau");
    try {
        if (tau) return tau_inverse(tmpl.family, *tau, tmpl.nu);
        CopulaSpec spec{tmpl.family, *theta, tmpl.nu};
        validate(spec);
        return spec;
    } catch (const DomainError& e) {
        throw InputError(e.what());
    }
}

int cmd_tau(const TauFlags& f, std::ostream& out) {
    const CopulaSpec spec = spec_from(f.family, f.theta, f.tau, f.df);
    if (f.theta) {
        out << shortest(kendall_tau(spec)) << "\n";
    } else {
        out << shortest(spec.theta) << "\n";
    }
    return kExitOk;
}

struct ContourFlags : TauFlags {
    int grid = 100;
    double limit = 4.0;
    std::string out;
};

int cmd_contour(const ContourFlags& f, std::ostream& out) {
    const CopulaSpec spec = spec_from(f.family, f.theta, f.tau, f.df);
    DensityGrid grid;
    try {
        grid = density_grid(spec, f.grid, f.limit);
    } catch (const DomainError& e) {
        throw InputError(e.what());
    }
    std::ostringstream csv;
    csv << "z1,z2,density\n";
    const auto n = grid.density.rows();
    char buf[96];
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.10g\n", 0.5 * (grid.edges[i] + grid.edges[i + 1]),
                          0.5 * (grid.edges[j] + grid.edges[j + 1]), grid.density(i, j));
            csv << buf;
        }
    }
    write_text_file(f.out, csv.str());
    // Half-plane quadrants carry C(1/2, 1/2) under every copula; the tail
    // corners are what tell the families apart.
    double lower = 0.0;
    double upper = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double zi = 0.5 * (grid.edges[i] + grid.edges[i + 1]);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double zj = 0.5 * (grid.edges[j] + grid.edges[j + 1]);
            if (zi < -1.0 && zj < -1.0) lower += grid.density(i, j);
            if (zi > 1.0 && zj > 1.0) upper += grid.density(i, j);
        }
    }
    lower *= grid.cell_area();
    upper *= grid.cell_area();
    out << copula_label(spec) << " theta = " << shortest(spec.theta) << ", tau = "
        << shortest(kendall_tau(spec)) << "\n"
        << "mass: total " << format_fixed(grid.total_mass(), 4) << ", both below -1 "
        << format_fixed(lower, 4) << ", both above 1 " << format_fixed(upper, 4) << "\n"
        << "wrote " << n << " x " << n << " grid to " << f.out << "\n";
    return kExitOk;
}

void add_tau_options(CLI::App* app, TauFlags& f) {
    app->add_option("--family", f.family, "bvn, frank, gumbel, sgumbel, t or t<df>")->required();
    app->add_option("--theta", f.theta, "Copula parameter");
    app->add_option("--tau", f.tau, "Kendall's tau");
    app->add_option("--df", f.df, "Degrees of freedom for the t copula");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Joint copula Markov models for paired ordinal panels", "copmarkov"};
    app.require_subcommand(1, 1);

    FitFlags fit;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Staged maximum-likelihood fit");
    fit.add(fit_cmd);
    fit_cmd->add_option("--serial-m", fit.serial_m, "Serial copula family for the male series");
    fit_cmd->add_option("--serial-f", fit.serial_f, "Serial copula family for the female series");
    fit_cmd->add_option("--coupling", fit.coupling, "Coupling copula family");
    fit_cmd->add_option("--out", fit.out, "Output stem; writes <stem>.json and <stem>.txt");
    fit_cmd->add_flag("--no-se", fit.no_se, "Skip standard errors");

    ScanFlags scan;
    CLI::App* scan_cmd = app.add_subcommand("scan", "Rank serial and coupling copula families");
    scan.add(scan_cmd);
    scan_cmd->add_option("--candidates", scan.candidates, "Comma list, e.g. bvn,frank,gumbel,sgumbel,t");
    scan_cmd->add_option("--coupling-candidates", scan.coupling_candidates,
                         "Coupling candidates (default: same as --candidates)");
    scan_cmd->add_option("--tdf", scan.tdf, "Degrees of freedom for 't', e.g. 1-10");
    scan_cmd->add_option("--vuong-reference", scan.reference, "Coupling family the Vuong row compares against");
    scan_cmd->add_option("--out", scan.out, "Output stem");
    scan_cmd->add_flag("--with-se", scan.with_se, "Compute standard errors for every coupling candidate");

    VuongFlags vuong;
    CLI::App* vuong_cmd = app.add_subcommand("vuong", "Vuong test between two fitted joint models");
    vuong.add(vuong_cmd);
    vuong_cmd->add_option("--fit1", vuong.fit1, "Fit report or model JSON of model 1")->required();
    vuong_cmd->add_option("--fit2", vuong.fit2, "Fit report or model JSON of model 2")->required();
    vuong_cmd->add_option("--out", vuong.out, "Output stem");

    SimulateFlags sim;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Draw a panel from a joint model");
    sim_cmd->add_option("--seed", sim.seed, "64-bit seed");
    sim_cmd->add_option("--n", sim.n, "Number of couples")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--T", sim.T, "Waves per couple")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--model", sim.model, "Model JSON (overrides the family flags)");
    sim_cmd->add_option("--categories-m", sim.categories_m, "Male categories K");
    sim_cmd->add_option("--categories-f", sim.categories_f, "Female categories K");
    sim_cmd->add_option("--link", sim.link, "probit or logit");
    sim_cmd->add_option("--serial-m", sim.serial_m, "Male serial family");
    sim_cmd->add_option("--serial-f", sim.serial_f, "Female serial family");
    sim_cmd->add_option("--coupling", sim.coupling, "Coupling family");
    sim_cmd->add_option("--tau-m", sim.tau_m, "Male serial Kendall's tau");
    sim_cmd->add_option("--tau-f", sim.tau_f, "Female serial Kendall's tau");
    sim_cmd->add_option("--tau-c", sim.tau_c, "Coupling Kendall's tau");
    sim_cmd->add_option("--covariates", sim.covariates, "Standard normal covariates per gender");
    sim_cmd->add_option("--beta-m", sim.beta_m, "Male coefficients, comma separated");
    sim_cmd->add_option("--beta-f", sim.beta_f, "Female coefficients, comma separated");
    sim_cmd->add_option("--out", sim.out, "Output CSV")->required();
    sim_cmd->add_option("--model-out", sim.model_out, "Also write the model JSON here");

    TauFlags tau;
    CLI::App* tau_cmd = app.add_subcommand("tau", "Convert between copula parameter and Kendall's tau");
    add_tau_options(tau_cmd, tau);

    ContourFlags contour;
    CLI::App* contour_cmd =
        app.add_subcommand("contour", "Copula density grid with standard normal margins");
    add_tau_options(contour_cmd, contour);
    contour_cmd->add_option("--grid", contour.grid, "Cells per side");
    contour_cmd->add_option("--limit", contour.limit, "Grid covers [-limit, limit]^2");
    contour_cmd->add_option("--out", contour.out, "Output CSV (z1,z2,density)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*fit_cmd) return cmd_fit(fit, out);
        if (*scan_cmd) return cmd_scan(scan, out);
        if (*vuong_cmd) return cmd_vuong(vuong, out);
        if (*sim_cmd) return cmd_simulate(sim, out);
        if (*tau_cmd) return cmd_tau(tau, out);
        if (*contour_cmd) return cmd_contour(contour, out);
    } catch (const StageFailure& e) {
        err << "error: optimisation failed in stage " << e.stage() << ": " << e.what() << "\n";
        return kExitNumerical;
    } catch (const NumericalFailure& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const DegenerateResult& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const EvaluationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}

}  // namespace copmarkov::cli
