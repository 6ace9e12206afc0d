#include "copmarkov/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "copmarkov/error.hpp"
#include "copmarkov/simulate.hpp"
#include "copmarkov/special_functions.hpp"
#include "internal.hpp"

namespace copmarkov {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Unconstrained coordinate that puts a Gumbel-type copula within 1e-13 of independence.
constexpr double kGumbelIndependenceX = -30.0;

int margin_size(const MarginalParams& m) {
    return static_cast<int>(m.cutpoints.size() + m.beta.size());
}

int serial_size(const SerialModel& s) { return margin_size(s.margin) + 1; }

std::span<const double> block(const Eigen::VectorXd& x, int begin, int size) {
    return {x.data() + begin, static_cast<std::size_t>(size)};
}

SerialModel decode_serial(std::span<const double> x, const SerialModel& shape) {
    const int n = margin_size(shape.margin);
    SerialModel out;
    out.margin = decode_margin(x.first(static_cast<std::size_t>(n)), shape.margin.link,
                               shape.margin.categories(), static_cast<int>(shape.margin.beta.size()));
    out.copula = from_unconstrained(shape.copula.family, shape.copula.nu, x[static_cast<std::size_t>(n)]);
    return out;
}

// Negative log-likelihood guard: evaluation and domain errors become +inf so
// the line search backs off instead of aborting.
template <class F>
double guarded(F&& negloglik) {
    try {
        const double v = negloglik();
        return std::isfinite(v) ? v : kInf;
    } catch (const EvaluationError&) {
        return kInf;
    } catch (const DomainError&) {
        return kInf;
    }
}

void require_converged(const MinimizeResult& r, const std::string& stage) {
    if (r.converged()) return;
    std::ostringstream msg;
    msg.precision(10);
    msg << "stage " << stage << " stopped (" << status_name(r.status) << ") after " << r.iterations
        << " iterations, scaled gradient " << r.grad_norm << ", last iterate [";
    for (Eigen::Index i = 0; i < r.x.size(); ++i) msg << (i ? ", " : "") << r.x[i];
    msg << "]";
    throw StageFailure(msg.str(), stage, {r.x.data(), r.x.data() + r.x.size()});
}

StageRecord record(const std::string& label, const MinimizeResult& r) {
    return {label, -r.value, r.iterations, r.grad_norm, r.status};
}

std::string stage_label(const char* stage, Gender gender) {
    return std::string(stage) + "-" + gender_name(gender);
}

// Family and degrees of freedom of a spec, parameter reset to the independence point.
CopulaSpec family_template(const CopulaSpec& spec) {
    const bool gumbel_type =
        spec.family == CopulaFamily::Gumbel || spec.family == CopulaFamily::SurvivalGumbel;
    return gumbel_type ? CopulaSpec{spec.family, 1.0, 0.0} : CopulaSpec{spec.family, 0.0, spec.nu};
}

double independence_x(CopulaFamily family) {
    return family == CopulaFamily::Gumbel || family == CopulaFamily::SurvivalGumbel
               ? kGumbelIndependenceX
               : 0.0;
}

// Unconstrained copula coordinate matching an empirical tau, kept inside the
// family's range.
double tau_start_x(const CopulaSpec& family, double tau) {
    tau = std::clamp(tau, -0.9, 0.9);
    if (family.family == CopulaFamily::Gumbel || family.family == CopulaFamily::SurvivalGumbel)
        tau = std::max(tau, 0.01);
    return to_unconstrained(tau_inverse(family.family, tau, family.nu));
}

double safe_empirical_tau(const OrdinalPanel& panel, Pairing pairing, Gender gender) {
    try {
        return empirical_tau(panel, pairing, gender);
    } catch (const DegenerateResult&) {
        return 0.0;
    }
}

// One-parameter copula stage started from the better of the empirical-tau
// point and the family's independence point.
MinimizeResult fit_copula_coordinate(const std::function<double(double)>& negloglik,
                                     const CopulaSpec& family, double empirical,
                                     const OptimizerSettings& settings) {
    const double starts[2] = {tau_start_x(family, empirical), independence_x(family.family)};
    double best = starts[0];
    double best_value = negloglik(starts[0]);
    if (const double v = negloglik(starts[1]); v < best_value) {
        best = starts[1];
        best_value = v;
    }
    if (!std::isfinite(best_value)) throw NumericalFailure("copula stage has no finite starting value");
    ObjectiveFn f = [&](const Eigen::VectorXd& x) { return negloglik(x[0]); };
    return minimize(f, Eigen::VectorXd::Constant(1, best), settings);
}

// Joint objective in unconstrained coordinates. The gradient perturbs one
// block at a time and reuses the conditional intervals of the other series.
class JointObjective {
public:
    JointObjective(const OrdinalPanel& panel, JointModelParams shape)
        : panel_(panel), shape_(std::move(shape)), male_size_(serial_size(shape_.male)),
          female_size_(serial_size(shape_.female)) {}

    double operator()(const Eigen::VectorXd& x) const {
        return guarded([&] {
            const JointModelParams jm = decode_joint(x, shape_);
            return value(intervals(Gender::Male, jm.male), intervals(Gender::Female, jm.female),
                         jm.coupling);
        });
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
        const JointModelParams jm = decode_joint(x, shape_);
        const auto male = intervals(Gender::Male, jm.male);
        const auto female = intervals(Gender::Female, jm.female);
        Eigen::VectorXd g(x.size());
        Eigen::VectorXd probe = x;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double h = difference_step(x[i]);
            double v[2];
            for (int side = 0; side < 2; ++side) {
                probe[i] = side == 0 ? x[i] + h : x[i] - h;
                v[side] = guarded([&] {
                    if (i < male_size_) {
                        const SerialModel m = decode_serial(block(probe, 0, male_size_), shape_.male);
                        return value(intervals(Gender::Male, m), female, jm.coupling);
                    }
                    if (i < male_size_ + female_size_) {
                        const SerialModel f =
                            decode_serial(block(probe, male_size_, female_size_), shape_.female);
                        return value(male, intervals(Gender::Female, f), jm.coupling);
                    }
                    return value(male, female,
                                 from_unconstrained(shape_.coupling.family, shape_.coupling.nu,
                                                    probe[i]));
                });
                if (!std::isfinite(v[side]))
                    throw NumericalFailure(
                        "non-finite objective in difference stencil for coordinate " +
                        std::to_string(i));
            }
            probe[i] = x[i];
            g[i] = (v[0] - v[1]) / (2.0 * h);
        }
        return g;
    }

private:
    std::vector<CdfInterval> intervals(Gender gender, const SerialModel& model) const {
        return conditional_intervals(panel_, gender, model);
    }

    double value(const std::vector<CdfInterval>& male, const std::vector<CdfInterval>& female,
                 const CopulaSpec& coupling) const {
        return -detail::ordered_sum(coupling_contributions(panel_, male, female, coupling));
    }

    const OrdinalPanel& panel_;
    JointModelParams shape_;
    Eigen::Index male_size_;
    Eigen::Index female_size_;
};

double tau_derivative(CopulaFamily family, double nu, double x) {
    const double h = difference_step(x);
    return (kendall_tau(from_unconstrained(family, nu, x + h)) -
            kendall_tau(from_unconstrained(family, nu, x - h))) /
           (2.0 * h);
}

double theta_derivative(CopulaFamily family, double x) {
    switch (family) {
        case CopulaFamily::BVN:
        case CopulaFamily::StudentT: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case CopulaFamily::Gumbel:
        case CopulaFamily::SurvivalGumbel:
            return std::exp(x);
        case CopulaFamily::Frank:
            return 1.0;
    }
    return 1.0;
}

// Natural-parameter rows for one series: cutpoints, beta, theta.
void serial_jacobian(const SerialModel& shape, const Eigen::VectorXd& x, Eigen::Index col0,
                     Eigen::Index row0, Eigen::MatrixXd& jac) {
    const auto cuts = static_cast<Eigen::Index>(shape.margin.cutpoints.size());
    const auto p = static_cast<Eigen::Index>(shape.margin.beta.size());
    for (Eigen::Index k = 0; k < cuts; ++k) {
        jac(row0 + k, col0) = 1.0;
        for (Eigen::Index j = 1; j <= k; ++j) jac(row0 + k, col0 + j) = std::exp(x[col0 + j]);
    }
    for (Eigen::Index b = 0; b < p; ++b) jac(row0 + cuts + b, col0 + cuts + b) = 1.0;
    jac(row0 + cuts + p, col0 + cuts + p) = theta_derivative(shape.copula.family, x[col0 + cuts + p]);
}

}  // namespace

double dependence_gain(double loglik_joint, double loglik_markov_male, double loglik_markov_female) {
    return loglik_joint - (loglik_markov_male + loglik_markov_female);
}

Eigen::VectorXd encode_margin(const MarginalParams& margin) {
    validate(margin);
    const auto cuts = static_cast<Eigen::Index>(margin.cutpoints.size());
    Eigen::VectorXd x(cuts + static_cast<Eigen::Index>(margin.beta.size()));
    x[0] = margin.cutpoints[0];
    for (Eigen::Index k = 1; k < cuts; ++k)
        x[k] = std::log(margin.cutpoints[k] - margin.cutpoints[k - 1]);
    for (std::size_t b = 0; b < margin.beta.size(); ++b)
        x[cuts + static_cast<Eigen::Index>(b)] = margin.beta[b];
    return x;
}

MarginalParams decode_margin(std::span<const double> x, LinkFunction link, int categories,
                             int covariates) {
    if (categories < 2 || covariates < 0 ||
        x.size() != static_cast<std::size_t>(categories - 1 + covariates))
        throw DomainError("margin coordinate vector has the wrong length");
    MarginalParams m;
    m.link = link;
    m.cutpoints.resize(static_cast<std::size_t>(categories - 1));
    m.cutpoints[0] = x[0];
    for (std::size_t k = 1; k < m.cutpoints.size(); ++k)
        m.cutpoints[k] = m.cutpoints[k - 1] + std::exp(x[k]);
    m.beta.assign(x.begin() + (categories - 1), x.end());
    return m;
}

Eigen::VectorXd encode_joint(const JointModelParams& jm) {
    const int nm = serial_size(jm.male);
    const int nf = serial_size(jm.female);
    Eigen::VectorXd x(nm + nf + 1);
    x.head(nm - 1) = encode_margin(jm.male.margin);
    x[nm - 1] = to_unconstrained(jm.male.copula);
    x.segment(nm, nf - 1) = encode_margin(jm.female.margin);
    x[nm + nf - 1] = to_unconstrained(jm.female.copula);
    x[nm + nf] = to_unconstrained(jm.coupling);
    return x;
}

JointModelParams decode_joint(const Eigen::VectorXd& x, const JointModelParams& shape) {
    const int nm = serial_size(shape.male);
    const int nf = serial_size(shape.female);
    if (x.size() != nm + nf + 1) throw DomainError("joint coordinate vector has the wrong length");
    JointModelParams jm;
    jm.male = decode_serial(block(x, 0, nm), shape.male);
    jm.female = decode_serial(block(x, nm, nf), shape.female);
    jm.coupling = from_unconstrained(shape.coupling.family, shape.coupling.nu, x[nm + nf]);
    return jm;
}

MarginalParams initial_margin(const OrdinalPanel& panel, Gender gender, LinkFunction link) {
    const int K = panel.categories(gender);
    std::vector<double> counts(static_cast<std::size_t>(K), 0.5);
    for (int y : panel.responses(gender)) counts[static_cast<std::size_t>(y - 1)] += 1.0;
    double total = 0.0;
    for (double c : counts) total += c;
    MarginalParams m;
    m.link = link;
    double cumulative = 0.0;
    for (int k = 0; k + 1 < K; ++k) {
        cumulative += counts[static_cast<std::size_t>(k)];
        m.cutpoints.push_back(link_quantile(link, cumulative / total));
    }
    m.beta.assign(static_cast<std::size_t>(panel.covariate_dim()), 0.0);
    return m;
}

MarginFit fit_margin(const OrdinalPanel& panel, Gender gender, LinkFunction link,
                     const OptimizerSettings& settings) {
    validate(settings);
    const MarginalParams start = initial_margin(panel, gender, link);
    const int K = start.categories();
    const int p = panel.covariate_dim();
    ObjectiveFn f = [&](const Eigen::VectorXd& x) {
        return guarded([&] {
            return -loglik_indep(panel, gender, decode_margin(block(x, 0, static_cast<int>(x.size())),
                                                              link, K, p));
        });
    };
    const std::string label = stage_label("1a", gender);
    const MinimizeResult r = minimize(f, encode_margin(start), settings);
    require_converged(r, label);
    MarginFit out;
    out.gender = gender;
    out.margin = decode_margin(block(r.x, 0, static_cast<int>(r.x.size())), link, K, p);
    out.loglik = -r.value;
    out.stage = record(label, r);
    return out;
}

SerialFit fit_serial(const OrdinalPanel& panel, const MarginFit& margin, const CopulaSpec& family,
                     const OptimizerSettings& settings) {
    validate(settings);
    const Gender gender = margin.gender;
    SerialFit out;
    out.gender = gender;
    out.independent = margin;
    out.stages.push_back(margin.stage);

    const std::string label_b = stage_label("1b", gender);
    auto negloglik_b = [&](double x) {
        return guarded([&] {
            return -loglik_markov(panel, gender,
                                  {margin.margin, from_unconstrained(family.family, family.nu, x)});
        });
    };
    const MinimizeResult rb = fit_copula_coordinate(
        negloglik_b, family, safe_empirical_tau(panel, Pairing::Lag, gender), settings);
    require_converged(rb, label_b);
    out.partial = {margin.margin, from_unconstrained(family.family, family.nu, rb.x[0])};
    out.loglik_partial = -rb.value;
    out.stages.push_back(record(label_b, rb));

    const std::string label_c = stage_label("1c", gender);
    const SerialModel shape = out.partial;
    const int n = serial_size(shape);
    ObjectiveFn fc = [&](const Eigen::VectorXd& x) {
        return guarded([&] { return -loglik_markov(panel, gender, decode_serial(block(x, 0, n), shape)); });
    };
    Eigen::VectorXd x0(n);
    x0.head(n - 1) = encode_margin(shape.margin);
    x0[n - 1] = rb.x[0];
    const MinimizeResult rc = minimize(fc, x0, settings);
    require_converged(rc, label_c);
    out.model = decode_serial(block(rc.x, 0, n), shape);
    out.loglik = -rc.value;
    out.stages.push_back(record(label_c, rc));
    return out;
}

SerialFit fit_serial(const OrdinalPanel& panel, Gender gender, const CopulaSpec& family,
                     LinkFunction link, const OptimizerSettings& settings) {
    return fit_serial(panel, fit_margin(panel, gender, link, settings), family, settings);
}

FitReport fit_joint(const OrdinalPanel& panel, const SerialFit& male, const SerialFit& female,
                    const CopulaSpec& coupling_family, const OptimizerSettings& settings,
                    bool with_standard_errors) {
    validate(settings);
    validate(coupling_family);
    if (male.gender != Gender::Male || female.gender != Gender::Female)
        throw DomainError("serial fits are not a male/female pair");

    FitReport report;
    report.families = {family_template(male.model.copula), family_template(female.model.copula),
                       family_template(coupling_family)};
    report.link = male.model.margin.link;
    report.covariate_names_male = panel.covariate_names(Gender::Male);
    report.covariate_names_female = panel.covariate_names(Gender::Female);
    report.loglik_indep_male = male.independent.loglik;
    report.loglik_indep_female = female.independent.loglik;
    report.loglik_partial_male = male.loglik_partial;
    report.loglik_partial_female = female.loglik_partial;
    report.loglik_markov_male = male.loglik;
    report.loglik_markov_female = female.loglik;
    report.stages = male.stages;
    report.stages.insert(report.stages.end(), female.stages.begin(), female.stages.end());

    // Stage 4: coupling parameter only, conditional intervals fixed.
    const auto male_iv = conditional_intervals(panel, Gender::Male, male.model);
    const auto female_iv = conditional_intervals(panel, Gender::Female, female.model);
    auto negloglik_4 = [&](double x) {
        return guarded([&] {
            return -detail::ordered_sum(coupling_contributions(
                panel, male_iv, female_iv,
                from_unconstrained(coupling_family.family, coupling_family.nu, x)));
        });
    };
    const MinimizeResult r4 = fit_copula_coordinate(
        negloglik_4, coupling_family, safe_empirical_tau(panel, Pairing::WithinCouple, Gender::Male),
        settings);
    require_converged(r4, "4");
    report.loglik_joint_stage4 = -r4.value;
    report.stages.push_back(record("4", r4));

    // Stage 5: everything, from the stage 1c and 4 estimates.
    JointModelParams shape{male.model, female.model,
                           from_unconstrained(coupling_family.family, coupling_family.nu, r4.x[0])};
    const JointObjective objective(panel, shape);
    Eigen::VectorXd x0 = encode_joint(shape);
    x0[x0.size() - 1] = r4.x[0];
    const MinimizeResult r5 = minimize(
        [&](const Eigen::VectorXd& x) { return objective(x); }, x0, settings,
        [&](const Eigen::VectorXd& x) { return objective.gradient(x); });
    require_converged(r5, "5");
    report.stages.push_back(record("5", r5));
    report.estimates = decode_joint(r5.x, shape);

    LoglikStats stats;
    report.loglik_joint = loglik_joint(panel, report.estimates, &stats);
    report.floored_terms = stats.floored_terms;
    report.dependence_gain =
        dependence_gain(report.loglik_joint, report.loglik_markov_male, report.loglik_markov_female);
    report.tau_male = kendall_tau(report.estimates.male.copula);
    report.tau_female = kendall_tau(report.estimates.female.copula);
    report.tau_coupling = kendall_tau(report.estimates.coupling);
    report.convention_note =
        "P(Y <= k) = F(alpha_k + x'beta): a positive coefficient moves mass toward lower categories";

    if (with_standard_errors) {
        StandardErrorResult se = standard_errors(panel, report.estimates);
        report.errors = std::move(se.errors);
        report.information_eigenvalues = std::move(se.information_eigenvalues);
    }
    return report;
}

FitReport fit_stagewise(const OrdinalPanel& panel, const FamilyChoice& families, LinkFunction link,
                        const OptimizerSettings& settings, bool with_standard_errors) {
    const SerialFit male = fit_serial(panel, Gender::Male, families.serial_male, link, settings);
    const SerialFit female = fit_serial(panel, Gender::Female, families.serial_female, link, settings);
    return fit_joint(panel, male, female, families.coupling, settings, with_standard_errors);
}

StandardErrorResult standard_errors(const OrdinalPanel& panel, const JointModelParams& jm) {
    const JointObjective objective(panel, jm);
    const Eigen::VectorXd x = encode_joint(jm);
    const Eigen::MatrixXd info =
        num_hessian([&](const Eigen::VectorXd& v) { return objective(v); }, x);

    StandardErrorResult out;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
    if (eig.info() != Eigen::Success) throw NumericalFailure("eigen decomposition of the information failed");
    const Eigen::VectorXd values = eig.eigenvalues();
    out.information_eigenvalues.assign(values.data(), values.data() + values.size());
    const double largest = values.cwiseAbs().maxCoeff();
    if (!(values.minCoeff() > 1.0e-12 * largest)) return out;

    const Eigen::MatrixXd cov =
        eig.eigenvectors() * values.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();

    const int nm = serial_size(jm.male);
    const int nf = serial_size(jm.female);
    const Eigen::Index n = x.size();
    // Rows: male block, female block, coupling theta, then the three taus.
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n + 3, n);
    serial_jacobian(jm.male, x, 0, 0, jac);
    serial_jacobian(jm.female, x, nm, nm, jac);
    jac(n - 1, n - 1) = theta_derivative(jm.coupling.family, x[n - 1]);
    jac(n, nm - 1) = tau_derivative(jm.male.copula.family, jm.male.copula.nu, x[nm - 1]);
    jac(n + 1, nm + nf - 1) = tau_derivative(jm.female.copula.family, jm.female.copula.nu, x[nm + nf - 1]);
    jac(n + 2, n - 1) = tau_derivative(jm.coupling.family, jm.coupling.nu, x[n - 1]);

    const Eigen::VectorXd var = (jac * cov * jac.transpose()).diagonal();
    auto se = [&](Eigen::Index i) { return std::sqrt(std::max(var[i], 0.0)); };

    ParameterErrors e;
    auto fill = [&](const SerialModel& s, Eigen::Index row0, std::vector<double>& cuts,
                    std::vector<double>& beta, double& theta) {
        const auto K1 = static_cast<Eigen::Index>(s.margin.cutpoints.size());
        const auto p = static_cast<Eigen::Index>(s.margin.beta.size());
        for (Eigen::Index k = 0; k < K1; ++k) cuts.push_back(se(row0 + k));
        for (Eigen::Index b = 0; b < p; ++b) beta.push_back(se(row0 + K1 + b));
        theta = se(row0 + K1 + p);
    };
    fill(jm.male, 0, e.cutpoints_male, e.beta_male, e.theta_male);
    fill(jm.female, nm, e.cutpoints_female, e.beta_female, e.theta_female);
    e.theta_coupling = se(n - 1);
    e.tau_male = se(n);
    e.tau_female = se(n + 1);
    e.tau_coupling = se(n + 2);
    out.errors = std::move(e);
    return out;
}

WaldResult wald_test(double estimate, double se) {
    if (!(se > 0.0) || !std::isfinite(se)) throw DomainError("Wald test needs a positive standard error");
    if (!std::isfinite(estimate)) throw DomainError("Wald test needs a finite estimate");
    const double z = estimate / se;
    return {z, std::min(1.0, 2.0 * norm_cdf(-std::abs(z)))};
}

}  // namespace copmarkov
