#include "copmarkov/panel.hpp"

#include "copmarkov/error.hpp"

namespace copmarkov {

const char* gender_name(Gender gender) {
    return gender == Gender::Male ? "male" : "female";
}

OrdinalPanel::OrdinalPanel(int categories_male, int categories_female, int covariate_dim)
    : categories_{categories_male, categories_female}, covariate_dim_(covariate_dim) {
    if (categories_male < 2 || categories_female < 2)
        throw InputError("each series needs at least two categories");
    if (covariate_dim < 0) throw InputError("negative covariate dimension");
    for (int g = 0; g < 2; ++g) {
        for (int k = 0; k < covariate_dim; ++k) names_[g].push_back("x" + std::to_string(k + 1));
    }
}

void OrdinalPanel::add_couple(std::string id, int first_wave, std::vector<int> y_male,
                              std::vector<int> y_female, const Eigen::MatrixXd& x_male,
                              const Eigen::MatrixXd& x_female) {
    const std::size_t waves = y_male.size();
    if (waves == 0) throw InputError("couple " + id + " has no waves");
    if (y_female.size() != waves) throw InputError("couple " + id + " is unbalanced across genders");
    const Eigen::MatrixXd* x[2] = {&x_male, &x_female};
    const std::vector<int>* y[2] = {&y_male, &y_female};
    for (int g = 0; g < 2; ++g) {
        if (static_cast<std::size_t>(x[g]->rows()) != waves || x[g]->cols() != covariate_dim_)
            throw InputError("couple " + id + " has a covariate matrix of the wrong shape");
        for (int v : *y[g]) {
            if (v < 1 || v > categories_[g])
                throw InputError("couple " + id + " has category " + std::to_string(v) +
                                 " outside 1.." + std::to_string(categories_[g]));
        }
    }
    for (int g = 0; g < 2; ++g) {
        responses_[g].insert(responses_[g].end(), y[g]->begin(), y[g]->end());
        for (std::size_t t = 0; t < waves; ++t) {
            for (int k = 0; k < covariate_dim_; ++k) covariates_[g].push_back((*x[g])(t, k));
        }
    }
    ids_.push_back(std::move(id));
    first_wave_.push_back(first_wave);
    offsets_.push_back(offsets_.back() + waves);
}

std::vector<std::string> OrdinalPanel::covariate_names(Gender gender) const {
    return names_[static_cast<int>(gender)];
}

void OrdinalPanel::set_covariate_names(std::vector<std::string> male,
                                       std::vector<std::string> female) {
    if (male.size() != static_cast<std::size_t>(covariate_dim_) ||
        female.size() != static_cast<std::size_t>(covariate_dim_))
        throw InputError("covariate name count does not match covariate dimension");
    names_[0] = std::move(male);
    names_[1] = std::move(female);
}

OrdinalPanel OrdinalPanel::select(std::span<const std::size_t> couples) const {
    OrdinalPanel out(categories_[0], categories_[1], covariate_dim_);
    out.names_[0] = names_[0];
    out.names_[1] = names_[1];
    for (std::size_t c : couples) {
        if (c >= couple_count()) throw InputError("couple index out of range");
        const auto rows = static_cast<Eigen::Index>(waves(c));
        const auto start = static_cast<Eigen::Index>(offset(c));
        Eigen::MatrixXd xm = covariates(Gender::Male).middleRows(start, rows);
        Eigen::MatrixXd xf = covariates(Gender::Female).middleRows(start, rows);
        auto ym = responses(Gender::Male, c);
        auto yf = responses(Gender::Female, c);
        out.add_couple(ids_[c], first_wave_[c], {ym.begin(), ym.end()}, {yf.begin(), yf.end()}, xm,
                       xf);
    }
    return out;
}

OrdinalPanel OrdinalPanel::with_negated_covariates() const {
    OrdinalPanel out = *this;
    for (auto& data : out.covariates_) {
        for (double& v : data) v = -v;
    }
    return out;
}

}  // namespace copmarkov
