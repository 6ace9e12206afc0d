#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace copmarkov {

enum class Gender { Male = 0, Female = 1 };

inline constexpr Gender kGenders[] = {Gender::Male, Gender::Female};

const char* gender_name(Gender gender);

/// Ordinal responses and covariates of both members of each couple over
/// consecutive waves. Responses are categories 1..K; covariate matrices hold
/// one row per couple-wave, stored couple by couple.
class OrdinalPanel {
public:
    OrdinalPanel(int categories_male, int categories_female, int covariate_dim);

    /// Appends a couple observed at waves first_wave .. first_wave + T - 1.
    /// Throws InputError on inconsistent sizes or out-of-range categories.
    void add_couple(std::string id, int first_wave, std::vector<int> y_male,
                    std::vector<int> y_female, const Eigen::MatrixXd& x_male,
                    const Eigen::MatrixXd& x_female);

    std::size_t couple_count() const { return ids_.size(); }
    std::size_t observation_count() const { return offsets_.back(); }
    int categories(Gender gender) const { return categories_[static_cast<int>(gender)]; }
    int covariate_dim() const { return covariate_dim_; }

    const std::string& couple_id(std::size_t couple) const { return ids_[couple]; }
    int first_wave(std::size_t couple) const { return first_wave_[couple]; }
    std::size_t waves(std::size_t couple) const { return offsets_[couple + 1] - offsets_[couple]; }
    /// Index of the couple's first observation in the flat per-series arrays.
    std::size_t offset(std::size_t couple) const { return offsets_[couple]; }

    std::span<const int> responses(Gender gender) const {
        return responses_[static_cast<int>(gender)];
    }
    std::span<const int> responses(Gender gender, std::size_t couple) const {
        return responses(gender).subspan(offset(couple), waves(couple));
    }
    using CovariateMap =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    CovariateMap covariates(Gender gender) const {
        const auto& data = covariates_[static_cast<int>(gender)];
        return CovariateMap(data.data(), static_cast<Eigen::Index>(observation_count()),
                            covariate_dim_);
    }

    std::vector<std::string> covariate_names(Gender gender) const;
    void set_covariate_names(std::vector<std::string> male, std::vector<std::string> female);

    /// Couples in the given order (a permutation or subset of indices).
    OrdinalPanel select(std::span<const std::size_t> couples) const;
    /// Copy with every covariate negated, i.e. mu replaced by -mu.
    OrdinalPanel with_negated_covariates() const;

private:
    int categories_[2];
    int covariate_dim_;
    std::vector<std::string> ids_;
    std::vector<int> first_wave_;
    std::vector<std::size_t> offsets_{0};
    std::vector<int> responses_[2];
    std::vector<double> covariates_[2];
    std::vector<std::string> names_[2];
};

}  // namespace copmarkov
