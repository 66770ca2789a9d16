#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "creepuq/tensor.hpp"

namespace creepuq {

/// Feature matrix + target vector with the preprocessing state carried along.
/// Target is creep rupture life in hours, or log10 hours once transformed.
struct Dataset {
    std::vector<std::string> feature_names;
    Tensor features;  // (n, d)
    std::vector<double> target;
    std::string target_name;
    bool target_transformed = false;
    std::optional<std::vector<std::pair<double, double>>> normalization_bounds;
    std::size_t dropped_rows = 0;
    nlohmann::json metadata = nlohmann::json::object();

    std::size_t size() const { return target.size(); }
    std::size_t feature_count() const { return feature_names.size(); }
    int feature_index(const std::string& name) const;  // -1 if absent

    /// Subset by row indices; preprocessing state is carried over.
    Dataset rows(const std::vector<std::size_t>& idx) const;
};

struct FoldSplit {
    std::size_t fold_count = 0;
    std::vector<std::size_t> assignments;  // per-sample fold in [0, fold_count)
    std::uint64_t seed = 0;

    std::vector<std::size_t> train_indices(std::size_t fold) const;
    std::vector<std::size_t> test_indices(std::size_t fold) const;
};

/// UTF-8 comma-separated, one header row, '.' decimals. Rows with any empty
/// cell are dropped and counted; a non-numeric cell is an error.
Dataset load_csv(const std::string& path, const std::string& target_column);

void write_csv(const Dataset& ds, const std::string& path);

/// target[i] <- log10(target[i]); refuses non-positive values and double
/// application.
Dataset apply_log10_target(const Dataset& ds);

/// Per-column (min, max) over the given dataset. Needs >= 2 rows.
std::vector<std::pair<double, double>> fit_normalization(const Dataset& ds);

/// (x-min)/(max-min) per column with the supplied (training-set) bounds.
/// Constant columns (max == min) map to 0. Values outside the bounds are
/// NOT clipped.
Dataset apply_normalization(const Dataset& ds,
                            const std::vector<std::pair<double, double>>& bounds);

/// Inverse of apply_normalization with the stored bounds; constant columns
/// recover the bound value.
Dataset invert_normalization(const Dataset& ds);

FoldSplit kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

struct SyntheticSpec {
    std::size_t n = 500;
    double noise_sd = 0.1;
    std::uint64_t seed = 0;
    // Larson-Miller ground truth: log10 tf = f(sigma)/T - c_lm + eps,
    // f(sigma) = c0 + c1*x + c2*x^2 + c3*x^3 with x = log10(sigma).
    double c_lm = 20.0;
    std::array<double, 4> stress_poly{27000.0, -1500.0, -400.0, 60.0};
};

/// Synthetic creep dataset: T ~ U[873,1073] K, stress ~ U[40,300] MPa, four
/// inert composition columns, target = raw rupture life in hours. Generator
/// constants are recorded in metadata.
Dataset generate_synthetic_creep(const SyntheticSpec& spec);

}  // namespace creepuq
