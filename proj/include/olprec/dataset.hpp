#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "olprec/matrix.hpp"

namespace olprec {

/// A parsed two-class problem. Labels are 0/1 with 1 the minority (positive) class.
struct Dataset {
    std::string name;
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;

    std::size_t n_samples() const { return labels.size(); }
    std::size_t n_features() const { return features.cols(); }

    std::size_t count(int cls) const {
        std::size_t n = 0;
        for (int y : labels) n += (y == cls);
        return n;
    }

    /// Majority-to-minority ratio (IR).
    double imbalance_ratio() const {
        auto n1 = count(1);
        return n1 ? static_cast<double>(count(0)) / static_cast<double>(n1) : 0.0;
    }
};

struct FoldSplit {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    int fold_id = 0;
};

/// Per-feature min-max scaler fitted on training data; constant features map to 0,
/// out-of-range values clip to [0,1].
struct Scaler {
    std::vector<double> min;
    std::vector<double> max;
};

/// Parse KEEL .dat text. Keywords are case-insensitive, '%' starts a comment,
/// the last output attribute (default: last attribute) is the class.
Dataset parse_keel(const std::string& text, const std::string& name_hint = "");

/// Serialize back to KEEL text; re-parsing yields the identical matrix and labels.
std::string emit_keel(const Dataset& ds);

/// Deterministic stratified k-fold split; per-class test counts differ by at most 1
/// across folds.
std::vector<FoldSplit> stratified_kfold(const Dataset& ds, int k, std::uint64_t seed);

Scaler scaler_fit(const Matrix& train);
Matrix scaler_apply(const Scaler& s, const Matrix& x);
std::vector<double> scaler_apply_row(const Scaler& s, std::span<const double> row);

} // namespace olprec
