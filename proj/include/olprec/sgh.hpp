#pragma once

#include <array>
#include <vector>

#include "olprec/matrix.hpp"

namespace olprec {

/// Two-class linear separator: classifies x as positive_class iff w.x + b > 0
/// (boundary points go to the other class).
struct Hyperplane {
    std::vector<double> w;
    double b = 0.0;
    int positive_class = 1;

    double margin(std::span<const double> x) const { return dot(w, x) + b; }

    int predict(std::span<const double> x) const {
        return margin(x) > 0.0 ? positive_class : 1 - positive_class;
    }

    /// Logistic of the signed margin normalized by ||w||, oriented to class 1.
    std::array<double, 2> predict_proba(std::span<const double> x) const {
        double m = margin(x) / (norm(w) + 1e-12);
        if (positive_class == 0) m = -m;
        double p1 = logistic(m);
        return {1.0 - p1, p1};
    }

    /// Distance-like confidence used for DCS tie-breaking.
    double abs_margin(std::span<const double> x) const {
        return std::abs(margin(x)) / (norm(w) + 1e-12);
    }
};

/// Subpool with the Oracle property: every input sample is correctly classified
/// by at least one member.
struct Subpool {
    std::vector<Hyperplane> classifiers;
};

/// Self-Generating Hyperplanes. Iteratively bisects the remaining class
/// centroids and drops the samples the new hyperplane gets right; stalls are
/// broken by bisecting a remaining sample against its nearest enemy, which
/// always removes at least that sample. Deterministic, at most n members.
Subpool generate_subpool(const Matrix& X, const std::vector<int>& y);

} // namespace olprec
