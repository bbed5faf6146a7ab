#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "olprec/dataset.hpp"
#include "olprec/matrix.hpp"

namespace olprec {

/// A query sample's k'-neighborhood in scaled space.
struct Neighborhood {
    Matrix X;
    std::vector<int> y;
    std::vector<std::size_t> source_indices;

    std::size_t size() const { return y.size(); }
};

/// Meta-feature positions, in the fixed vector order.
enum MetaFeature : std::size_t {
    kF3 = 0,
    kF4,
    kL2,
    kL3,
    kN1,
    kN2,
    kN3,
    kN4,
    kLsc,
    kDen,
    kC1,
    kC2,
};

struct MetaFeatureVector {
    static constexpr std::size_t kSize = 12;
    static constexpr std::array<const char*, kSize> kNames = {
        "F3", "F4", "L2", "L3", "N1", "N2", "N3", "N4", "LSC", "Den", "C1", "C2"};

    std::array<double, kSize> v{};

    double operator[](std::size_t i) const { return v[i]; }
    double& operator[](std::size_t i) { return v[i]; }
};

/// F3 (max individual feature efficiency) and F4 (collective feature efficiency).
/// Single-class neighborhoods yield (0, 0).
std::pair<double, double> feature_measures(const Neighborhood& nb);

/// L2 (linear-classifier error) and L3 (linear-classifier error on interpolated
/// prototypes). Single-class neighborhoods yield (0, 0).
std::pair<double, double> linearity_measures(const Neighborhood& nb, std::uint64_t seed);

struct NeighborMeasures {
    double n1 = 0.0, n2 = 0.0, n3 = 0.0, n4 = 0.0, lsc = 1.0;
};

/// N1 (MST borderline fraction), N2 (intra/extra distance ratio), N3 (LOO 1-NN
/// error), N4 (1-NN error on interpolated prototypes), LSC (local-set average
/// cardinality, normalized by n^2). Single-class neighborhoods yield (0,0,0,0,1).
NeighborMeasures neighbor_measures(const Neighborhood& nb, std::uint64_t seed);

struct BalanceMeasures {
    double den = 0.0, c1 = 0.0, c2 = 1.0;
};

/// Den (same-class short-edge density), C1 (class-proportion entropy),
/// C2 (imbalance ratio, capped at n when a class is missing).
BalanceMeasures balance_network_measures(const Neighborhood& nb);

/// k'-neighborhood of x over the scaled training set (k' clamped to the training
/// size), measures assembled in the fixed [F3..C2] order. Deterministic per seed
/// and invariant to training-row permutations of equal points.
MetaFeatureVector extract_meta_features(std::span<const double> x, const Dataset& scaled_train,
                                        std::size_t k_prime, std::uint64_t seed);

/// Neighborhood rows reordered canonically (lexicographic by features, then
/// label). All measures use this internally so results do not depend on row
/// order; exposed for tests.
Neighborhood canonical_neighborhood(const Neighborhood& nb);

} // namespace olprec
