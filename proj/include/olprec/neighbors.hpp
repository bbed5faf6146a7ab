#pragma once

#include <cstddef>
#include <vector>

#include "olprec/dataset.hpp"
#include "olprec/matrix.hpp"

namespace olprec {

/// Neighbor indices into a reference set, distances non-decreasing.
/// Ties resolve to the lower index.
struct NeighborSet {
    std::vector<std::size_t> indices;
    std::vector<double> distances;

    std::size_t size() const { return indices.size(); }
};

/// Per-sample K-Disagreeing-Neighbors scores; each score is a multiple of 1/k_h.
struct KdnTable {
    std::vector<double> scores;
    int k_h = 0;
};

/// k nearest rows of refset by Euclidean distance.
NeighborSet knn(std::span<const double> query, const Matrix& refset, std::size_t k);

/// K-NN Equality: the ceil(k/2) nearest neighbors of each class. A class with
/// fewer members contributes all of them; the deficit is not back-filled.
NeighborSet knne(std::span<const double> query, const Matrix& refset,
                 const std::vector<int>& ref_labels, std::size_t k);

/// KDN instance hardness: fraction of each sample's k_h nearest neighbors
/// (sample itself excluded) carrying a different label.
KdnTable kdn(const Matrix& features, const std::vector<int>& labels, int k_h);
KdnTable kdn(const Dataset& ds, int k_h);

} // namespace olprec
