#include "olprec/neighbors.hpp"

#include <algorithm>
#include <cmath>

#include "olprec/errors.hpp"

namespace olprec {

namespace {

struct Cand {
    double d2;
    std::size_t idx;
    bool operator<(const Cand& o) const {
        return d2 != o.d2 ? d2 < o.d2 : idx < o.idx;
    }
};

std::vector<Cand> all_candidates(std::span<const double> query, const Matrix& refset) {
    std::vector<Cand> c;
    c.reserve(refset.rows());
    for (std::size_t i = 0; i < refset.rows(); ++i)
        c.push_back({squared_distance(query, refset.row(i)), i});
    return c;
}

NeighborSet take(std::vector<Cand> cands, std::size_t k) {
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(k), cands.end());
    NeighborSet ns;
    ns.indices.reserve(k);
    ns.distances.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        ns.indices.push_back(cands[i].idx);
        ns.distances.push_back(std::sqrt(cands[i].d2));
    }
    return ns;
}

} // namespace

NeighborSet knn(std::span<const double> query, const Matrix& refset, std::size_t k) {
    if (k > refset.rows())
        throw InsufficientNeighbors("k=" + std::to_string(k) + " exceeds reference size " +
                                    std::to_string(refset.rows()));
    return take(all_candidates(query, refset), k);
}

NeighborSet knne(std::span<const double> query, const Matrix& refset,
                 const std::vector<int>& ref_labels, std::size_t k) {
    std::size_t per_class = (k + 1) / 2;
    std::vector<Cand> by_class[2];
    for (std::size_t i = 0; i < refset.rows(); ++i)
        by_class[ref_labels[i] == 1].push_back({squared_distance(query, refset.row(i)), i});
    if (by_class[0].empty() || by_class[1].empty())
        throw SingleClassRegion("K-NNE requires both classes in the reference set");

    std::vector<Cand> picked;
    for (auto& cands : by_class) {
        std::size_t take_n = std::min(per_class, cands.size());
        std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(take_n),
                          cands.end());
        picked.insert(picked.end(), cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(take_n));
    }
    std::sort(picked.begin(), picked.end());

    NeighborSet ns;
    for (auto& c : picked) {
        ns.indices.push_back(c.idx);
        ns.distances.push_back(std::sqrt(c.d2));
    }
    return ns;
}

KdnTable kdn(const Matrix& features, const std::vector<int>& labels, int k_h) {
    std::size_t n = features.rows();
    if (static_cast<std::size_t>(k_h) >= n)
        throw InsufficientNeighbors("k_h=" + std::to_string(k_h) +
                                    " must be below the sample count " + std::to_string(n));
    KdnTable table;
    table.k_h = k_h;
    table.scores.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto cands = all_candidates(features.row(i), features);
        cands.erase(cands.begin() + static_cast<std::ptrdiff_t>(i));
        std::partial_sort(cands.begin(), cands.begin() + k_h, cands.end());
        int disagree = 0;
        for (int t = 0; t < k_h; ++t)
            disagree += (labels[cands[static_cast<std::size_t>(t)].idx] != labels[i]);
        table.scores[i] = static_cast<double>(disagree) / k_h;
    }
    return table;
}

KdnTable kdn(const Dataset& ds, int k_h) {
    return kdn(ds.features, ds.labels, k_h);
}

} // namespace olprec
