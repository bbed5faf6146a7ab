#include "olprec/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "olprec/errors.hpp"
#include "olprec/learners.hpp"
#include "olprec/neighbors.hpp"
#include "olprec/util.hpp"

namespace olprec {

namespace {

constexpr std::uint64_t kL3Stream = 0x4c33;
constexpr std::uint64_t kN4Stream = 0x4e34;
constexpr double kDenThreshold = 0.15;

bool single_class(const std::vector<int>& y) {
    return std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); });
}

Matrix pairwise_distances(const Matrix& X) {
    Matrix D(X.rows(), X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = i + 1; j < X.rows(); ++j) {
            double d = euclidean(X.row(i), X.row(j));
            D(i, j) = d;
            D(j, i) = d;
        }
    return D;
}

/// Interpolated same-class prototypes: pick a point, pick a same-class partner
/// (with replacement), blend with a uniform coefficient. Labels follow the pair.
std::pair<Matrix, std::vector<int>> make_prototypes(const Neighborhood& nb, std::size_t count,
                                                    std::mt19937_64& rng) {
    std::vector<std::vector<std::size_t>> members(2);
    for (std::size_t i = 0; i < nb.size(); ++i)
        members[static_cast<std::size_t>(nb.y[i])].push_back(i);

    Matrix protos(count, nb.X.cols());
    std::vector<int> labels(count);
    std::uniform_int_distribution<std::size_t> pick_any(0, nb.size() - 1);
    std::uniform_real_distribution<double> coeff(0.0, 1.0);
    for (std::size_t p = 0; p < count; ++p) {
        std::size_t i = pick_any(rng);
        const auto& same = members[static_cast<std::size_t>(nb.y[i])];
        std::size_t j = same[std::uniform_int_distribution<std::size_t>(0, same.size() - 1)(rng)];
        double a = coeff(rng);
        for (std::size_t f = 0; f < nb.X.cols(); ++f)
            protos(p, f) = nb.X(i, f) + a * (nb.X(j, f) - nb.X(i, f));
        labels[p] = nb.y[i];
    }
    return {std::move(protos), std::move(labels)};
}

struct DisjointSet {
    std::vector<std::size_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

/// Per-feature class-overlap interval over the samples in `subset`; returns the
/// fraction of subset samples falling inside it (0 when a class is absent or
/// the interval is empty).
double overlap_ratio(const Matrix& X, const std::vector<int>& y,
                     const std::vector<std::size_t>& subset, std::size_t f, double& lo,
                     double& hi) {
    double mins[2], maxs[2];
    bool seen[2] = {false, false};
    for (auto i : subset) {
        auto c = static_cast<std::size_t>(y[i]);
        double v = X(i, f);
        if (!seen[c]) {
            mins[c] = maxs[c] = v;
            seen[c] = true;
        } else {
            mins[c] = std::min(mins[c], v);
            maxs[c] = std::max(maxs[c], v);
        }
    }
    lo = 1.0;
    hi = 0.0;
    if (!seen[0] || !seen[1]) return 0.0;
    lo = std::max(mins[0], mins[1]);
    hi = std::min(maxs[0], maxs[1]);
    if (lo > hi) return 0.0;
    std::size_t inside = 0;
    for (auto i : subset) inside += (X(i, f) >= lo && X(i, f) <= hi);
    return static_cast<double>(inside) / static_cast<double>(subset.size());
}

} // namespace

Neighborhood canonical_neighborhood(const Neighborhood& nb) {
    std::vector<std::size_t> order(nb.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto ra = nb.X.row(a), rb = nb.X.row(b);
        for (std::size_t f = 0; f < ra.size(); ++f)
            if (ra[f] != rb[f]) return ra[f] < rb[f];
        return nb.y[a] < nb.y[b];
    });
    Neighborhood out;
    out.X = Matrix(nb.size(), nb.X.cols());
    out.y.resize(nb.size());
    out.source_indices.resize(nb.size());
    for (std::size_t i = 0; i < nb.size(); ++i) {
        auto src = nb.X.row(order[i]);
        std::copy(src.begin(), src.end(), out.X.row(i).begin());
        out.y[i] = nb.y[order[i]];
        out.source_indices[i] = order[i] < nb.source_indices.size() ? nb.source_indices[order[i]] : order[i];
    }
    return out;
}

std::pair<double, double> feature_measures(const Neighborhood& raw) {
    if (single_class(raw.y)) return {0.0, 0.0};
    Neighborhood nb = canonical_neighborhood(raw);
    const std::size_t n = nb.size(), d = nb.X.cols();

    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});

    double f3 = 1.0;
    for (std::size_t f = 0; f < d; ++f) {
        double lo, hi;
        f3 = std::min(f3, overlap_ratio(nb.X, nb.y, all, f, lo, hi));
    }

    // F4: greedily spend the most discriminative feature, keep only the samples
    // it leaves ambiguous, repeat.
    std::vector<std::size_t> remaining = all;
    std::vector<char> used(d, 0);
    std::size_t features_left = d;
    while (!remaining.empty() && features_left > 0) {
        double best_ratio = std::numeric_limits<double>::infinity();
        std::size_t best_f = 0;
        double best_lo = 0.0, best_hi = 0.0;
        for (std::size_t f = 0; f < d; ++f) {
            if (used[f]) continue;
            double lo, hi;
            double r = overlap_ratio(nb.X, nb.y, remaining, f, lo, hi);
            if (r < best_ratio) {
                best_ratio = r;
                best_f = f;
                best_lo = lo;
                best_hi = hi;
            }
        }
        used[best_f] = 1;
        --features_left;
        std::vector<std::size_t> kept;
        for (auto i : remaining) {
            double v = nb.X(i, best_f);
            if (best_lo <= best_hi && v >= best_lo && v <= best_hi) kept.push_back(i);
        }
        remaining = std::move(kept);
    }
    double f4 = static_cast<double>(remaining.size()) / static_cast<double>(n);
    return {f3, f4};
}

std::pair<double, double> linearity_measures(const Neighborhood& raw, std::uint64_t seed) {
    if (single_class(raw.y)) return {0.0, 0.0};
    Neighborhood nb = canonical_neighborhood(raw);
    const std::size_t n = nb.size();

    auto clf = fit(ModelSpec{ModelKind::LinearSvm, {}, 0}, nb.X, nb.y);
    std::size_t train_err = 0;
    for (std::size_t i = 0; i < n; ++i) train_err += (clf.predict(nb.X.row(i)) != nb.y[i]);
    double l2 = static_cast<double>(train_err) / static_cast<double>(n);

    std::mt19937_64 rng(mix64(seed, kL3Stream));
    auto [protos, labels] = make_prototypes(nb, n, rng);
    std::size_t proto_err = 0;
    for (std::size_t p = 0; p < n; ++p) proto_err += (clf.predict(protos.row(p)) != labels[p]);
    double l3 = static_cast<double>(proto_err) / static_cast<double>(n);
    return {l2, l3};
}

NeighborMeasures neighbor_measures(const Neighborhood& raw, std::uint64_t seed) {
    if (single_class(raw.y)) return {0.0, 0.0, 0.0, 0.0, 1.0};
    Neighborhood nb = canonical_neighborhood(raw);
    const std::size_t n = nb.size();
    Matrix D = pairwise_distances(nb.X);
    NeighborMeasures out;

    // N1 via Kruskal; ties resolved by the edge enumeration order so the MST is
    // unique and any other algorithm under the same total order must agree.
    struct Edge {
        double w;
        std::size_t idx, a, b;
    };
    std::vector<Edge> edges;
    edges.reserve(n * (n - 1) / 2);
    std::size_t eidx = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.push_back({D(i, j), eidx++, i, j});
    std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
        return x.w != y.w ? x.w < y.w : x.idx < y.idx;
    });
    DisjointSet dsu(n);
    std::vector<char> borderline(n, 0);
    std::size_t joined = 0;
    for (const auto& e : edges) {
        if (joined + 1 == n) break;
        if (!dsu.unite(e.a, e.b)) continue;
        ++joined;
        if (nb.y[e.a] != nb.y[e.b]) borderline[e.a] = borderline[e.b] = 1;
    }
    out.n1 = static_cast<double>(std::count(borderline.begin(), borderline.end(), 1)) /
             static_cast<double>(n);

    // N2, N3, LSC from nearest same/other-class distances.
    double intra_sum = 0.0, extra_sum = 0.0;
    std::size_t loo_err = 0;
    double ls_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best_same = std::numeric_limits<double>::infinity();
        double best_other = std::numeric_limits<double>::infinity();
        std::size_t nearest = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            if (nb.y[j] == nb.y[i])
                best_same = std::min(best_same, D(i, j));
            else
                best_other = std::min(best_other, D(i, j));
            if (nearest == n || D(i, j) < D(i, nearest)) nearest = j;
        }
        if (std::isfinite(best_same)) intra_sum += best_same;
        extra_sum += best_other;
        loo_err += (nb.y[nearest] != nb.y[i]);
        std::size_t ls = 0;
        for (std::size_t j = 0; j < n; ++j)
            ls += (nb.y[j] == nb.y[i] && D(i, j) < best_other);
        ls_total += static_cast<double>(ls);
    }
    double r = intra_sum / std::max(extra_sum, 1e-12);
    out.n2 = r / (1.0 + r);
    out.n3 = static_cast<double>(loo_err) / static_cast<double>(n);
    out.lsc = ls_total / (static_cast<double>(n) * static_cast<double>(n));

    // N4: 1-NN over interpolation prototypes, independent draw stream.
    std::mt19937_64 rng(mix64(seed, kN4Stream));
    auto [protos, labels] = make_prototypes(nb, n, rng);
    std::size_t err = 0;
    for (std::size_t p = 0; p < n; ++p) {
        auto ns = knn(protos.row(p), nb.X, 1);
        err += (nb.y[ns.indices[0]] != labels[p]);
    }
    out.n4 = static_cast<double>(err) / static_cast<double>(n);
    return out;
}

BalanceMeasures balance_network_measures(const Neighborhood& raw) {
    Neighborhood nb = canonical_neighborhood(raw);
    const std::size_t n = nb.size();
    BalanceMeasures out;

    Matrix D = pairwise_distances(nb.X);
    double maxd = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) maxd = std::max(maxd, D(i, j));
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (nb.y[i] != nb.y[j]) continue;
            double nd = maxd > 0.0 ? D(i, j) / maxd : 0.0;
            kept += (nd < kDenThreshold);
        }
    out.den = n > 1 ? 2.0 * static_cast<double>(kept) /
                          (static_cast<double>(n) * static_cast<double>(n - 1))
                    : 0.0;

    std::size_t n1 = static_cast<std::size_t>(std::count(nb.y.begin(), nb.y.end(), 1));
    std::size_t n0 = n - n1;
    if (n0 == 0 || n1 == 0) {
        out.c1 = 0.0;
        out.c2 = static_cast<double>(n);
        return out;
    }
    double p0 = static_cast<double>(n0) / static_cast<double>(n);
    double p1 = static_cast<double>(n1) / static_cast<double>(n);
    out.c1 = -(p0 * std::log(p0) + p1 * std::log(p1)) / std::log(2.0);
    out.c2 = static_cast<double>(std::max(n0, n1)) / static_cast<double>(std::min(n0, n1));
    return out;
}

MetaFeatureVector extract_meta_features(std::span<const double> x, const Dataset& scaled_train,
                                        std::size_t k_prime, std::uint64_t seed) {
    std::size_t k = std::min(k_prime, scaled_train.n_samples());
    auto ns = knn(x, scaled_train.features, k);

    Neighborhood nb;
    nb.X = scaled_train.features.gather(ns.indices);
    nb.source_indices = ns.indices;
    nb.y.reserve(k);
    for (auto i : ns.indices) nb.y.push_back(scaled_train.labels[i]);

    MetaFeatureVector mf;
    auto [f3, f4] = feature_measures(nb);
    auto balance = balance_network_measures(nb);
    mf[kF3] = f3;
    mf[kF4] = f4;
    mf[kDen] = balance.den;
    mf[kC1] = balance.c1;
    mf[kC2] = balance.c2;
    if (single_class(nb.y)) {
        mf[kLsc] = 1.0;
        return mf;
    }
    auto [l2, l3] = linearity_measures(nb, seed);
    auto nm = neighbor_measures(nb, seed);
    mf[kL2] = l2;
    mf[kL3] = l3;
    mf[kN1] = nm.n1;
    mf[kN2] = nm.n2;
    mf[kN3] = nm.n3;
    mf[kN4] = nm.n4;
    mf[kLsc] = nm.lsc;
    return mf;
}

} // namespace olprec
