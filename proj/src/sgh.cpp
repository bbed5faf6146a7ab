#include "olprec/sgh.hpp"

#include <algorithm>
#include <limits>

#include "olprec/errors.hpp"

namespace olprec {

namespace {

std::vector<double> class_centroid(const Matrix& X, const std::vector<int>& y,
                                   const std::vector<std::size_t>& subset, int cls) {
    std::vector<double> c(X.cols(), 0.0);
    std::size_t count = 0;
    for (auto i : subset) {
        if (y[i] != cls) continue;
        ++count;
        for (std::size_t f = 0; f < X.cols(); ++f) c[f] += X(i, f);
    }
    for (auto& v : c) v /= static_cast<double>(count);
    return c;
}

Hyperplane bisector(std::span<const double> pos, std::span<const double> neg, int positive_class) {
    Hyperplane h;
    h.positive_class = positive_class;
    h.w.resize(pos.size());
    h.b = 0.0;
    for (std::size_t f = 0; f < pos.size(); ++f) {
        h.w[f] = pos[f] - neg[f];
        h.b -= h.w[f] * 0.5 * (pos[f] + neg[f]);
    }
    return h;
}

} // namespace

Subpool generate_subpool(const Matrix& X, const std::vector<int>& y) {
    const std::size_t n = X.rows();
    bool has[2] = {false, false};
    for (int c : y) has[c] = true;
    if (!has[0] || !has[1])
        throw SingleClassRegion("SGH requires both classes");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (y[i] != y[j] && std::equal(X.row(i).begin(), X.row(i).end(), X.row(j).begin()))
                throw ContradictoryData("identical points with different labels");

    std::vector<std::size_t> remaining(n);
    for (std::size_t i = 0; i < n; ++i) remaining[i] = i;

    Subpool pool;
    while (!remaining.empty()) {
        bool present[2] = {false, false};
        for (auto i : remaining) present[y[i]] = true;

        Hyperplane h;
        bool usable = false;
        if (present[0] && present[1]) {
            auto c1 = class_centroid(X, y, remaining, 1);
            auto c0 = class_centroid(X, y, remaining, 0);
            h = bisector(c1, c0, 1);
            usable = dot(h.w, h.w) > 0.0;
        }

        std::vector<std::size_t> kept;
        if (usable) {
            for (auto i : remaining)
                if (h.predict(X.row(i)) != y[i]) kept.push_back(i);
        } else {
            kept = remaining;
        }

        if (kept.size() == remaining.size()) {
            // Stalled: bisect the sample nearest its own class centroid against
            // its nearest enemy over the full input; removes that sample at least.
            std::size_t chosen = remaining.front();
            double best = std::numeric_limits<double>::infinity();
            for (auto i : remaining) {
                auto c = class_centroid(X, y, remaining, y[i]);
                double d = squared_distance(X.row(i), c);
                if (d < best) {
                    best = d;
                    chosen = i;
                }
            }
            std::size_t enemy = n;
            double best_e = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j) {
                if (y[j] == y[chosen]) continue;
                double d = squared_distance(X.row(chosen), X.row(j));
                if (d < best_e) {
                    best_e = d;
                    enemy = j;
                }
            }
            h = bisector(X.row(chosen), X.row(enemy), y[chosen]);
            kept.clear();
            for (auto i : remaining)
                if (h.predict(X.row(i)) != y[i]) kept.push_back(i);
        }

        pool.classifiers.push_back(std::move(h));
        remaining = std::move(kept);
    }
    return pool;
}

} // namespace olprec
