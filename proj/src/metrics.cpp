#include "olprec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "olprec/errors.hpp"

namespace olprec {

ConfusionCounts confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw ShapeError("confusion: prediction count differs from truth count");
    ConfusionCounts c;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == 1)
            (y_pred[i] == 1 ? c.Tp : c.Fn)++;
        else
            (y_pred[i] == 1 ? c.Fp : c.Tn)++;
    }
    return c;
}

double accuracy(const ConfusionCounts& c) {
    return c.n() ? static_cast<double>(c.Tp + c.Tn) / static_cast<double>(c.n()) : 0.0;
}

MetricValue fmeasure(const ConfusionCounts& c) {
    if (c.positives() == 0 || c.negatives() == 0) return {0.0, true};
    double denom = static_cast<double>(2 * c.Tp + c.Fp + c.Fn);
    return {denom > 0.0 ? 2.0 * static_cast<double>(c.Tp) / denom : 0.0, false};
}

MetricValue gmean(const ConfusionCounts& c) {
    if (c.positives() == 0 || c.negatives() == 0) return {0.0, true};
    double tpr = static_cast<double>(c.Tp) / static_cast<double>(c.positives());
    double tnr = static_cast<double>(c.Tn) / static_cast<double>(c.negatives());
    return {std::sqrt(tpr * tnr), false};
}

MetricValue auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
    if (y_true.size() != scores.size())
        throw ShapeError("auc: score count differs from truth count");
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < y_true.size(); ++i)
        (y_true[i] == 1 ? pos : neg).push_back(scores[i]);
    if (pos.empty() || neg.empty()) return {0.5, true};
    double wins = 0.0;
    for (double p : pos)
        for (double q : neg) {
            if (p > q)
                wins += 1.0;
            else if (p == q)
                wins += 0.5;
        }
    return {wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size())), false};
}

double multilabel_precision(const std::vector<std::vector<int>>& u_true,
                            const std::vector<std::vector<int>>& u_pred) {
    if (u_true.size() != u_pred.size())
        throw ShapeError("multilabel_precision: set sizes differ");
    if (u_true.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < u_true.size(); ++i) {
        int predicted = 0, correct = 0;
        for (std::size_t j = 0; j < u_pred[i].size(); ++j) {
            if (!u_pred[i][j]) continue;
            ++predicted;
            correct += (u_true[i][j] != 0);
        }
        if (predicted > 0) total += static_cast<double>(correct) / predicted;
    }
    return total / static_cast<double>(u_true.size());
}

TestVerdict wilcoxon(const std::vector<double>& a, const std::vector<double>& b, double alpha) {
    if (a.size() != b.size())
        throw ShapeError("wilcoxon: paired vectors differ in length");
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        if (diff != 0.0) d.push_back(diff);
    }
    TestVerdict out;
    if (d.empty()) {
        out.p_value = 1.0;
        out.significant = false;
        out.direction = 0;
        return out;
    }

    const std::size_t n = d.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return std::abs(d[x]) < std::abs(d[y]); });

    // Average tied |d| ranks.
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }

    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t k = 0; k < n; ++k) (d[k] > 0.0 ? w_plus : w_minus) += rank[k];
    out.statistic = w_plus;

    if (n <= 12) {
        // Exact: enumerate all sign assignments over the averaged ranks.
        const std::uint64_t patterns = 1ULL << n;
        std::uint64_t le = 0, ge = 0;
        for (std::uint64_t mask = 0; mask < patterns; ++mask) {
            double w = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                if (mask & (1ULL << k)) w += rank[k];
            le += (w <= w_plus);
            ge += (w >= w_plus);
        }
        double tail = static_cast<double>(std::min(le, ge)) / static_cast<double>(patterns);
        out.p_value = std::min(1.0, 2.0 * tail);
    } else {
        double mu = static_cast<double>(n) * (n + 1) / 4.0;
        double var = static_cast<double>(n) * (n + 1) * (2.0 * n + 1.0) / 24.0;
        // Tie correction: subtract sum(t^3 - t)/48 over tie groups.
        std::vector<double> sorted_abs(n);
        for (std::size_t k = 0; k < n; ++k) sorted_abs[k] = std::abs(d[order[k]]);
        i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && sorted_abs[j + 1] == sorted_abs[i]) ++j;
            double t = static_cast<double>(j - i + 1);
            var -= (t * t * t - t) / 48.0;
            i = j + 1;
        }
        if (var <= 0.0) {
            out.p_value = 1.0;
        } else {
            double z = (w_plus - mu) / std::sqrt(var);
            out.p_value = std::erfc(std::abs(z) / std::sqrt(2.0));
        }
    }

    out.significant = out.p_value < alpha;
    out.direction = w_plus > w_minus ? 1 : (w_plus < w_minus ? -1 : 0);
    return out;
}

} // namespace olprec
