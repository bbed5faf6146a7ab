#pragma once

#include <vector>

namespace olprec {

/// Binary confusion counts; class 1 is the positive (minority) class.
struct ConfusionCounts {
    long Tp = 0, Fp = 0, Tn = 0, Fn = 0;

    long n() const { return Tp + Fp + Tn + Fn; }
    long positives() const { return Tp + Fn; }
    long negatives() const { return Tn + Fp; }
};

/// Metric value with a flag for degenerate inputs (an empty class, or a
/// single-class truth vector for AUC).
struct MetricValue {
    double value = 0.0;
    bool degenerate = false;
};

ConfusionCounts confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred);

double accuracy(const ConfusionCounts& c);
MetricValue fmeasure(const ConfusionCounts& c);
MetricValue gmean(const ConfusionCounts& c);

/// Mann-Whitney AUC with tie handling: (#{pos>neg} + 0.5*#{pos=neg}) / (N+*N-).
MetricValue auc(const std::vector<int>& y_true, const std::vector<double>& scores);

/// Example-based multi-label precision: mean over samples of |U∩Û|/|Û|;
/// samples with an empty prediction contribute 0.
double multilabel_precision(const std::vector<std::vector<int>>& u_true,
                            const std::vector<std::vector<int>>& u_pred);

struct TestVerdict {
    double statistic = 0.0; // W+ (sum of ranks of positive differences)
    double p_value = 1.0;
    bool significant = false;
    int direction = 0; // +1 when a tends above b, -1 below, 0 none
};

/// Paired two-sided Wilcoxon signed-rank test on a-b. Zero differences are
/// dropped and tied |d| ranks averaged; exact sign-pattern enumeration for up
/// to 12 non-zero pairs, tie-corrected normal approximation above.
TestVerdict wilcoxon(const std::vector<double>& a, const std::vector<double>& b, double alpha);

} // namespace olprec
