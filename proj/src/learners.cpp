#include "olprec/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "olprec/errors.hpp"
#include "olprec/neighbors.hpp"
#include "olprec/util.hpp"

namespace olprec {

const char* to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::Perceptron: return "perceptron";
    case ModelKind::DecisionStump: return "ds";
    case ModelKind::DecisionTree: return "dt";
    case ModelKind::LinearSvm: return "lsvm";
    case ModelKind::GaussianSvm: return "gsvm";
    case ModelKind::Knn: return "knn";
    }
    return "?";
}

std::optional<ModelKind> model_kind_from_string(const std::string& name) {
    std::string n = lower(name);
    if (n == "perceptron") return ModelKind::Perceptron;
    if (n == "ds" || n == "stump" || n == "decision_stump") return ModelKind::DecisionStump;
    if (n == "dt" || n == "tree" || n == "decision_tree") return ModelKind::DecisionTree;
    if (n == "lsvm" || n == "linear_svm") return ModelKind::LinearSvm;
    if (n == "gsvm" || n == "gaussian_svm") return ModelKind::GaussianSvm;
    if (n == "knn") return ModelKind::Knn;
    return std::nullopt;
}

std::vector<ModelSpec> default_portfolio() {
    std::vector<ModelSpec> out;
    for (auto kind : kPortfolio) out.push_back(ModelSpec{kind, {}, 0});
    return out;
}

std::vector<double> balanced_class_weights(const std::vector<int>& y) {
    double n = static_cast<double>(y.size());
    double n1 = static_cast<double>(std::count(y.begin(), y.end(), 1));
    double n0 = n - n1;
    std::vector<double> w(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        w[i] = y[i] == 1 ? n / (2.0 * n1) : n / (2.0 * n0);
    return w;
}

namespace {

constexpr double kEps = 1e-12;

std::array<double, 2> normalized(double w0, double w1) {
    double s = w0 + w1;
    if (s <= 0.0) return {0.5, 0.5};
    return {w0 / s, w1 / s};
}

double gini(double w0, double w1) {
    double s = w0 + w1;
    if (s <= 0.0) return 0.0;
    double p0 = w0 / s, p1 = w1 / s;
    return 1.0 - p0 * p0 - p1 * p1;
}

// ---------------------------------------------------------------------------
// Perceptron
// ---------------------------------------------------------------------------

FittedClassifier::LinearState fit_perceptron(const ModelSpec& spec, const Matrix& X,
                                             const std::vector<int>& y,
                                             const std::vector<double>& sw) {
    const std::size_t n = X.rows(), d = X.cols();
    const double lr = spec.hp("learning_rate", 1.0);
    const int epochs = static_cast<int>(spec.hp("epochs", 100));

    FittedClassifier::LinearState st;
    st.w.assign(d, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(spec.seed);

    for (int ep = 0; ep < epochs; ++ep) {
        std::shuffle(order.begin(), order.end(), rng);
        int mistakes = 0;
        for (auto i : order) {
            double yi = y[i] == 1 ? 1.0 : -1.0;
            double m = yi * (dot(st.w, X.row(i)) + st.b);
            if (m <= 0.0) {
                double c = lr * sw[i] * yi;
                for (std::size_t j = 0; j < d; ++j) st.w[j] += c * X(i, j);
                st.b += c;
                ++mistakes;
            }
        }
        if (mistakes == 0) break;
    }
    return st;
}

// ---------------------------------------------------------------------------
// Decision stump: exhaustive midpoint search, weighted Gini
// ---------------------------------------------------------------------------

FittedClassifier::StumpState fit_stump(const Matrix& X, const std::vector<int>& y,
                                       const std::vector<double>& sw) {
    const std::size_t n = X.rows(), d = X.cols();
    double tot0 = 0.0, tot1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) (y[i] == 1 ? tot1 : tot0) += sw[i];

    FittedClassifier::StumpState st;
    st.root_proba = normalized(tot0, tot1);

    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(n);
    for (std::size_t f = 0; f < d; ++f) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return X(a, f) < X(b, f); });
        double l0 = 0.0, l1 = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            (y[idx[p]] == 1 ? l1 : l0) += sw[idx[p]];
            if (X(idx[p], f) == X(idx[p + 1], f)) continue;
            double r0 = tot0 - l0, r1 = tot1 - l1;
            double cost = (l0 + l1) * gini(l0, l1) + (r0 + r1) * gini(r0, r1);
            if (cost < best) {
                best = cost;
                st.has_split = true;
                st.feature = static_cast<int>(f);
                st.threshold = 0.5 * (X(idx[p], f) + X(idx[p + 1], f));
                st.left_proba = normalized(l0, l1);
                st.right_proba = normalized(r0, r1);
            }
        }
    }
    return st;
}

// ---------------------------------------------------------------------------
// CART decision tree, Gini criterion
// ---------------------------------------------------------------------------

struct TreeBuilder {
    const Matrix& X;
    const std::vector<int>& y;
    const std::vector<double>& sw;
    int max_depth;           // < 0 means unlimited
    double min_decrease;
    std::size_t min_leaf;
    double total_weight;
    std::vector<TreeNode> nodes;

    int build(std::vector<std::size_t>& idx, int depth) {
        double w0 = 0.0, w1 = 0.0;
        for (auto i : idx) (y[i] == 1 ? w1 : w0) += sw[i];
        double node_w = w0 + w1;
        double node_gini = gini(w0, w1);

        TreeNode node;
        node.proba = normalized(w0, w1);
        int my_id = static_cast<int>(nodes.size());
        nodes.push_back(node);

        bool can_split = node_gini > 0.0 && idx.size() >= 2 * min_leaf &&
                         (max_depth < 0 || depth < max_depth);
        if (!can_split) return my_id;

        // Best split: maximize the total-weight-normalized impurity decrease.
        double best_dec = 0.0;
        int best_f = -1;
        double best_thr = 0.0;
        std::vector<std::size_t> sorted(idx);
        for (std::size_t f = 0; f < X.cols(); ++f) {
            std::sort(sorted.begin(), sorted.end(),
                      [&](std::size_t a, std::size_t b) { return X(a, f) < X(b, f); });
            double l0 = 0.0, l1 = 0.0;
            for (std::size_t p = 0; p + 1 < sorted.size(); ++p) {
                (y[sorted[p]] == 1 ? l1 : l0) += sw[sorted[p]];
                if (X(sorted[p], f) == X(sorted[p + 1], f)) continue;
                std::size_t nl = p + 1, nr = sorted.size() - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                double r0 = w0 - l0, r1 = w1 - l1;
                double child = ((l0 + l1) * gini(l0, l1) + (r0 + r1) * gini(r0, r1)) / node_w;
                double dec = (node_w / total_weight) * (node_gini - child);
                if (dec > best_dec) {
                    best_dec = dec;
                    best_f = static_cast<int>(f);
                    best_thr = 0.5 * (X(sorted[p], f) + X(sorted[p + 1], f));
                }
            }
        }
        if (best_f < 0 || best_dec < min_decrease) return my_id;

        std::vector<std::size_t> left, right;
        for (auto i : idx)
            (X(i, static_cast<std::size_t>(best_f)) <= best_thr ? left : right).push_back(i);

        nodes[static_cast<std::size_t>(my_id)].feature = best_f;
        nodes[static_cast<std::size_t>(my_id)].threshold = best_thr;
        nodes[static_cast<std::size_t>(my_id)].decrease = best_dec;
        int l = build(left, depth + 1);
        int r = build(right, depth + 1);
        nodes[static_cast<std::size_t>(my_id)].left = l;
        nodes[static_cast<std::size_t>(my_id)].right = r;
        return my_id;
    }
};

FittedClassifier::TreeState fit_tree(const ModelSpec& spec, const Matrix& X,
                                     const std::vector<int>& y, std::vector<double> sw) {
    if (spec.hp("class_weighted", 0.0) != 0.0) {
        auto cw = balanced_class_weights(y);
        for (std::size_t i = 0; i < sw.size(); ++i) sw[i] *= cw[i];
    }
    TreeBuilder b{X,
                  y,
                  sw,
                  static_cast<int>(spec.hp("max_depth", -1.0)),
                  spec.hp("min_impurity_decrease", 0.0),
                  static_cast<std::size_t>(std::max(1.0, spec.hp("min_samples_leaf", 1.0))),
                  std::accumulate(sw.begin(), sw.end(), 0.0),
                  {}};
    std::vector<std::size_t> idx(X.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    b.build(idx, 0);
    return {std::move(b.nodes)};
}

// ---------------------------------------------------------------------------
// SVM: deterministic cyclic subgradient descent with eta_t = 1/(lambda*t),
// iterate averaging, and the best-objective averaged iterate as the model.
// The bias is a regularized constant coordinate (K+1 in the kernel case).
// ---------------------------------------------------------------------------

FittedClassifier::LinearState fit_linear_svm(const ModelSpec& spec, const Matrix& X,
                                             const std::vector<int>& y,
                                             const std::vector<double>& sw) {
    const std::size_t n = X.rows(), d = X.cols();
    const double lambda = spec.hp("lambda", 0.01);
    const int epochs = static_cast<int>(spec.hp("epochs", 200));
    const double W = std::accumulate(sw.begin(), sw.end(), 0.0);

    std::vector<double> w(d + 1, 0.0), wa(d + 1, 0.0), best(d + 1, 0.0);
    double best_obj = std::numeric_limits<double>::infinity();

    auto margin = [&](const std::vector<double>& v, std::size_t i) {
        double m = v[d];
        for (std::size_t j = 0; j < d; ++j) m += v[j] * X(i, j);
        return (y[i] == 1 ? 1.0 : -1.0) * m;
    };
    auto objective = [&](const std::vector<double>& v) {
        double reg = 0.5 * lambda * dot(v, v);
        double hinge = 0.0;
        for (std::size_t i = 0; i < n; ++i) hinge += sw[i] * std::max(0.0, 1.0 - margin(v, i));
        return reg + hinge / W;
    };

    FittedClassifier::LinearState st;
    std::uint64_t t = 0;
    for (int ep = 0; ep < epochs; ++ep) {
        for (std::size_t i = 0; i < n; ++i) {
            ++t;
            double eta = 1.0 / (lambda * static_cast<double>(t));
            double m = margin(w, i);
            double shrink = 1.0 - eta * lambda;
            for (auto& v : w) v *= shrink;
            if (m < 1.0) {
                double c = eta * (sw[i] * static_cast<double>(n) / W) * (y[i] == 1 ? 1.0 : -1.0);
                for (std::size_t j = 0; j < d; ++j) w[j] += c * X(i, j);
                w[d] += c;
            }
            for (std::size_t j = 0; j <= d; ++j) wa[j] += (w[j] - wa[j]) / static_cast<double>(t);
        }
        double o = objective(wa);
        if (o < best_obj) {
            best_obj = o;
            best = wa;
        }
        st.objective_curve.push_back(best_obj);
    }
    st.w = std::move(best);
    return st;
}

FittedClassifier::KernelState fit_gaussian_svm(const ModelSpec& spec, const Matrix& X,
                                               const std::vector<int>& y,
                                               const std::vector<double>& sw) {
    const std::size_t n = X.rows(), d = X.cols();
    const double lambda = spec.hp("lambda", 0.01);
    const int epochs = static_cast<int>(spec.hp("epochs", 200));
    const double W = std::accumulate(sw.begin(), sw.end(), 0.0);

    double gamma = spec.hp("gamma", 0.0);
    if (gamma <= 0.0) {
        double var_sum = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += X(i, j);
            mean /= static_cast<double>(n);
            double v = 0.0;
            for (std::size_t i = 0; i < n; ++i) v += (X(i, j) - mean) * (X(i, j) - mean);
            var_sum += v / static_cast<double>(n);
        }
        double mean_var = var_sum / static_cast<double>(d);
        gamma = mean_var > 0.0 ? 1.0 / (static_cast<double>(d) * mean_var) : 1.0;
    }

    Matrix K(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double k = std::exp(-gamma * squared_distance(X.row(i), X.row(j))) + 1.0;
            K(i, j) = k;
            K(j, i) = k;
        }

    std::vector<double> beta(n, 0.0), f(n, 0.0), beta_avg(n, 0.0), best(n, 0.0);
    double best_obj = std::numeric_limits<double>::infinity();

    auto objective = [&](const std::vector<double>& bv) {
        std::vector<double> fv(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += K(i, j) * bv[j];
            fv[i] = s;
        }
        double reg = 0.0;
        for (std::size_t i = 0; i < n; ++i) reg += bv[i] * fv[i];
        reg *= 0.5 * lambda;
        double hinge = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double yi = y[i] == 1 ? 1.0 : -1.0;
            hinge += sw[i] * std::max(0.0, 1.0 - yi * fv[i]);
        }
        return reg + hinge / W;
    };

    FittedClassifier::KernelState st;
    std::uint64_t t = 0;
    for (int ep = 0; ep < epochs; ++ep) {
        for (std::size_t i = 0; i < n; ++i) {
            ++t;
            double eta = 1.0 / (lambda * static_cast<double>(t));
            double yi = y[i] == 1 ? 1.0 : -1.0;
            double m = yi * f[i];
            double shrink = 1.0 - eta * lambda;
            for (std::size_t j = 0; j < n; ++j) {
                beta[j] *= shrink;
                f[j] *= shrink;
            }
            if (m < 1.0) {
                double c = eta * (sw[i] * static_cast<double>(n) / W) * yi;
                beta[i] += c;
                for (std::size_t j = 0; j < n; ++j) f[j] += c * K(i, j);
            }
            for (std::size_t j = 0; j < n; ++j)
                beta_avg[j] += (beta[j] - beta_avg[j]) / static_cast<double>(t);
        }
        double o = objective(beta_avg);
        if (o < best_obj) {
            best_obj = o;
            best = beta_avg;
        }
        st.objective_curve.push_back(best_obj);
    }
    st.support = X;
    st.beta = std::move(best);
    st.gamma = gamma;
    return st;
}

// ---------------------------------------------------------------------------
// K-NN: stored training set, class-frequency probabilities. The effective k is
// the largest odd value <= min(k, n) so unweighted votes cannot tie.
// ---------------------------------------------------------------------------

FittedClassifier::KnnState fit_knn(const ModelSpec& spec, const Matrix& X,
                                   const std::vector<int>& y, const std::vector<double>& sw) {
    std::size_t k = static_cast<std::size_t>(std::max(1.0, spec.hp("k", 7.0)));
    k = std::min(k, X.rows());
    if (k % 2 == 0 && k > 1) --k;
    return {X, y, sw, k};
}

} // namespace

FittedClassifier fit(const ModelSpec& spec, const Matrix& X, const std::vector<int>& y,
                     const std::vector<double>* sample_weights) {
    if (X.rows() != y.size())
        throw ShapeError("feature rows and label count differ");
    if (X.rows() == 0)
        throw SingleClassTrainingSet("empty training set");

    int n1 = static_cast<int>(std::count(y.begin(), y.end(), 1));
    int n0 = static_cast<int>(y.size()) - n1;
    if (n0 == 0 || n1 == 0)
        throw SingleClassTrainingSet("training set contains a single class");

    std::vector<double> sw;
    if (sample_weights) {
        if (sample_weights->size() != y.size())
            throw ShapeError("sample weight count differs from label count");
        for (double w : *sample_weights)
            if (!(w > 0.0)) throw Error("sample weights must be positive");
        sw = *sample_weights;
    } else {
        sw.assign(y.size(), 1.0);
    }

    FittedClassifier clf;
    clf.kind_ = spec.kind;
    clf.n_features_ = X.cols();
    clf.class_counts_ = {n0, n1};
    switch (spec.kind) {
    case ModelKind::Perceptron: clf.state_ = fit_perceptron(spec, X, y, sw); break;
    case ModelKind::DecisionStump: clf.state_ = fit_stump(X, y, sw); break;
    case ModelKind::DecisionTree: clf.state_ = fit_tree(spec, X, y, sw); break;
    case ModelKind::LinearSvm: clf.state_ = fit_linear_svm(spec, X, y, sw); break;
    case ModelKind::GaussianSvm: clf.state_ = fit_gaussian_svm(spec, X, y, sw); break;
    case ModelKind::Knn: clf.state_ = fit_knn(spec, X, y, sw); break;
    }
    return clf;
}

void FittedClassifier::check_shape(std::span<const double> x) const {
    if (x.size() != n_features_)
        throw ShapeError("query has " + std::to_string(x.size()) + " features, model expects " +
                         std::to_string(n_features_));
}

std::array<double, 2> FittedClassifier::predict_proba(std::span<const double> x) const {
    check_shape(x);
    switch (kind_) {
    case ModelKind::Perceptron: {
        const auto& st = std::get<LinearState>(state_);
        double m = dot(st.w, x) + st.b;
        double p1 = logistic(m / (norm(st.w) + kEps));
        return {1.0 - p1, p1};
    }
    case ModelKind::LinearSvm: {
        const auto& st = std::get<LinearState>(state_);
        double m = st.w[n_features_];
        for (std::size_t j = 0; j < n_features_; ++j) m += st.w[j] * x[j];
        double p1 = logistic(2.0 * m);
        return {1.0 - p1, p1};
    }
    case ModelKind::DecisionStump: {
        const auto& st = std::get<StumpState>(state_);
        if (!st.has_split) return st.root_proba;
        return x[static_cast<std::size_t>(st.feature)] <= st.threshold ? st.left_proba
                                                                       : st.right_proba;
    }
    case ModelKind::DecisionTree: {
        const auto& st = std::get<TreeState>(state_);
        int id = 0;
        while (st.nodes[static_cast<std::size_t>(id)].feature >= 0) {
            const auto& nd = st.nodes[static_cast<std::size_t>(id)];
            id = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        return st.nodes[static_cast<std::size_t>(id)].proba;
    }
    case ModelKind::GaussianSvm: {
        const auto& st = std::get<KernelState>(state_);
        double m = 0.0;
        for (std::size_t i = 0; i < st.support.rows(); ++i)
            m += st.beta[i] * (std::exp(-st.gamma * squared_distance(st.support.row(i), x)) + 1.0);
        double p1 = logistic(2.0 * m);
        return {1.0 - p1, p1};
    }
    case ModelKind::Knn: {
        const auto& st = std::get<KnnState>(state_);
        auto ns = knn(x, st.train, st.k);
        double w0 = 0.0, w1 = 0.0;
        for (auto i : ns.indices) (st.labels[i] == 1 ? w1 : w0) += st.weights[i];
        return normalized(w0, w1);
    }
    }
    return {0.5, 0.5};
}

int FittedClassifier::predict(std::span<const double> x) const {
    auto p = predict_proba(x);
    return p[1] > p[0] ? 1 : 0;
}

const std::vector<TreeNode>& FittedClassifier::tree_nodes() const {
    if (kind_ != ModelKind::DecisionTree)
        throw WrongModelKind("tree_nodes requires a DecisionTree model");
    return std::get<TreeState>(state_).nodes;
}

const std::vector<double>& FittedClassifier::svm_objective_curve() const {
    if (kind_ == ModelKind::LinearSvm) return std::get<LinearState>(state_).objective_curve;
    if (kind_ == ModelKind::GaussianSvm) return std::get<KernelState>(state_).objective_curve;
    throw WrongModelKind("objective curve requires an SVM model");
}

FittedClassifier FittedClassifier::constant_tree(std::size_t n_features,
                                                 std::array<double, 2> proba,
                                                 std::pair<int, int> class_counts) {
    FittedClassifier clf;
    clf.kind_ = ModelKind::DecisionTree;
    clf.n_features_ = n_features;
    clf.class_counts_ = class_counts;
    TreeNode leaf;
    leaf.proba = proba;
    clf.state_ = TreeState{{leaf}};
    return clf;
}

FittedClassifier FittedClassifier::from_tree_nodes(std::size_t n_features,
                                                   std::vector<TreeNode> nodes,
                                                   std::pair<int, int> class_counts) {
    FittedClassifier clf;
    clf.kind_ = ModelKind::DecisionTree;
    clf.n_features_ = n_features;
    clf.class_counts_ = class_counts;
    clf.state_ = TreeState{std::move(nodes)};
    return clf;
}

FeatureImportances gini_importances(const FittedClassifier& clf) {
    const auto& nodes = clf.tree_nodes();
    FeatureImportances imp;
    imp.values.assign(clf.n_features(), 0.0);
    double total = 0.0;
    for (const auto& nd : nodes) {
        if (nd.feature < 0) continue;
        imp.values[static_cast<std::size_t>(nd.feature)] += nd.decrease;
        total += nd.decrease;
    }
    if (total > 0.0)
        for (auto& v : imp.values) v /= total;
    return imp;
}

} // namespace olprec
