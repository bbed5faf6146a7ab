#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "olprec/matrix.hpp"

namespace olprec {

enum class ModelKind {
    Perceptron,
    DecisionStump,
    DecisionTree,
    LinearSvm,
    GaussianSvm,
    Knn,
};

/// Portfolio order used everywhere a meta-label vector is indexed.
inline constexpr std::array<ModelKind, 5> kPortfolio = {
    ModelKind::Perceptron, ModelKind::DecisionStump, ModelKind::DecisionTree,
    ModelKind::LinearSvm, ModelKind::GaussianSvm,
};
inline constexpr std::size_t kPortfolioSize = kPortfolio.size();

const char* to_string(ModelKind kind);
std::optional<ModelKind> model_kind_from_string(const std::string& name);

struct ModelSpec {
    ModelKind kind = ModelKind::Perceptron;
    std::map<std::string, double> hyperparameters;
    std::uint64_t seed = 0;

    double hp(const std::string& key, double fallback) const {
        auto it = hyperparameters.find(key);
        return it == hyperparameters.end() ? fallback : it->second;
    }

    ModelSpec with_seed(std::uint64_t s) const {
        ModelSpec out = *this;
        out.seed = s;
        return out;
    }
};

/// Portfolio specs with default hyperparameters, in portfolio order.
std::vector<ModelSpec> default_portfolio();

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    std::array<double, 2> proba = {0.0, 0.0};
    double decrease = 0.0; // weighted impurity decrease contributed by this split
};

struct FeatureImportances {
    std::vector<double> values;
};

/// A trained classifier. Immutable; predict_proba returns two components
/// summing to 1, and predict breaks probability ties toward class 0.
class FittedClassifier {
public:
    FittedClassifier() = default;

    ModelKind kind() const { return kind_; }
    std::size_t n_features() const { return n_features_; }
    std::pair<int, int> training_class_counts() const { return class_counts_; }

    int predict(std::span<const double> x) const;
    std::array<double, 2> predict_proba(std::span<const double> x) const;

    /// Tree nodes (DecisionTree only); throws WrongModelKind otherwise.
    const std::vector<TreeNode>& tree_nodes() const;

    /// Best-so-far objective per epoch (LinearSvm / GaussianSvm only).
    const std::vector<double>& svm_objective_curve() const;

    /// Single-leaf tree used when a training slice has one class
    /// (only meta-training constructs these; fit() itself rejects such input).
    static FittedClassifier constant_tree(std::size_t n_features, std::array<double, 2> proba,
                                          std::pair<int, int> class_counts);

    /// Rebuild a DecisionTree from serialized nodes.
    static FittedClassifier from_tree_nodes(std::size_t n_features, std::vector<TreeNode> nodes,
                                            std::pair<int, int> class_counts);

private:
    friend FittedClassifier fit(const ModelSpec&, const Matrix&, const std::vector<int>&,
                                const std::vector<double>*);

    struct LinearState { // Perceptron and LinearSvm
        std::vector<double> w; // LinearSvm appends the bias as a trailing coordinate
        double b = 0.0;
        std::vector<double> objective_curve;
    };
    struct StumpState {
        bool has_split = false;
        int feature = 0;
        double threshold = 0.0;
        std::array<double, 2> left_proba{}, right_proba{}, root_proba{};
    };
    struct TreeState {
        std::vector<TreeNode> nodes;
    };
    struct KernelState {
        Matrix support;
        std::vector<double> beta;
        double gamma = 1.0;
        std::vector<double> objective_curve;
    };
    struct KnnState {
        Matrix train;
        std::vector<int> labels;
        std::vector<double> weights;
        std::size_t k = 1;
    };

    ModelKind kind_ = ModelKind::Perceptron;
    std::size_t n_features_ = 0;
    std::pair<int, int> class_counts_{0, 0};
    std::variant<LinearState, StumpState, TreeState, KernelState, KnnState> state_;

    void check_shape(std::span<const double> x) const;
};

/// Train a classifier. Requires both classes present; weights, when given,
/// must be positive and match the row count. Deterministic for a fixed seed.
FittedClassifier fit(const ModelSpec& spec, const Matrix& X, const std::vector<int>& y,
                     const std::vector<double>* sample_weights = nullptr);

/// Normalized total Gini-impurity reduction per feature (DecisionTree only).
FeatureImportances gini_importances(const FittedClassifier& clf);

/// Per-sample weights realizing w_c = n / (2 * n_c).
std::vector<double> balanced_class_weights(const std::vector<int>& y);

} // namespace olprec
