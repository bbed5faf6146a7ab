#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "olprec/complexity.hpp"
#include "olprec/learners.hpp"
#include "olprec/olp.hpp"

#include "json.hpp"

namespace olprec {

/// One meta-example: local complexity vector plus the relevance bit per
/// portfolio model, tagged with where it came from.
struct MetaInstance {
    MetaFeatureVector v;
    std::array<int, kPortfolioSize> u{};
    std::string dataset;
    int fold = 0;
    std::size_t sample = 0;
};

struct MetaDataset {
    std::vector<MetaInstance> instances;
    std::vector<ModelSpec> portfolio;

    std::array<int, kPortfolioSize> label_positives() const;
};

struct MetaBuildConfig {
    int folds = 5;
    std::uint64_t seed = 42;
    std::size_t k_prime = 50;
    double t = 0.7;
    int M = 5;
    int k_s = 7;
    int k_h = 7;
};

struct GridChoice {
    int max_depth = -1; // -1 = unlimited
    double min_impurity_decrease = 0.0;
    int min_samples_leaf = 1;
    double cv_precision = 0.0;
};

struct LabelStats {
    int positives = 0;
    int negatives = 0;
    bool constant = false; // single-classed label, tree degenerated to a leaf
};

/// Binary-Relevance meta-classifier: one class-weighted decision tree per
/// portfolio model, sharing one grid-searched hyperparameter triple.
struct MetaClassifier {
    std::vector<FittedClassifier> trees;
    GridChoice grid_choice;
    std::array<LabelStats, kPortfolioSize> label_stats{};
    std::vector<ModelSpec> portfolio;
};

struct Recommendation {
    int chosen = 0;
    std::array<int, kPortfolioSize> relevant{};
    std::array<double, kPortfolioSize> probabilities{};
    bool fallback_used = false;

    /// Easy-routed samples carry no recommendation: all-zero relevant set with
    /// the fallback flag unset cannot occur in the live path.
    bool absent() const {
        if (fallback_used) return false;
        for (int r : relevant)
            if (r) return false;
        return true;
    }
};

/// u_j = 1 iff run j labelled the sample correctly with P(true class) > t.
std::array<int, kPortfolioSize> label_relevance(
    const std::array<OlpOutput, kPortfolioSize>& results, int y_true, double t);

/// Drop instances whose relevance vector is all ones or all zeros.
MetaDataset filter_indistinctive(MetaDataset md);

/// Seed for everything derived from one evaluation sample; keeps runs
/// deterministic regardless of worker count.
std::uint64_t meta_sample_seed(std::uint64_t run_seed, const std::string& dataset_name, int fold,
                               std::size_t sample_index);

/// Portfolio spec for model j with the per-sample training seed applied.
ModelSpec portfolio_spec(const std::vector<ModelSpec>& portfolio, std::size_t j,
                         std::uint64_t sample_seed);

/// Cross-validate every dataset, extract meta-features and relevance labels for
/// its borderline test samples, pool everything, and filter indistinctives.
/// Datasets too small to fold are skipped with a warning.
MetaDataset build_meta_dataset(const std::vector<Dataset>& datasets, const MetaBuildConfig& cfg,
                               std::vector<std::string>* warnings = nullptr);

/// Grid-search the shared tree triple by 10-fold example-based precision, then
/// train one class-weighted tree per label on the full meta-dataset.
MetaClassifier train_meta(const MetaDataset& md, std::uint64_t seed);

/// Pure selection rule: argmax probability over the relevant set, or over all
/// labels (fallback) when none is relevant. Ties go to the lowest index.
std::pair<int, bool> choose_from(const std::array<double, kPortfolioSize>& probabilities,
                                 const std::array<int, kPortfolioSize>& relevant);

Recommendation recommend(const MetaClassifier& mc, const MetaFeatureVector& v);

/// Generalization-phase routing: easy queries go to K-NN with an absent
/// recommendation, borderline ones through recommend + classify_with_model.
std::pair<OlpOutput, Recommendation> classify_recommended(const OlpState& state,
                                                          const MetaClassifier& mc,
                                                          std::span<const double> x_q,
                                                          std::size_t k_prime,
                                                          std::uint64_t sample_seed);

std::string meta_dataset_to_csv(const MetaDataset& md);
MetaDataset meta_dataset_from_csv(const std::string& text);

nlohmann::json meta_classifier_to_json(const MetaClassifier& mc);
MetaClassifier meta_classifier_from_json(const nlohmann::json& j);

} // namespace olprec
