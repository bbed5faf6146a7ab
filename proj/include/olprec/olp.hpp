#pragma once

#include <optional>
#include <variant>

#include "olprec/dataset.hpp"
#include "olprec/learners.hpp"
#include "olprec/neighbors.hpp"
#include "olprec/sgh.hpp"

#include "json.hpp"

namespace olprec {

/// Offline OLP state: scaled training data plus the KDN hardness table.
struct OlpState {
    Dataset train; // scaled features
    KdnTable kdn_table;
    int k_s = 7;
    int M = 5;
};

using PoolMember = std::variant<FittedClassifier, Hyperplane>;

int member_predict(const PoolMember& m, std::span<const double> x);

struct LocalPool {
    std::vector<PoolMember> members;
    std::vector<int> k_schedule;
};

struct OlpOutput {
    int label = 0;
    std::array<double, 2> proba = {0.5, 0.5};
    bool pool_used = false;
    std::optional<LocalPool> pool;
};

/// Compute KDN over the scaled training set and freeze the run parameters.
OlpState olp_offline(const Dataset& scaled_train, int k_h = 7, int k_s = 7, int M = 5);

/// True iff any of the k_s nearest training neighbors has a nonzero KDN score.
bool is_borderline(const OlpState& state, std::span<const double> x_q);

/// Plain K-NN classification with the learner module's semantics; the easy-path
/// output shared by every classify_* variant.
OlpOutput knn_output(const OlpState& state, std::span<const double> x_q);

/// Original OLP: per iteration an SGH subpool over the K-NNE neighborhood, one
/// member selected by MCB over the query's region of competence.
OlpOutput classify_sgh_mcb(const OlpState& state, std::span<const double> x_q,
                           double sim_thr = 0.7, double comp_thr = 0.1);

/// Generic-model OLP: per iteration one classifier of the given kind trained
/// directly on the K-NNE neighborhood.
OlpOutput classify_with_model(const OlpState& state, std::span<const double> x_q,
                              const ModelSpec& spec);

/// Harness-only upper bound: run every portfolio model and keep a correct
/// output when one exists (highest true-class probability), else the most
/// confident one. Requires the true label.
OlpOutput classify_ideal(const OlpState& state, std::span<const double> x_q,
                         std::span<const ModelSpec> specs, int y_true);

nlohmann::json olp_state_to_json(const OlpState& state);
OlpState olp_state_from_json(const nlohmann::json& j);

} // namespace olprec
