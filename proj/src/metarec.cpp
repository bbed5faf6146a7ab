#include "olprec/metarec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "olprec/errors.hpp"
#include "olprec/metrics.hpp"
#include "olprec/util.hpp"

namespace olprec {

namespace {

constexpr std::uint64_t kFoldStream = 0x6f6c;
constexpr std::uint64_t kModelStream = 101;

bool all_equal_bits(const std::array<int, kPortfolioSize>& u) {
    for (std::size_t j = 1; j < u.size(); ++j)
        if (u[j] != u[0]) return false;
    return true;
}

struct LabelSlice {
    std::vector<int> y;
    int positives = 0;
};

LabelSlice label_column(const std::vector<MetaInstance>& inst, const std::vector<std::size_t>& idx,
                        std::size_t j) {
    LabelSlice out;
    out.y.reserve(idx.size());
    for (auto i : idx) {
        out.y.push_back(inst[i].u[j]);
        out.positives += inst[i].u[j];
    }
    return out;
}

Matrix feature_rows(const std::vector<MetaInstance>& inst, const std::vector<std::size_t>& idx) {
    Matrix X(idx.size(), MetaFeatureVector::kSize);
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < MetaFeatureVector::kSize; ++c)
            X(r, c) = inst[idx[r]].v[c];
    return X;
}

ModelSpec tree_spec(const GridChoice& g) {
    ModelSpec spec;
    spec.kind = ModelKind::DecisionTree;
    spec.hyperparameters["max_depth"] = static_cast<double>(g.max_depth);
    spec.hyperparameters["min_impurity_decrease"] = g.min_impurity_decrease;
    spec.hyperparameters["min_samples_leaf"] = static_cast<double>(g.min_samples_leaf);
    spec.hyperparameters["class_weighted"] = 1.0;
    return spec;
}

/// Fit one label's tree; a single-classed slice degenerates to a constant leaf.
FittedClassifier fit_label_tree(const GridChoice& g, const Matrix& X, const LabelSlice& s,
                                bool* constant = nullptr) {
    int n = static_cast<int>(s.y.size());
    if (s.positives == 0 || s.positives == n) {
        if (constant) *constant = true;
        std::array<double, 2> proba = (n > 0 && s.positives == n)
                                          ? std::array<double, 2>{0.0, 1.0}
                                          : std::array<double, 2>{1.0, 0.0};
        return FittedClassifier::constant_tree(MetaFeatureVector::kSize, proba,
                                               {n - s.positives, s.positives});
    }
    if (constant) *constant = false;
    return fit(tree_spec(g), X, s.y);
}

std::vector<std::vector<std::size_t>> deal_folds(std::size_t n, int folds, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
    for (std::size_t i = 0; i < n; ++i) out[i % static_cast<std::size_t>(folds)].push_back(order[i]);
    return out;
}

double cv_precision(const MetaDataset& md, const GridChoice& g, std::uint64_t seed) {
    const auto& inst = md.instances;
    int folds = static_cast<int>(std::min<std::size_t>(10, inst.size()));
    if (folds < 2) return 0.0;
    auto fold_sets = deal_folds(inst.size(), folds, seed);

    double total = 0.0;
    int counted = 0;
    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> train_idx;
        for (int g2 = 0; g2 < folds; ++g2)
            if (g2 != f)
                train_idx.insert(train_idx.end(), fold_sets[static_cast<std::size_t>(g2)].begin(),
                                 fold_sets[static_cast<std::size_t>(g2)].end());
        const auto& test_idx = fold_sets[static_cast<std::size_t>(f)];
        if (train_idx.empty() || test_idx.empty()) continue;
        std::sort(train_idx.begin(), train_idx.end());

        Matrix X = feature_rows(inst, train_idx);
        std::vector<FittedClassifier> trees;
        for (std::size_t j = 0; j < kPortfolioSize; ++j)
            trees.push_back(fit_label_tree(g, X, label_column(inst, train_idx, j)));

        std::vector<std::vector<int>> u_true, u_pred;
        for (auto i : test_idx) {
            std::vector<int> ut(inst[i].u.begin(), inst[i].u.end());
            std::vector<int> up(kPortfolioSize);
            for (std::size_t j = 0; j < kPortfolioSize; ++j)
                up[j] = trees[j].predict(inst[i].v.v);
            u_true.push_back(std::move(ut));
            u_pred.push_back(std::move(up));
        }
        total += multilabel_precision(u_true, u_pred);
        ++counted;
    }
    return counted ? total / counted : 0.0;
}

/// Lower complexity wins ties: smaller depth (unlimited counts as largest),
/// then larger leaf, then larger impurity gate.
bool simpler(const GridChoice& a, const GridChoice& b) {
    int da = a.max_depth < 0 ? std::numeric_limits<int>::max() : a.max_depth;
    int db = b.max_depth < 0 ? std::numeric_limits<int>::max() : b.max_depth;
    if (da != db) return da < db;
    if (a.min_samples_leaf != b.min_samples_leaf) return a.min_samples_leaf > b.min_samples_leaf;
    return a.min_impurity_decrease > b.min_impurity_decrease;
}

} // namespace

std::array<int, kPortfolioSize> MetaDataset::label_positives() const {
    std::array<int, kPortfolioSize> out{};
    for (const auto& inst : instances)
        for (std::size_t j = 0; j < kPortfolioSize; ++j) out[j] += inst.u[j];
    return out;
}

std::array<int, kPortfolioSize> label_relevance(
    const std::array<OlpOutput, kPortfolioSize>& results, int y_true, double t) {
    std::array<int, kPortfolioSize> u{};
    for (std::size_t j = 0; j < kPortfolioSize; ++j)
        u[j] = (results[j].label == y_true &&
                results[j].proba[static_cast<std::size_t>(y_true)] > t)
                   ? 1
                   : 0;
    return u;
}

MetaDataset filter_indistinctive(MetaDataset md) {
    std::erase_if(md.instances, [](const MetaInstance& mi) { return all_equal_bits(mi.u); });
    return md;
}

std::uint64_t meta_sample_seed(std::uint64_t run_seed, const std::string& dataset_name, int fold,
                               std::size_t sample_index) {
    return mix64(mix64(mix64(run_seed, fnv1a(dataset_name)), static_cast<std::uint64_t>(fold)),
                 static_cast<std::uint64_t>(sample_index));
}

ModelSpec portfolio_spec(const std::vector<ModelSpec>& portfolio, std::size_t j,
                         std::uint64_t sample_seed) {
    return portfolio[j].with_seed(mix64(sample_seed, kModelStream + j));
}

MetaDataset build_meta_dataset(const std::vector<Dataset>& datasets, const MetaBuildConfig& cfg,
                               std::vector<std::string>* warnings) {
    MetaDataset md;
    md.portfolio = default_portfolio();

    for (const auto& ds : datasets) {
        std::vector<FoldSplit> folds;
        try {
            folds = stratified_kfold(ds, cfg.folds, mix64(cfg.seed, fnv1a(ds.name)));
        } catch (const StratificationError& e) {
            if (warnings) warnings->push_back("skipping '" + ds.name + "': " + e.what());
            continue;
        }

        for (const auto& fold : folds) {
            Matrix train_raw = ds.features.gather(fold.train_indices);
            Scaler sc = scaler_fit(train_raw);

            Dataset train;
            train.name = ds.name;
            train.feature_names = ds.feature_names;
            train.features = scaler_apply(sc, train_raw);
            for (auto i : fold.train_indices) train.labels.push_back(ds.labels[i]);

            OlpState state = olp_offline(train, cfg.k_h, cfg.k_s, cfg.M);
            for (auto ti : fold.test_indices) {
                auto x = scaler_apply_row(sc, ds.features.row(ti));
                if (!is_borderline(state, x)) continue; // easy: indistinctive by construction

                std::uint64_t s = meta_sample_seed(cfg.seed, ds.name, fold.fold_id, ti);
                MetaInstance mi;
                mi.v = extract_meta_features(x, train, cfg.k_prime, s);
                std::array<OlpOutput, kPortfolioSize> outs;
                for (std::size_t j = 0; j < kPortfolioSize; ++j)
                    outs[j] = classify_with_model(state, x, portfolio_spec(md.portfolio, j, s));
                mi.u = label_relevance(outs, ds.labels[ti], cfg.t);
                mi.dataset = ds.name;
                mi.fold = fold.fold_id;
                mi.sample = ti;
                md.instances.push_back(std::move(mi));
            }
        }
    }
    return filter_indistinctive(std::move(md));
}

MetaClassifier train_meta(const MetaDataset& md, std::uint64_t seed) {
    static constexpr int kDepths[] = {3, 5, 7, -1};
    static constexpr double kImpurity[] = {0.0, 0.001, 0.01};
    static constexpr int kLeaf[] = {1, 5, 10};

    GridChoice best{};
    bool have_best = false;
    for (int depth : kDepths) {
        for (double mid : kImpurity) {
            for (int leaf : kLeaf) {
                GridChoice g{depth, mid, leaf, 0.0};
                g.cv_precision = cv_precision(md, g, mix64(seed, kFoldStream));
                if (!have_best || g.cv_precision > best.cv_precision ||
                    (g.cv_precision == best.cv_precision && simpler(g, best))) {
                    best = g;
                    have_best = true;
                }
            }
        }
    }

    MetaClassifier mc;
    mc.grid_choice = best;
    mc.portfolio = md.portfolio.empty() ? default_portfolio() : md.portfolio;

    std::vector<std::size_t> all(md.instances.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    Matrix X = feature_rows(md.instances, all);
    for (std::size_t j = 0; j < kPortfolioSize; ++j) {
        auto slice = label_column(md.instances, all, j);
        bool constant = false;
        mc.trees.push_back(fit_label_tree(best, X, slice, &constant));
        mc.label_stats[j] = {slice.positives, static_cast<int>(slice.y.size()) - slice.positives,
                             constant};
    }
    return mc;
}

std::pair<int, bool> choose_from(const std::array<double, kPortfolioSize>& probabilities,
                                 const std::array<int, kPortfolioSize>& relevant) {
    int chosen = -1;
    for (std::size_t j = 0; j < kPortfolioSize; ++j) {
        if (!relevant[j]) continue;
        if (chosen < 0 || probabilities[j] > probabilities[static_cast<std::size_t>(chosen)])
            chosen = static_cast<int>(j);
    }
    if (chosen >= 0) return {chosen, false};
    chosen = 0;
    for (std::size_t j = 1; j < kPortfolioSize; ++j)
        if (probabilities[j] > probabilities[static_cast<std::size_t>(chosen)])
            chosen = static_cast<int>(j);
    return {chosen, true};
}

Recommendation recommend(const MetaClassifier& mc, const MetaFeatureVector& v) {
    Recommendation rec;
    for (std::size_t j = 0; j < kPortfolioSize; ++j) {
        rec.probabilities[j] = mc.trees[j].predict_proba(v.v)[1];
        rec.relevant[j] = mc.trees[j].predict(v.v);
    }
    auto [chosen, fallback] = choose_from(rec.probabilities, rec.relevant);
    rec.chosen = chosen;
    rec.fallback_used = fallback;
    return rec;
}

std::pair<OlpOutput, Recommendation> classify_recommended(const OlpState& state,
                                                          const MetaClassifier& mc,
                                                          std::span<const double> x_q,
                                                          std::size_t k_prime,
                                                          std::uint64_t sample_seed) {
    if (!is_borderline(state, x_q)) return {knn_output(state, x_q), Recommendation{}};

    auto v = extract_meta_features(x_q, state.train, k_prime, sample_seed);
    Recommendation rec = recommend(mc, v);
    auto spec = portfolio_spec(mc.portfolio, static_cast<std::size_t>(rec.chosen), sample_seed);
    return {classify_with_model(state, x_q, spec), rec};
}

std::string meta_dataset_to_csv(const MetaDataset& md) {
    std::ostringstream out;
    out << "dataset,fold,sample,F3,F4,L2,L3,N1,N2,N3,N4,LSC,Den,C1,C2,"
           "u_perceptron,u_ds,u_dt,u_lsvm,u_gsvm\n";
    for (const auto& mi : md.instances) {
        out << mi.dataset << ',' << mi.fold << ',' << mi.sample;
        for (double x : mi.v.v) out << ',' << format_double(x);
        for (int b : mi.u) out << ',' << b;
        out << '\n';
    }
    return out.str();
}

MetaDataset meta_dataset_from_csv(const std::string& text) {
    MetaDataset md;
    md.portfolio = default_portfolio();
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        auto stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        auto cells = split(stripped, ',');
        if (cells.size() != 3 + MetaFeatureVector::kSize + kPortfolioSize)
            throw ParseError("meta CSV row has " + std::to_string(cells.size()) + " cells");
        MetaInstance mi;
        mi.dataset = cells[0];
        mi.fold = std::stoi(cells[1]);
        mi.sample = static_cast<std::size_t>(std::stoull(cells[2]));
        for (std::size_t c = 0; c < MetaFeatureVector::kSize; ++c)
            mi.v[c] = std::stod(cells[3 + c]);
        for (std::size_t j = 0; j < kPortfolioSize; ++j)
            mi.u[j] = std::stoi(cells[3 + MetaFeatureVector::kSize + j]);
        md.instances.push_back(std::move(mi));
    }
    return md;
}

namespace {

nlohmann::json tree_to_json(const FittedClassifier& clf) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& nd : clf.tree_nodes()) {
        nodes.push_back({{"feature", nd.feature},
                         {"threshold", nd.threshold},
                         {"left", nd.left},
                         {"right", nd.right},
                         {"proba", nd.proba},
                         {"decrease", nd.decrease}});
    }
    auto counts = clf.training_class_counts();
    return {{"n_features", clf.n_features()},
            {"class_counts", {counts.first, counts.second}},
            {"nodes", std::move(nodes)}};
}

FittedClassifier tree_from_json(const nlohmann::json& j) {
    std::vector<TreeNode> nodes;
    for (const auto& nj : j.at("nodes")) {
        TreeNode nd;
        nd.feature = nj.at("feature").get<int>();
        nd.threshold = nj.at("threshold").get<double>();
        nd.left = nj.at("left").get<int>();
        nd.right = nj.at("right").get<int>();
        auto proba = nj.at("proba").get<std::vector<double>>();
        nd.proba = {proba.at(0), proba.at(1)};
        nd.decrease = nj.at("decrease").get<double>();
        nodes.push_back(nd);
    }
    auto counts = j.at("class_counts").get<std::vector<int>>();
    return FittedClassifier::from_tree_nodes(j.at("n_features").get<std::size_t>(),
                                             std::move(nodes), {counts.at(0), counts.at(1)});
}

} // namespace

nlohmann::json meta_classifier_to_json(const MetaClassifier& mc) {
    nlohmann::json j;
    j["version"] = 1;
    j["grid_choice"] = {{"max_depth", mc.grid_choice.max_depth},
                        {"min_impurity_decrease", mc.grid_choice.min_impurity_decrease},
                        {"min_samples_leaf", mc.grid_choice.min_samples_leaf},
                        {"cv_precision", mc.grid_choice.cv_precision}};
    nlohmann::json trees = nlohmann::json::array();
    nlohmann::json stats = nlohmann::json::array();
    for (std::size_t jx = 0; jx < kPortfolioSize; ++jx) {
        trees.push_back(tree_to_json(mc.trees[jx]));
        stats.push_back({{"positives", mc.label_stats[jx].positives},
                         {"negatives", mc.label_stats[jx].negatives},
                         {"constant", mc.label_stats[jx].constant}});
    }
    j["trees"] = std::move(trees);
    j["label_stats"] = std::move(stats);
    nlohmann::json labels = nlohmann::json::array();
    for (auto kind : kPortfolio) labels.push_back(to_string(kind));
    j["portfolio"] = std::move(labels);
    return j;
}

MetaClassifier meta_classifier_from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != 1)
        throw ConfigError("unsupported meta-classifier version");
    MetaClassifier mc;
    mc.portfolio = default_portfolio();
    mc.grid_choice.max_depth = j.at("grid_choice").at("max_depth").get<int>();
    mc.grid_choice.min_impurity_decrease =
        j.at("grid_choice").at("min_impurity_decrease").get<double>();
    mc.grid_choice.min_samples_leaf = j.at("grid_choice").at("min_samples_leaf").get<int>();
    mc.grid_choice.cv_precision = j.at("grid_choice").at("cv_precision").get<double>();
    for (const auto& tj : j.at("trees")) mc.trees.push_back(tree_from_json(tj));
    std::size_t jx = 0;
    for (const auto& sj : j.at("label_stats")) {
        mc.label_stats[jx].positives = sj.at("positives").get<int>();
        mc.label_stats[jx].negatives = sj.at("negatives").get<int>();
        mc.label_stats[jx].constant = sj.at("constant").get<bool>();
        ++jx;
    }
    return mc;
}

} // namespace olprec
