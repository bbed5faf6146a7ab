#include "olprec/olp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "olprec/errors.hpp"
#include "olprec/util.hpp"

namespace olprec {

namespace {

std::size_t clamped_k(std::size_t k, std::size_t n) {
    k = std::min(k, n);
    if (k % 2 == 0 && k > 1) --k;
    return k;
}

OlpOutput vote(std::vector<PoolMember> members, std::vector<int> schedule,
               std::span<const double> x_q) {
    int votes1 = 0;
    for (const auto& m : members) votes1 += member_predict(m, x_q);
    double total = static_cast<double>(members.size());
    OlpOutput out;
    out.proba = {(total - votes1) / total, votes1 / total};
    out.label = out.proba[1] > out.proba[0] ? 1 : 0;
    out.pool_used = true;
    out.pool = LocalPool{std::move(members), std::move(schedule)};
    return out;
}

/// K-NNE neighborhood slice with contradictory exact duplicates collapsed to a
/// single representative carrying the group's majority label (first row's label
/// on a tie), as SGH requires.
void dedup_contradictions(Matrix& X, std::vector<int>& y) {
    std::vector<char> drop(X.rows(), 0);
    std::vector<int> label(y);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        if (drop[i]) continue;
        int counts[2] = {y[i] == 0, y[i] == 1};
        for (std::size_t j = i + 1; j < X.rows(); ++j) {
            if (drop[j] || y[j] == y[i]) continue;
            if (std::equal(X.row(i).begin(), X.row(i).end(), X.row(j).begin())) {
                drop[j] = 1;
                ++counts[y[j]];
            }
        }
        if (counts[0] + counts[1] > 1)
            label[i] = counts[1] > counts[0] ? 1 : (counts[0] > counts[1] ? 0 : y[i]);
    }
    if (std::none_of(drop.begin(), drop.end(), [](char c) { return c != 0; })) return;
    Matrix nx;
    std::vector<int> ny;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        if (drop[i]) continue;
        nx.push_row(X.row(i));
        ny.push_back(label[i]);
    }
    X = std::move(nx);
    y = std::move(ny);
}

} // namespace

int member_predict(const PoolMember& m, std::span<const double> x) {
    return std::visit([&](const auto& c) { return c.predict(x); }, m);
}

OlpState olp_offline(const Dataset& scaled_train, int k_h, int k_s, int M) {
    if (k_s < 1 || k_s % 2 == 0)
        throw ConfigError("k_s must be odd and >= 1");
    if (M < 1)
        throw ConfigError("M must be >= 1");
    OlpState st;
    st.train = scaled_train;
    st.kdn_table = kdn(scaled_train, k_h);
    st.k_s = k_s;
    st.M = M;
    return st;
}

bool is_borderline(const OlpState& state, std::span<const double> x_q) {
    std::size_t k = std::min(static_cast<std::size_t>(state.k_s), state.train.n_samples());
    auto ns = knn(x_q, state.train.features, k);
    for (auto i : ns.indices)
        if (state.kdn_table.scores[i] > 0.0) return true;
    return false;
}

OlpOutput knn_output(const OlpState& state, std::span<const double> x_q) {
    std::size_t k = clamped_k(static_cast<std::size_t>(state.k_s), state.train.n_samples());
    auto ns = knn(x_q, state.train.features, k);
    double w1 = 0.0;
    for (auto i : ns.indices) w1 += (state.train.labels[i] == 1);
    double total = static_cast<double>(ns.size());
    OlpOutput out;
    out.proba = {(total - w1) / total, w1 / total};
    out.label = out.proba[1] > out.proba[0] ? 1 : 0;
    out.pool_used = false;
    return out;
}

OlpOutput classify_sgh_mcb(const OlpState& state, std::span<const double> x_q, double sim_thr,
                           double comp_thr) {
    if (!is_borderline(state, x_q)) return knn_output(state, x_q);

    std::size_t kq = std::min(static_cast<std::size_t>(state.k_s), state.train.n_samples());
    auto roc = knn(x_q, state.train.features, kq); // region of competence

    std::vector<PoolMember> members;
    std::vector<int> schedule;
    for (int m = 0; m < state.M; ++m) {
        int k_m = state.k_s + 2 * m;
        schedule.push_back(k_m);
        auto ns = knne(x_q, state.train.features, state.train.labels,
                       static_cast<std::size_t>(k_m));
        Matrix X = state.train.features.gather(ns.indices);
        std::vector<int> y;
        for (auto i : ns.indices) y.push_back(state.train.labels[i]);
        dedup_contradictions(X, y);
        auto subpool = generate_subpool(X, y);
        const auto& cls = subpool.classifiers;

        // MCB: filter the region of competence by behavioral similarity to the
        // query, then score each member on the survivors.
        std::vector<int> behavior_q;
        for (const auto& h : cls) behavior_q.push_back(h.predict(x_q));
        std::vector<std::size_t> kept;
        for (auto i : roc.indices) {
            std::size_t agree = 0;
            for (std::size_t c = 0; c < cls.size(); ++c)
                agree += (cls[c].predict(state.train.features.row(i)) == behavior_q[c]);
            if (static_cast<double>(agree) / static_cast<double>(cls.size()) >= sim_thr)
                kept.push_back(i);
        }
        if (kept.empty()) kept.assign(roc.indices.begin(), roc.indices.end());

        std::vector<double> score(cls.size(), 0.0);
        for (std::size_t c = 0; c < cls.size(); ++c) {
            std::size_t hits = 0;
            for (auto i : kept)
                hits += (cls[c].predict(state.train.features.row(i)) == state.train.labels[i]);
            score[c] = static_cast<double>(hits) / static_cast<double>(kept.size());
        }

        std::size_t best = 0;
        for (std::size_t c = 1; c < cls.size(); ++c)
            if (score[c] > score[best]) best = c;
        std::size_t selected = best;
        if (cls.size() > 1) {
            double runner_up = -1.0;
            for (std::size_t c = 0; c < cls.size(); ++c)
                if (c != best) runner_up = std::max(runner_up, score[c]);
            if (score[best] - runner_up < comp_thr) {
                double best_margin = -1.0;
                for (std::size_t c = 0; c < cls.size(); ++c) {
                    if (score[c] < score[best] - comp_thr) continue;
                    double mg = cls[c].abs_margin(x_q);
                    if (mg > best_margin) {
                        best_margin = mg;
                        selected = c;
                    }
                }
            }
        }
        members.emplace_back(cls[selected]);
    }
    return vote(std::move(members), std::move(schedule), x_q);
}

OlpOutput classify_with_model(const OlpState& state, std::span<const double> x_q,
                              const ModelSpec& spec) {
    if (!is_borderline(state, x_q)) return knn_output(state, x_q);

    std::vector<PoolMember> members;
    std::vector<int> schedule;
    for (int m = 0; m < state.M; ++m) {
        int k_m = state.k_s + 2 * m;
        schedule.push_back(k_m);
        auto ns = knne(x_q, state.train.features, state.train.labels,
                       static_cast<std::size_t>(k_m));
        Matrix X = state.train.features.gather(ns.indices);
        std::vector<int> y;
        for (auto i : ns.indices) y.push_back(state.train.labels[i]);
        members.emplace_back(
            fit(spec.with_seed(mix64(spec.seed, static_cast<std::uint64_t>(m))), X, y));
    }
    return vote(std::move(members), std::move(schedule), x_q);
}

OlpOutput classify_ideal(const OlpState& state, std::span<const double> x_q,
                         std::span<const ModelSpec> specs, int y_true) {
    std::vector<OlpOutput> outs;
    outs.reserve(specs.size());
    for (const auto& s : specs) outs.push_back(classify_with_model(state, x_q, s));

    const OlpOutput* chosen = nullptr;
    for (const auto& o : outs) {
        if (o.label != y_true) continue;
        if (!chosen || o.proba[static_cast<std::size_t>(y_true)] >
                           chosen->proba[static_cast<std::size_t>(y_true)])
            chosen = &o;
    }
    if (!chosen) {
        for (const auto& o : outs) {
            double conf = std::max(o.proba[0], o.proba[1]);
            if (!chosen || conf > std::max(chosen->proba[0], chosen->proba[1])) chosen = &o;
        }
    }
    return *chosen;
}

nlohmann::json olp_state_to_json(const OlpState& state) {
    nlohmann::json j;
    j["version"] = 1;
    j["k_s"] = state.k_s;
    j["M"] = state.M;
    j["kdn"] = {{"k_h", state.kdn_table.k_h}, {"scores", state.kdn_table.scores}};
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < state.train.n_samples(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (double v : state.train.features.row(i)) row.push_back(v);
        rows.push_back(std::move(row));
    }
    j["train"] = {{"name", state.train.name},
                  {"feature_names", state.train.feature_names},
                  {"labels", state.train.labels},
                  {"features", std::move(rows)}};
    return j;
}

OlpState olp_state_from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != 1)
        throw ConfigError("unsupported OLP state version");
    OlpState st;
    st.k_s = j.at("k_s").get<int>();
    st.M = j.at("M").get<int>();
    st.kdn_table.k_h = j.at("kdn").at("k_h").get<int>();
    st.kdn_table.scores = j.at("kdn").at("scores").get<std::vector<double>>();
    const auto& tr = j.at("train");
    st.train.name = tr.at("name").get<std::string>();
    st.train.feature_names = tr.at("feature_names").get<std::vector<std::string>>();
    st.train.labels = tr.at("labels").get<std::vector<int>>();
    for (const auto& row : tr.at("features")) {
        auto vals = row.get<std::vector<double>>();
        st.train.features.push_row(vals);
    }
    return st;
}

} // namespace olprec
