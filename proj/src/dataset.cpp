#include "olprec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <random>
#include <sstream>

#include "olprec/errors.hpp"
#include "olprec/util.hpp"

namespace olprec {

namespace {

struct Attribute {
    std::string name;
    bool categorical = false;
};

bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    std::string buf(s);
    char* end = nullptr;
    out = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size();
}

} // namespace

Dataset parse_keel(const std::string& text, const std::string& name_hint) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;

    std::string relation = name_hint;
    std::vector<Attribute> attrs;
    std::vector<std::string> output_names;
    bool in_data = false;

    std::vector<std::vector<double>> feature_rows;
    std::vector<std::string> raw_labels;
    std::size_t label_col = 0;

    auto finish_header = [&] {
        if (attrs.size() < 2)
            throw ParseError("need at least one feature attribute and a class attribute", lineno);
        label_col = attrs.size() - 1;
        if (!output_names.empty()) {
            if (output_names.size() != 1)
                throw ParseError("exactly one output attribute expected", lineno);
            auto it = std::find_if(attrs.begin(), attrs.end(), [&](const Attribute& a) {
                return a.name == output_names.front();
            });
            if (it == attrs.end())
                throw ParseError("@outputs names unknown attribute '" + output_names.front() + "'", lineno);
            label_col = static_cast<std::size_t>(it - attrs.begin());
        }
        for (std::size_t j = 0; j < attrs.size(); ++j) {
            if (j != label_col && attrs[j].categorical)
                throw ParseError("categorical feature attribute '" + attrs[j].name + "' not supported");
        }
    };

    while (std::getline(in, line)) {
        ++lineno;
        auto stripped = trim(line);
        if (stripped.empty() || stripped.front() == '%') continue;

        if (!in_data && stripped.front() == '@') {
            auto sp = stripped.find_first_of(" \t");
            std::string keyword = lower(stripped.substr(0, sp));
            std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(stripped.substr(sp));

            if (keyword == "@relation") {
                relation = std::string(rest);
            } else if (keyword == "@attribute") {
                auto name_end = rest.find_first_of(" \t{");
                if (name_end == std::string_view::npos)
                    throw ParseError("attribute without a type", lineno);
                Attribute a;
                a.name = std::string(trim(rest.substr(0, name_end)));
                auto type = trim(rest.substr(name_end));
                if (type.empty())
                    throw ParseError("attribute without a type", lineno);
                if (type.front() == '{') {
                    a.categorical = true;
                } else {
                    std::string t = lower(std::string(type.substr(0, type.find_first_of(" \t["))));
                    if (t != "real" && t != "integer" && t != "numeric")
                        throw ParseError("unsupported attribute type '" + t + "'", lineno);
                }
                attrs.push_back(std::move(a));
            } else if (keyword == "@inputs") {
                // informational; feature set is all non-output attributes
            } else if (keyword == "@outputs" || keyword == "@output") {
                for (auto& tok : split(rest, ','))
                    if (!tok.empty()) output_names.push_back(tok);
            } else if (keyword == "@data") {
                finish_header();
                in_data = true;
            } else {
                throw ParseError("unknown header keyword '" + keyword + "'", lineno);
            }
            continue;
        }

        if (!in_data)
            throw ParseError("data row before @data section", lineno);

        auto cells = split(stripped, ',');
        if (cells.size() != attrs.size())
            throw ParseError("expected " + std::to_string(attrs.size()) + " values, got " +
                                 std::to_string(cells.size()),
                             lineno);
        std::vector<double> row;
        row.reserve(attrs.size() - 1);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (j == label_col) {
                raw_labels.push_back(cells[j]);
                continue;
            }
            double v;
            if (!parse_double(cells[j], v))
                throw ParseError("non-numeric feature value '" + cells[j] + "'", lineno);
            if (!std::isfinite(v))
                throw ParseError("non-finite feature value '" + cells[j] + "'", lineno);
            row.push_back(v);
        }
        feature_rows.push_back(std::move(row));
    }

    if (!in_data)
        throw ParseError("missing @data section");
    if (feature_rows.empty())
        throw DegenerateDataset("dataset '" + relation + "' has no data rows");
    if (feature_rows.size() < 2)
        throw DegenerateDataset("dataset '" + relation + "' has fewer than 2 samples");

    // Distinct class values in first-occurrence order.
    std::vector<std::string> class_values;
    for (auto& l : raw_labels)
        if (std::find(class_values.begin(), class_values.end(), l) == class_values.end())
            class_values.push_back(l);
    if (class_values.size() == 1)
        throw DegenerateDataset("dataset '" + relation + "' contains a single class");
    if (class_values.size() > 2)
        throw DegenerateDataset("dataset '" + relation + "' has " +
                                std::to_string(class_values.size()) + " classes; two expected");

    std::size_t count0 = 0;
    for (auto& l : raw_labels) count0 += (l == class_values[0]);
    std::size_t count1 = raw_labels.size() - count0;

    // Minority becomes class 1. On a tie, prefer the value literally named
    // "positive", else the later-first-occurrence value.
    std::string positive_value;
    if (count0 < count1) {
        positive_value = class_values[0];
    } else if (count1 < count0) {
        positive_value = class_values[1];
    } else {
        positive_value = class_values[1];
        if (lower(class_values[0]) == "positive") positive_value = class_values[0];
    }

    Dataset ds;
    ds.name = relation;
    ds.features = Matrix::from_rows(feature_rows);
    ds.labels.reserve(raw_labels.size());
    for (auto& l : raw_labels) ds.labels.push_back(l == positive_value ? 1 : 0);
    for (std::size_t j = 0; j < attrs.size(); ++j)
        if (j != label_col) ds.feature_names.push_back(attrs[j].name);
    return ds;
}

std::string emit_keel(const Dataset& ds) {
    std::ostringstream out;
    out << "@relation " << (ds.name.empty() ? "unnamed" : ds.name) << "\n";
    for (std::size_t j = 0; j < ds.n_features(); ++j) {
        double lo = 0.0, hi = 0.0;
        if (ds.n_samples() > 0) {
            lo = hi = ds.features(0, j);
            for (std::size_t i = 1; i < ds.n_samples(); ++i) {
                lo = std::min(lo, ds.features(i, j));
                hi = std::max(hi, ds.features(i, j));
            }
        }
        std::string name = j < ds.feature_names.size() ? ds.feature_names[j]
                                                       : "f" + std::to_string(j);
        out << "@attribute " << name << " real [" << format_double(lo) << ", "
            << format_double(hi) << "]\n";
    }
    out << "@attribute class {negative, positive}\n";
    out << "@data\n";
    for (std::size_t i = 0; i < ds.n_samples(); ++i) {
        for (std::size_t j = 0; j < ds.n_features(); ++j)
            out << format_double(ds.features(i, j)) << ", ";
        out << (ds.labels[i] == 1 ? "positive" : "negative") << "\n";
    }
    return out.str();
}

std::vector<FoldSplit> stratified_kfold(const Dataset& ds, int k, std::uint64_t seed) {
    if (k < 2)
        throw StratificationError("k must be >= 2, got " + std::to_string(k));
    std::vector<std::vector<std::size_t>> by_class(2);
    for (std::size_t i = 0; i < ds.n_samples(); ++i)
        by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
    for (int c = 0; c < 2; ++c)
        if (by_class[static_cast<std::size_t>(c)].size() < static_cast<std::size_t>(k))
            throw StratificationError("class " + std::to_string(c) + " of '" + ds.name + "' has " +
                                      std::to_string(by_class[static_cast<std::size_t>(c)].size()) +
                                      " samples, fewer than k=" + std::to_string(k));

    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> test_sets(static_cast<std::size_t>(k));
    for (auto& cls : by_class) {
        std::shuffle(cls.begin(), cls.end(), rng);
        std::size_t n = cls.size(), q = n / static_cast<std::size_t>(k),
                    r = n % static_cast<std::size_t>(k);
        std::size_t pos = 0;
        for (std::size_t f = 0; f < static_cast<std::size_t>(k); ++f) {
            std::size_t take = q + (f < r ? 1 : 0);
            for (std::size_t t = 0; t < take; ++t) test_sets[f].push_back(cls[pos++]);
        }
    }

    std::vector<FoldSplit> folds;
    folds.reserve(static_cast<std::size_t>(k));
    std::vector<char> in_test(ds.n_samples());
    for (int f = 0; f < k; ++f) {
        FoldSplit fs;
        fs.fold_id = f;
        fs.test_indices = test_sets[static_cast<std::size_t>(f)];
        std::sort(fs.test_indices.begin(), fs.test_indices.end());
        std::fill(in_test.begin(), in_test.end(), 0);
        for (auto i : fs.test_indices) in_test[i] = 1;
        for (std::size_t i = 0; i < ds.n_samples(); ++i)
            if (!in_test[i]) fs.train_indices.push_back(i);
        folds.push_back(std::move(fs));
    }
    return folds;
}

Scaler scaler_fit(const Matrix& train) {
    Scaler s;
    s.min.assign(train.cols(), 0.0);
    s.max.assign(train.cols(), 0.0);
    for (std::size_t j = 0; j < train.cols(); ++j) {
        double lo = train(0, j), hi = train(0, j);
        for (std::size_t i = 1; i < train.rows(); ++i) {
            lo = std::min(lo, train(i, j));
            hi = std::max(hi, train(i, j));
        }
        s.min[j] = lo;
        s.max[j] = hi;
    }
    return s;
}

std::vector<double> scaler_apply_row(const Scaler& s, std::span<const double> row) {
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        double range = s.max[j] - s.min[j];
        double v = range > 0.0 ? (row[j] - s.min[j]) / range : 0.0;
        out[j] = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

Matrix scaler_apply(const Scaler& s, const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto r = scaler_apply_row(s, x.row(i));
        std::copy(r.begin(), r.end(), out.row(i).begin());
    }
    return out;
}

} // namespace olprec
