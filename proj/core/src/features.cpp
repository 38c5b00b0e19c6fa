#include "admitml/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace admitml {

void FeatureMatrix::validate() const {
    if (values.cols() != feature_names.size())
        throw std::invalid_argument("FeatureMatrix: width does not match feature name count");
    if (values.rows() != labels.size())
        throw std::invalid_argument("FeatureMatrix: height does not match label count");
    for (int y : labels)
        if (y != 0 && y != 1) throw std::invalid_argument("FeatureMatrix: labels must be 0/1");
    for (const auto& [name, groups] : sensitive)
        if (groups.size() != values.rows())
            throw std::invalid_argument("FeatureMatrix: sensitive column '" + name + "' length mismatch");
}

FeatureMatrix FeatureMatrix::take_rows(const std::vector<std::size_t>& indices) const {
    FeatureMatrix out;
    out.values = values.take_rows(indices);
    out.feature_names = feature_names;
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) out.labels.push_back(labels[i]);
    for (const auto& [name, groups] : sensitive) {
        std::vector<std::string> subset;
        subset.reserve(indices.size());
        for (std::size_t i : indices) subset.push_back(groups[i]);
        out.sensitive[name] = std::move(subset);
    }
    return out;
}

std::vector<int> binarize_label(const std::vector<double>& probabilities, double threshold) {
    std::vector<int> labels;
    labels.reserve(probabilities.size());
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double p = probabilities[i];
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("binarize_label: value " + std::to_string(p) + " at row " +
                                     std::to_string(i) + " is outside [0,1]");
        labels.push_back(p >= threshold ? 1 : 0);
    }
    return labels;
}

double composite_performance(double math, double reading, double writing) {
    for (double s : {math, reading, writing}) {
        if (std::isnan(s)) throw std::invalid_argument("composite_performance: missing score");
        if (s < 0.0) throw std::invalid_argument("composite_performance: scores must be non-negative");
    }
    return (math + reading + writing) / 3.0;
}

OneHotEncoder OneHotEncoder::fit(const DataTable& table, const std::string& column) {
    const std::size_t idx = table.column_index(column);
    if (table.columns()[idx].kind != ColumnKind::Categorical)
        throw std::invalid_argument("OneHotEncoder: column '" + column + "' is not categorical");

    std::set<std::string> seen;
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        const Cell& cell = table.at(r, idx);
        if (cell.is_missing())
            throw std::runtime_error("OneHotEncoder: column '" + column +
                                     "' has missing values (impute first)");
        seen.insert(cell.category());
    }

    OneHotEncoder enc;
    enc.column_ = column;
    enc.categories_.assign(seen.begin(), seen.end());  // std::set: lexicographic
    return enc;
}

OneHotEncoder OneHotEncoder::from_parts(std::string column, std::vector<std::string> categories) {
    OneHotEncoder enc;
    enc.column_ = std::move(column);
    enc.categories_ = std::move(categories);
    return enc;
}

std::vector<double> OneHotEncoder::transform_value(const std::string& category) const {
    std::vector<double> out(categories_.size(), 0.0);
    const auto it = std::lower_bound(categories_.begin(), categories_.end(), category);
    if (it != categories_.end() && *it == category)
        out[static_cast<std::size_t>(it - categories_.begin())] = 1.0;
    return out;  // unseen category: all zeros
}

std::vector<std::string> OneHotEncoder::feature_names() const {
    std::vector<std::string> names;
    names.reserve(categories_.size());
    for (const auto& c : categories_) names.push_back(column_ + "=" + c);
    return names;
}

Scaler fit_scaler(const Matrix& values) {
    Scaler s;
    s.means.resize(values.cols());
    s.stddevs.resize(values.cols());
    if (values.rows() == 0) throw std::invalid_argument("fit_scaler: no rows");
    const double n = static_cast<double>(values.rows());
    for (std::size_t c = 0; c < values.cols(); ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < values.rows(); ++r) sum += values(r, c);
        const double mean = sum / n;
        double ss = 0.0;
        for (std::size_t r = 0; r < values.rows(); ++r) {
            const double d = values(r, c) - mean;
            ss += d * d;
        }
        s.means[c] = mean;
        s.stddevs[c] = std::sqrt(ss / n);  // population formula
    }
    return s;
}

Matrix apply_scaler(const Scaler& scaler, const Matrix& values) {
    if (scaler.width() != values.cols())
        throw std::invalid_argument("apply_scaler: scaler width " + std::to_string(scaler.width()) +
                                    " does not match matrix width " + std::to_string(values.cols()));
    Matrix out(values.rows(), values.cols());
    for (std::size_t c = 0; c < values.cols(); ++c) {
        const double sd = scaler.stddevs[c];
        for (std::size_t r = 0; r < values.rows(); ++r)
            out(r, c) = sd == 0.0 ? 0.0 : (values(r, c) - scaler.means[c]) / sd;
    }
    return out;
}

Matrix correlation_matrix(const Matrix& values) {
    if (values.rows() < 2) throw std::invalid_argument("correlation_matrix: need at least 2 rows");
    const std::size_t p = values.cols();
    const double n = static_cast<double>(values.rows());

    std::vector<double> mean(p, 0.0);
    for (std::size_t c = 0; c < p; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < values.rows(); ++r) sum += values(r, c);
        mean[c] = sum / n;
    }
    std::vector<double> sd(p, 0.0);
    for (std::size_t c = 0; c < p; ++c) {
        double ss = 0.0;
        for (std::size_t r = 0; r < values.rows(); ++r) {
            const double d = values(r, c) - mean[c];
            ss += d * d;
        }
        sd[c] = std::sqrt(ss / n);
    }

    Matrix corr(p, p, 0.0);
    for (std::size_t a = 0; a < p; ++a) {
        corr(a, a) = 1.0;
        for (std::size_t b = a + 1; b < p; ++b) {
            double value = 0.0;
            if (sd[a] != 0.0 && sd[b] != 0.0) {
                double cov = 0.0;
                for (std::size_t r = 0; r < values.rows(); ++r)
                    cov += (values(r, a) - mean[a]) * (values(r, b) - mean[b]);
                cov /= n;
                value = std::clamp(cov / (sd[a] * sd[b]), -1.0, 1.0);
            }
            corr(a, b) = value;
            corr(b, a) = value;
        }
    }
    return corr;
}

std::vector<std::string> sensitive_groups(const DataTable& table, const SensitiveSpec& spec) {
    const std::size_t idx = table.column_index(spec.column);
    if (table.columns()[idx].kind != ColumnKind::Categorical)
        throw std::invalid_argument("sensitive attribute '" + spec.column + "' must be categorical");
    std::vector<std::string> groups;
    groups.reserve(table.row_count());
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        const Cell& cell = table.at(r, idx);
        if (cell.is_missing())
            throw std::runtime_error("sensitive attribute '" + spec.column +
                                     "' has missing values (impute first)");
        const std::string& raw = cell.category();
        if (auto it = spec.group_of.find(raw); it != spec.group_of.end()) {
            groups.push_back(it->second);
        } else if (spec.default_group) {
            groups.push_back(*spec.default_group);
        } else {
            groups.push_back(raw);
        }
    }
    return groups;
}

namespace {

std::vector<std::string> feature_columns(const DataTable& table, const FeatureSpec& spec) {
    std::set<std::string> excluded(spec.exclude_columns.begin(), spec.exclude_columns.end());
    excluded.insert(spec.label_column);
    if (!spec.include_sensitive_features)
        for (const auto& s : spec.sensitive) excluded.insert(s.column);

    std::vector<std::string> names;
    for (const auto& col : table.columns())
        if (!excluded.count(col.name)) names.push_back(col.name);
    return names;
}

FeatureMatrix assemble(const DataTable& table, const FeatureSpec& spec,
                       const FeatureLayout& layout) {
    const auto& columns = layout.source_columns;
    auto encoder_for = [&](const std::string& column) -> const OneHotEncoder& {
        for (const auto& enc : layout.encoders)
            if (enc.column() == column) return enc;
        throw std::logic_error("apply_feature_build: no encoder for column '" + column + "'");
    };

    // The layout, not the incoming table, decides how each column is encoded;
    // the table only has to agree on presence and kind.
    FeatureMatrix out;
    std::vector<std::size_t> column_idx;
    std::vector<bool> encoded;
    for (const auto& name : columns) {
        const auto found = table.find_column(name);
        if (!found)
            throw std::invalid_argument("feature build: table lacks feature column '" + name +
                                        "'");
        const bool wants_encoder =
            std::any_of(layout.encoders.begin(), layout.encoders.end(),
                        [&](const OneHotEncoder& e) { return e.column() == name; });
        const ColumnKind kind = table.columns()[*found].kind;
        if (wants_encoder && kind != ColumnKind::Categorical)
            throw std::invalid_argument("feature build: column '" + name +
                                        "' was categorical at fit time but is numeric here");
        if (!wants_encoder && kind != ColumnKind::Numeric)
            throw std::invalid_argument("feature build: column '" + name +
                                        "' was numeric at fit time but is categorical here");
        column_idx.push_back(*found);
        encoded.push_back(wants_encoder);
        if (wants_encoder) {
            const auto names = encoder_for(name).feature_names();
            out.feature_names.insert(out.feature_names.end(), names.begin(), names.end());
        } else {
            out.feature_names.push_back(name);
        }
    }

    out.values = Matrix(table.row_count(), out.feature_names.size());
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        std::size_t c_out = 0;
        for (std::size_t k = 0; k < columns.size(); ++k) {
            const Cell& cell = table.at(r, column_idx[k]);
            if (cell.is_missing())
                throw std::runtime_error("feature build: column '" + columns[k] +
                                         "' has missing values (impute first)");
            if (encoded[k]) {
                const auto block = encoder_for(columns[k]).transform_value(cell.category());
                for (double v : block) out.values(r, c_out++) = v;
            } else {
                out.values(r, c_out++) = cell.number();
            }
        }
    }

    const std::size_t label_idx = table.column_index(spec.label_column);
    if (table.columns()[label_idx].kind != ColumnKind::Numeric)
        throw std::invalid_argument("build_features: label column '" + spec.label_column +
                                    "' must be numeric");
    std::vector<double> label_values;
    label_values.reserve(table.row_count());
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        const Cell& cell = table.at(r, label_idx);
        if (cell.is_missing())
            throw std::runtime_error("build_features: label column has a missing value at row " +
                                     std::to_string(r));
        label_values.push_back(cell.number());
    }
    out.labels = binarize_label(label_values, spec.label_threshold);

    for (const auto& s : spec.sensitive) out.sensitive[s.column] = sensitive_groups(table, s);

    out.validate();
    return out;
}

}  // namespace

FeatureBuild build_features(const DataTable& table, const FeatureSpec& spec) {
    FeatureLayout layout;
    layout.source_columns = feature_columns(table, spec);
    for (const auto& name : layout.source_columns) {
        const std::size_t idx = table.column_index(name);
        if (table.columns()[idx].kind == ColumnKind::Categorical)
            layout.encoders.push_back(OneHotEncoder::fit(table, name));
    }
    FeatureMatrix matrix = assemble(table, spec, layout);
    return {std::move(matrix), std::move(layout)};
}

FeatureMatrix apply_feature_build(const DataTable& table, const FeatureSpec& spec,
                                  const FeatureLayout& layout) {
    return assemble(table, spec, layout);
}

}  // namespace admitml
