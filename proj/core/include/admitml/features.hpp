#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "admitml/matrix.hpp"
#include "admitml/table.hpp"

namespace admitml {

// Dense numeric features with the label vector and the raw sensitive-group
// assignments retained for fairness auditing. Values are unscaled; Z-scoring
// is fit per training split to avoid leakage.
struct FeatureMatrix {
    Matrix values;
    std::vector<std::string> feature_names;
    std::vector<int> labels;  // 0/1
    std::map<std::string, std::vector<std::string>> sensitive;

    std::size_t row_count() const { return values.rows(); }
    void validate() const;
    FeatureMatrix take_rows(const std::vector<std::size_t>& indices) const;
};

// label = 1 iff probability >= threshold.
std::vector<int> binarize_label(const std::vector<double>& probabilities, double threshold = 0.5);

// Arithmetic mean of the three section scores.
double composite_performance(double math, double reading, double writing);

// Per-column one-hot expansion. Categories are learned at fit time (sorted
// lexicographically); unseen categories at transform time map to all-zeros.
class OneHotEncoder {
public:
    OneHotEncoder() = default;

    // Learns categories of `column` from the table.
    static OneHotEncoder fit(const DataTable& table, const std::string& column);

    const std::string& column() const { return column_; }
    const std::vector<std::string>& categories() const { return categories_; }

    // One 0/1 entry per category for a single cell value.
    std::vector<double> transform_value(const std::string& category) const;

    // Output column names, "column=category".
    std::vector<std::string> feature_names() const;

    static OneHotEncoder from_parts(std::string column, std::vector<std::string> categories);

private:
    std::string column_;
    std::vector<std::string> categories_;
};

// Per-feature standardization parameters (population stddev). Zero-variance
// features transform to 0 everywhere.
struct Scaler {
    std::vector<double> means;
    std::vector<double> stddevs;

    std::size_t width() const { return means.size(); }
};

Scaler fit_scaler(const Matrix& values);
Matrix apply_scaler(const Scaler& scaler, const Matrix& values);

// Pearson correlations; pairs involving a zero-variance column are 0, the
// diagonal is 1. Requires >= 2 rows.
Matrix correlation_matrix(const Matrix& values);

// Sensitive-attribute extraction config: raw categories can be coarsened into
// groups (e.g. parental education into high/low). Unmapped categories fall
// back to `default_group` when set, otherwise stay as themselves.
struct SensitiveSpec {
    std::string column;
    std::map<std::string, std::string> group_of;
    std::optional<std::string> default_group;
};

// Per-row group assignment for one sensitive attribute: mapped category,
// else `default_group`, else the raw category itself.
std::vector<std::string> sensitive_groups(const DataTable& table, const SensitiveSpec& spec);

// DataTable -> FeatureMatrix assembly.
struct FeatureSpec {
    std::string label_column;           // binary 0/1 or probability column
    double label_threshold = 0.5;
    std::vector<std::string> exclude_columns;  // never become features
    std::vector<SensitiveSpec> sensitive;
    bool include_sensitive_features = true;
};

// The reusable half of a feature build: which source columns fed the matrix,
// in order, and the encoder fit for each categorical one.
struct FeatureLayout {
    std::vector<std::string> source_columns;
    std::vector<OneHotEncoder> encoders;
};

struct FeatureBuild {
    FeatureMatrix matrix;
    FeatureLayout layout;
};

// Expands categoricals via one-hot, copies numerics, binarizes the label and
// captures sensitive groups. The label column (and exclusions) never enter
// the feature set.
FeatureBuild build_features(const DataTable& table, const FeatureSpec& spec);

// Re-applies a previous build's layout to a new table (unseen categories
// become all-zero blocks). Errors when the table lacks one of the layout's
// columns or disagrees on its kind.
FeatureMatrix apply_feature_build(const DataTable& table, const FeatureSpec& spec,
                                  const FeatureLayout& layout);

}  // namespace admitml
