#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "admitml/table.hpp"

namespace admitml {

// Profile thresholds for label-contradiction cleaning. Strong profiles
// labeled negative and weak profiles labeled positive are removed.
struct CleaningRule {
    std::string gre_column = "GRE";
    std::string cgpa_column = "CGPA";
    std::string label_column = "Admission_Status";
    double strong_gre_min = 320.0;
    double strong_cgpa_min = 9.5;
    double weak_gre_max = 300.0;
    double weak_cgpa_max = 8.0;

    void validate() const;  // gre_min > gre_max, cgpa_min > cgpa_max
};

struct CleaningLog {
    std::vector<std::int64_t> removed_row_ids;
    std::map<std::string, std::size_t> rule_hits;  // "strong_profile" / "weak_profile"
    std::size_t rows_before = 0;
    std::size_t rows_after = 0;

    std::string to_json_string() const;
};

// Concatenates tables, adding a categorical "context" column carrying each
// table's flag. Output columns are the union (first-appearance order); cells
// absent from a source table are Missing.
DataTable merge_outer(const std::vector<std::pair<DataTable, std::string>>& tables);

// Fills numeric Missings with the column mean and categorical Missings with
// the most frequent category (ties broken lexicographically).
DataTable impute(const DataTable& table);

struct DropResult {
    DataTable table;
    std::vector<std::string> dropped;
};

// Removes columns whose missing fraction strictly exceeds `threshold`.
// Columns named in `exempt` (label, sensitive attributes) are never dropped.
DropResult drop_high_missingness(const DataTable& table, double threshold = 0.30,
                                 const std::vector<std::string>& exempt = {});

struct CleaningResult {
    DataTable table;
    CleaningLog log;
};

// Removes rows whose label contradicts the profile rule:
//   strong: GRE >= strong_gre_min AND CGPA >= strong_cgpa_min AND label = 0
//   weak:   GRE <= weak_gre_max  AND CGPA <= weak_cgpa_max  AND label = 1
// The label column must be binary 0/1.
CleaningResult clean_anomalies(const DataTable& table, const CleaningRule& rule);

}  // namespace admitml
