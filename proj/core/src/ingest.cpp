#include "admitml/ingest.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace admitml {

void CleaningRule::validate() const {
    if (!(strong_gre_min > weak_gre_max))
        throw std::invalid_argument("CleaningRule: strong GRE threshold must exceed weak GRE threshold");
    if (!(strong_cgpa_min > weak_cgpa_max))
        throw std::invalid_argument("CleaningRule: strong CGPA threshold must exceed weak CGPA threshold");
}

std::string CleaningLog::to_json_string() const {
    nlohmann::json j;
    j["rows_before"] = rows_before;
    j["rows_after"] = rows_after;
    j["removed_row_ids"] = removed_row_ids;
    j["rule_hits"] = rule_hits;
    return j.dump(2);
}

DataTable merge_outer(const std::vector<std::pair<DataTable, std::string>>& tables) {
    if (tables.empty()) throw std::invalid_argument("merge_outer: need at least one table");

    std::set<std::string> flags;
    for (const auto& [table, flag] : tables) {
        (void)table;
        if (!flags.insert(flag).second)
            throw std::invalid_argument("merge_outer: duplicate context flag '" + flag + "'");
    }

    // Union of columns in first-appearance order; conflicting kinds are a
    // harmonization error.
    std::vector<Column> merged_columns;
    std::map<std::string, std::size_t> position;
    for (const auto& [table, flag] : tables) {
        (void)flag;
        for (const auto& col : table.columns()) {
            auto it = position.find(col.name);
            if (it == position.end()) {
                position[col.name] = merged_columns.size();
                merged_columns.push_back(col);
            } else if (merged_columns[it->second].kind != col.kind) {
                throw std::runtime_error("merge_outer: column '" + col.name +
                                         "' is numeric in one table and categorical in another");
            }
        }
    }
    if (position.count("context"))
        throw std::runtime_error("merge_outer: input already has a 'context' column");
    merged_columns.push_back({"context", ColumnKind::Categorical});

    std::vector<std::vector<Cell>> rows;
    for (const auto& [table, flag] : tables) {
        std::vector<std::size_t> source_of(merged_columns.size() - 1, static_cast<std::size_t>(-1));
        for (std::size_t c = 0; c < table.columns().size(); ++c)
            source_of[position.at(table.columns()[c].name)] = c;

        for (std::size_t r = 0; r < table.row_count(); ++r) {
            std::vector<Cell> row;
            row.reserve(merged_columns.size());
            for (std::size_t c = 0; c + 1 < merged_columns.size(); ++c) {
                if (source_of[c] == static_cast<std::size_t>(-1)) row.emplace_back();
                else row.push_back(table.at(r, source_of[c]));
            }
            row.emplace_back(flag);
            rows.push_back(std::move(row));
        }
    }

    return DataTable(std::move(merged_columns), std::move(rows));
}

DataTable impute(const DataTable& table) {
    std::vector<Cell> fills(table.column_count());
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        const Column& col = table.columns()[c];
        if (col.kind == ColumnKind::Numeric) {
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t r = 0; r < table.row_count(); ++r) {
                const Cell& cell = table.at(r, c);
                if (!cell.is_missing()) {
                    sum += cell.number();
                    ++n;
                }
            }
            if (n == 0)
                throw std::runtime_error("impute: column '" + col.name + "' has no observed values");
            fills[c] = Cell(sum / static_cast<double>(n));
        } else {
            std::map<std::string, std::size_t> counts;
            for (std::size_t r = 0; r < table.row_count(); ++r) {
                const Cell& cell = table.at(r, c);
                if (!cell.is_missing()) ++counts[cell.category()];
            }
            if (counts.empty())
                throw std::runtime_error("impute: column '" + col.name + "' has no observed values");
            // std::map iterates in lexicographic key order, so the first
            // maximal count is the lexicographically smallest mode.
            std::string mode;
            std::size_t best = 0;
            for (const auto& [category, count] : counts) {
                if (count > best) {
                    best = count;
                    mode = category;
                }
            }
            fills[c] = Cell(mode);
        }
    }

    std::vector<std::vector<Cell>> rows = table.rows();
    for (auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            if (row[c].is_missing()) row[c] = fills[c];

    return DataTable(table.columns(), std::move(rows), table.row_ids());
}

DropResult drop_high_missingness(const DataTable& table, double threshold,
                                 const std::vector<std::string>& exempt) {
    if (table.row_count() == 0) throw std::invalid_argument("drop_high_missingness: empty table");

    auto exempted = [&](const std::string& name) {
        return std::find(exempt.begin(), exempt.end(), name) != exempt.end();
    };

    std::vector<std::string> dropped;
    std::vector<Column> kept_columns;
    std::vector<std::size_t> kept_indices;
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        const Column& col = table.columns()[c];
        std::size_t missing = 0;
        for (std::size_t r = 0; r < table.row_count(); ++r)
            if (table.at(r, c).is_missing()) ++missing;
        const double fraction = static_cast<double>(missing) / static_cast<double>(table.row_count());
        if (fraction > threshold && !exempted(col.name)) {
            dropped.push_back(col.name);
        } else {
            kept_columns.push_back(col);
            kept_indices.push_back(c);
        }
    }

    std::vector<std::vector<Cell>> rows;
    rows.reserve(table.row_count());
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        std::vector<Cell> row;
        row.reserve(kept_indices.size());
        for (std::size_t c : kept_indices) row.push_back(table.at(r, c));
        rows.push_back(std::move(row));
    }

    return {DataTable(std::move(kept_columns), std::move(rows), table.row_ids()), std::move(dropped)};
}

CleaningResult clean_anomalies(const DataTable& table, const CleaningRule& rule) {
    rule.validate();
    for (const std::string* name : {&rule.gre_column, &rule.cgpa_column, &rule.label_column}) {
        if (!table.has_column(*name))
            throw std::invalid_argument("clean_anomalies: required column '" + *name +
                                        "' not found");
    }
    const std::size_t gre = table.column_index(rule.gre_column);
    const std::size_t cgpa = table.column_index(rule.cgpa_column);
    const std::size_t label = table.column_index(rule.label_column);

    CleaningLog log;
    log.rows_before = table.row_count();
    log.rule_hits["strong_profile"] = 0;
    log.rule_hits["weak_profile"] = 0;

    std::vector<std::size_t> kept;
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        const Cell& gre_cell = table.at(r, gre);
        const Cell& cgpa_cell = table.at(r, cgpa);
        const Cell& label_cell = table.at(r, label);
        if (gre_cell.is_missing() || cgpa_cell.is_missing() || label_cell.is_missing()) {
            const std::string& which = gre_cell.is_missing()    ? rule.gre_column
                                       : cgpa_cell.is_missing() ? rule.cgpa_column
                                                                : rule.label_column;
            throw std::runtime_error("clean_anomalies: missing value in column '" + which +
                                     "' at row " + std::to_string(r) + " (impute first)");
        }
        const double y = label_cell.number();
        if (y != 0.0 && y != 1.0)
            throw std::runtime_error("clean_anomalies: label column '" + rule.label_column +
                                     "' is not binary at row " + std::to_string(r));

        const double g = gre_cell.number();
        const double c = cgpa_cell.number();
        const bool strong_hit = g >= rule.strong_gre_min && c >= rule.strong_cgpa_min && y == 0.0;
        const bool weak_hit = g <= rule.weak_gre_max && c <= rule.weak_cgpa_max && y == 1.0;
        if (strong_hit || weak_hit) {
            log.removed_row_ids.push_back(table.row_ids()[r]);
            if (strong_hit) ++log.rule_hits["strong_profile"];
            if (weak_hit) ++log.rule_hits["weak_profile"];
        } else {
            kept.push_back(r);
        }
    }

    DataTable cleaned = table.take_rows(kept);
    log.rows_after = cleaned.row_count();
    return {std::move(cleaned), std::move(log)};
}

}  // namespace admitml
