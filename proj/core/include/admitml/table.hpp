#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace admitml {

enum class ColumnKind { Numeric, Categorical };

std::string to_string(ColumnKind kind);

// One table cell: a number, a category label, or missing.
struct Cell {
    struct Missing {
        bool operator==(const Missing&) const = default;
    };
    std::variant<Missing, double, std::string> value;

    Cell() : value(Missing{}) {}
    explicit Cell(double v) : value(v) {}
    explicit Cell(std::string v) : value(std::move(v)) {}

    static Cell missing() { return Cell(); }

    bool is_missing() const { return std::holds_alternative<Missing>(value); }
    bool is_number() const { return std::holds_alternative<double>(value); }
    bool is_category() const { return std::holds_alternative<std::string>(value); }

    double number() const;
    const std::string& category() const;

    bool operator==(const Cell&) const = default;
};

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;

    bool operator==(const Column&) const = default;
};

// Named, typed columns over rows of cells; the pipeline's pre-feature
// representation. Row ids are stable identifiers assigned at construction and
// preserved by filtering operations, so cleaning logs can reference rows.
class DataTable {
public:
    DataTable() = default;
    DataTable(std::vector<Column> columns, std::vector<std::vector<Cell>> rows);
    DataTable(std::vector<Column> columns, std::vector<std::vector<Cell>> rows,
              std::vector<std::int64_t> row_ids);

    const std::vector<Column>& columns() const { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }
    const std::vector<std::int64_t>& row_ids() const { return row_ids_; }

    std::size_t row_count() const { return rows_.size(); }
    std::size_t column_count() const { return columns_.size(); }

    std::optional<std::size_t> find_column(const std::string& name) const;
    std::size_t column_index(const std::string& name) const;  // throws if absent
    bool has_column(const std::string& name) const { return find_column(name).has_value(); }

    const Cell& at(std::size_t row, std::size_t col) const { return rows_[row][col]; }
    Cell& at(std::size_t row, std::size_t col) { return rows_[row][col]; }

    void set(std::size_t row, std::size_t col, Cell cell);

    // Appends a column; `cells` must have one entry per row.
    void add_column(Column column, std::vector<Cell> cells);
    void drop_column(std::size_t col);
    void rename_column(const std::string& from, const std::string& to);

    // Keeps rows in the given order; row ids travel with their rows.
    DataTable take_rows(const std::vector<std::size_t>& indices) const;

    bool operator==(const DataTable& o) const {
        return columns_ == o.columns_ && rows_ == o.rows_ && row_ids_ == o.row_ids_;
    }

private:
    void validate() const;

    std::vector<Column> columns_;
    std::vector<std::vector<Cell>> rows_;
    std::vector<std::int64_t> row_ids_;
};

struct CsvOptions {
    // Field values treated as missing (compared after trimming).
    std::vector<std::string> missing_markers = {"", "NA"};
};

// Parses RFC-4180 CSV with a header row. Columns are numeric when every
// non-missing cell parses as a number, unless `declared_schema` pins a kind.
DataTable parse_csv(std::istream& source,
                    const std::map<std::string, ColumnKind>& declared_schema = {},
                    const CsvOptions& options = {});

DataTable parse_csv_file(const std::string& path,
                         const std::map<std::string, ColumnKind>& declared_schema = {},
                         const CsvOptions& options = {});

// Writes RFC-4180 CSV; missing cells become empty fields, numbers use the
// shortest representation that round-trips exactly.
void serialize_csv(const DataTable& table, std::ostream& out);
std::string serialize_csv(const DataTable& table);
void write_csv_file(const DataTable& table, const std::string& path);

// Schema map of an existing table, usable as `declared_schema` on re-parse.
std::map<std::string, ColumnKind> schema_of(const DataTable& table);

}  // namespace admitml
