#include "admitml/table.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace admitml {

std::string to_string(ColumnKind kind) {
    return kind == ColumnKind::Numeric ? "numeric" : "categorical";
}

double Cell::number() const {
    if (!is_number()) throw std::logic_error("Cell::number: cell is not numeric");
    return std::get<double>(value);
}

const std::string& Cell::category() const {
    if (!is_category()) throw std::logic_error("Cell::category: cell is not categorical");
    return std::get<std::string>(value);
}

DataTable::DataTable(std::vector<Column> columns, std::vector<std::vector<Cell>> rows)
    : columns_(std::move(columns)), rows_(std::move(rows)) {
    row_ids_.resize(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) row_ids_[i] = static_cast<std::int64_t>(i);
    validate();
}

DataTable::DataTable(std::vector<Column> columns, std::vector<std::vector<Cell>> rows,
                     std::vector<std::int64_t> row_ids)
    : columns_(std::move(columns)), rows_(std::move(rows)), row_ids_(std::move(row_ids)) {
    validate();
}

void DataTable::validate() const {
    if (row_ids_.size() != rows_.size())
        throw std::invalid_argument("DataTable: row id count does not match row count");
    std::set<std::int64_t> seen;
    for (auto id : row_ids_) {
        if (!seen.insert(id).second)
            throw std::invalid_argument("DataTable: duplicate row id " + std::to_string(id));
    }
    std::set<std::string> names;
    for (const auto& col : columns_) {
        if (!names.insert(col.name).second)
            throw std::invalid_argument("DataTable: duplicate column name '" + col.name + "'");
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (rows_[r].size() != columns_.size())
            throw std::invalid_argument("DataTable: row " + std::to_string(r) + " has " +
                                        std::to_string(rows_[r].size()) + " cells, expected " +
                                        std::to_string(columns_.size()));
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            const Cell& cell = rows_[r][c];
            if (cell.is_missing()) continue;
            const bool ok = columns_[c].kind == ColumnKind::Numeric ? cell.is_number() : cell.is_category();
            if (!ok)
                throw std::invalid_argument("DataTable: cell kind mismatch in column '" +
                                            columns_[c].name + "', row " + std::to_string(r));
        }
    }
}

std::optional<std::size_t> DataTable::find_column(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i].name == name) return i;
    return std::nullopt;
}

std::size_t DataTable::column_index(const std::string& name) const {
    auto idx = find_column(name);
    if (!idx) throw std::invalid_argument("DataTable: no column named '" + name + "'");
    return *idx;
}

void DataTable::set(std::size_t row, std::size_t col, Cell cell) {
    if (!cell.is_missing()) {
        const bool ok = columns_[col].kind == ColumnKind::Numeric ? cell.is_number() : cell.is_category();
        if (!ok)
            throw std::invalid_argument("DataTable::set: cell kind mismatch in column '" +
                                        columns_[col].name + "'");
    }
    rows_[row][col] = std::move(cell);
}

void DataTable::add_column(Column column, std::vector<Cell> cells) {
    if (cells.size() != rows_.size())
        throw std::invalid_argument("DataTable::add_column: expected " + std::to_string(rows_.size()) +
                                    " cells, got " + std::to_string(cells.size()));
    if (has_column(column.name))
        throw std::invalid_argument("DataTable::add_column: column '" + column.name + "' already exists");
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        const Cell& cell = cells[r];
        if (!cell.is_missing()) {
            const bool ok = column.kind == ColumnKind::Numeric ? cell.is_number() : cell.is_category();
            if (!ok)
                throw std::invalid_argument("DataTable::add_column: cell kind mismatch at row " +
                                            std::to_string(r));
        }
        rows_[r].push_back(std::move(cells[r]));
    }
    columns_.push_back(std::move(column));
}

void DataTable::drop_column(std::size_t col) {
    if (col >= columns_.size()) throw std::out_of_range("DataTable::drop_column: index out of range");
    columns_.erase(columns_.begin() + static_cast<std::ptrdiff_t>(col));
    for (auto& row : rows_) row.erase(row.begin() + static_cast<std::ptrdiff_t>(col));
}

void DataTable::rename_column(const std::string& from, const std::string& to) {
    const std::size_t idx = column_index(from);
    if (from != to && has_column(to))
        throw std::invalid_argument("DataTable::rename_column: column '" + to + "' already exists");
    columns_[idx].name = to;
}

DataTable DataTable::take_rows(const std::vector<std::size_t>& indices) const {
    std::vector<std::vector<Cell>> rows;
    std::vector<std::int64_t> ids;
    rows.reserve(indices.size());
    ids.reserve(indices.size());
    for (std::size_t i : indices) {
        rows.push_back(rows_[i]);
        ids.push_back(row_ids_[i]);
    }
    return DataTable(columns_, std::move(rows), std::move(ids));
}

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && (s[begin] == ' ' || s[begin] == '\t' || s[begin] == '\r')) ++begin;
    while (end > begin && (s[end - 1] == ' ' || s[end - 1] == '\t' || s[end - 1] == '\r')) --end;
    return s.substr(begin, end - begin);
}

bool parse_number(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

// One RFC-4180 record; quoted fields may contain commas, quotes, newlines.
// Returns false on clean EOF before any character of a new record.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;

    int ci;
    while ((ci = in.get()) != EOF) {
        any = true;
        const char c = static_cast<char>(ci);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line_no;
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c == '\n') {
            ++line_no;
            if (!field.empty() && field.back() == '\r') field.pop_back();
            fields.push_back(field);
            return true;
        } else {
            field.push_back(c);
        }
    }
    if (!any) return false;
    if (in_quotes) throw std::runtime_error("parse_csv: unterminated quoted field at end of input");
    if (!field.empty() && field.back() == '\r') field.pop_back();
    fields.push_back(field);
    return true;
}

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n\r") != std::string::npos;
}

void write_field(std::ostream& out, const std::string& s) {
    if (!needs_quoting(s)) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << "\"\"";
        else out << c;
    }
    out << '"';
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("serialize_csv: number formatting failed");
    return std::string(buf, ptr);
}

}  // namespace

DataTable parse_csv(std::istream& source, const std::map<std::string, ColumnKind>& declared_schema,
                    const CsvOptions& options) {
    auto is_missing_marker = [&](const std::string& raw) {
        const std::string t = trim(raw);
        return std::find(options.missing_markers.begin(), options.missing_markers.end(), t) !=
               options.missing_markers.end();
    };

    std::vector<std::string> fields;
    std::size_t line_no = 1;
    if (!read_record(source, fields, line_no)) throw std::runtime_error("parse_csv: empty input");

    std::vector<std::string> header;
    header.reserve(fields.size());
    for (const auto& f : fields) header.push_back(trim(f));

    std::set<std::string> seen;
    for (const auto& name : header) {
        if (!seen.insert(name).second)
            throw std::runtime_error("parse_csv: duplicate column name '" + name + "'");
    }

    const std::size_t width = header.size();
    std::vector<std::vector<std::string>> raw_rows;
    std::size_t record_no = 1;
    while (read_record(source, fields, line_no)) {
        ++record_no;
        if (fields.size() != width)
            throw std::runtime_error("parse_csv: row " + std::to_string(record_no - 1) + " has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(width));
        raw_rows.push_back(fields);
    }

    // Kind per column: declared override, else numeric iff all non-missing
    // cells parse as numbers (columns with no observed value default numeric).
    std::vector<ColumnKind> kinds(width, ColumnKind::Numeric);
    for (std::size_t c = 0; c < width; ++c) {
        if (auto it = declared_schema.find(header[c]); it != declared_schema.end()) {
            kinds[c] = it->second;
            continue;
        }
        for (const auto& row : raw_rows) {
            if (is_missing_marker(row[c])) continue;
            double v;
            if (!parse_number(row[c], v)) {
                kinds[c] = ColumnKind::Categorical;
                break;
            }
        }
    }

    std::vector<Column> columns;
    columns.reserve(width);
    for (std::size_t c = 0; c < width; ++c) columns.push_back({header[c], kinds[c]});

    std::vector<std::vector<Cell>> rows;
    rows.reserve(raw_rows.size());
    for (std::size_t r = 0; r < raw_rows.size(); ++r) {
        std::vector<Cell> row;
        row.reserve(width);
        for (std::size_t c = 0; c < width; ++c) {
            const std::string& raw = raw_rows[r][c];
            if (is_missing_marker(raw)) {
                row.emplace_back();
            } else if (kinds[c] == ColumnKind::Numeric) {
                double v;
                if (!parse_number(raw, v))
                    throw std::runtime_error("parse_csv: row " + std::to_string(r + 1) + ", column '" +
                                             header[c] + "': '" + raw + "' is not numeric");
                row.emplace_back(v);
            } else {
                row.emplace_back(trim(raw));
            }
        }
        rows.push_back(std::move(row));
    }

    return DataTable(std::move(columns), std::move(rows));
}

DataTable parse_csv_file(const std::string& path, const std::map<std::string, ColumnKind>& declared_schema,
                         const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("parse_csv: cannot open '" + path + "'");
    return parse_csv(in, declared_schema, options);
}

void serialize_csv(const DataTable& table, std::ostream& out) {
    const auto& cols = table.columns();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out << ',';
        write_field(out, cols[c].name);
    }
    out << '\n';
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) out << ',';
            const Cell& cell = table.at(r, c);
            if (cell.is_missing()) continue;
            if (cell.is_number()) out << format_double(cell.number());
            else write_field(out, cell.category());
        }
        out << '\n';
    }
}

std::string serialize_csv(const DataTable& table) {
    std::ostringstream out;
    serialize_csv(table, out);
    return out.str();
}

void write_csv_file(const DataTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_csv_file: cannot open '" + path + "' for writing");
    serialize_csv(table, out);
    if (!out) throw std::runtime_error("write_csv_file: error writing '" + path + "'");
}

std::map<std::string, ColumnKind> schema_of(const DataTable& table) {
    std::map<std::string, ColumnKind> schema;
    for (const auto& col : table.columns()) schema[col.name] = col.kind;
    return schema;
}

}  // namespace admitml
