#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace ftmimo::csv {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
std::string format_uint(std::uint64_t v);

/// One comment line, one header row, then data rows.
class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void set_comment(std::string comment) { comment_ = std::move(comment); }
    const std::string& comment() const noexcept { return comment_; }
    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

    /// Row must have one cell per column.
    void add_row(std::vector<std::string> cells);
    /// Index of a named column; throws std::out_of_range if absent.
    std::size_t column(const std::string& name) const;

    void write(std::ostream& os) const;
    std::string str() const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
    std::string comment_;
};

/// Parses what Table::write produces. Comment lines are skipped.
Table read(const std::string& text);

}  // namespace ftmimo::csv
