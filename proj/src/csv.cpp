#include "ftmimo/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace ftmimo::csv {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf.data(), res.ptr);
}

std::string format_uint(std::uint64_t v) { return std::to_string(v); }

void Table::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size())
        throw std::invalid_argument("csv row has " + std::to_string(cells.size()) + " cells, expected " +
                                    std::to_string(columns_.size()));
    rows_.push_back(std::move(cells));
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i] == name) return i;
    throw std::out_of_range("csv: no column named " + name);
}

namespace {

void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << cells[i];
    }
    os << '\n';
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

void Table::write(std::ostream& os) const {
    if (!comment_.empty()) os << "# " << comment_ << '\n';
    write_line(os, columns_);
    for (const auto& r : rows_) write_line(os, r);
}

std::string Table::str() const {
    std::ostringstream os;
    write(os);
    return os.str();
}

Table read(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::string comment;
    std::optional<Table> table;
    while (std::getline(is, line)) {
        if (line.rfind("# ", 0) == 0) {
            if (!table) comment = line.substr(2);
            continue;
        }
        if (line.empty()) continue;
        if (!table) {
            table.emplace(split(line));
            table->set_comment(comment);
        } else {
            table->add_row(split(line));
        }
    }
    if (!table) throw std::invalid_argument("csv: no header row");
    return *table;
}

}  // namespace ftmimo::csv
