#include "cmaa2c/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "cmaa2c/errors.hpp"

namespace cmaa2c::io {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell.push_back(ch);
        }
    }
    cells.push_back(cell);
    return cells;
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path.string() + ": missing header");
    table.header_ = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != table.header_.size())
            throw ConfigError(path.string() + ": row " + std::to_string(table.rows_.size() + 1) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(table.header_.size()));
        table.rows_.push_back(std::move(cells));
    }
    return table;
}

bool CsvTable::has_column(const std::string& name) const {
    for (const auto& h : header_)
        if (h == name) return true;
    return false;
}

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
        if (header_[i] == name) return i;
    throw ContractError("CsvTable: no column " + name);
}

const std::string& CsvTable::cell(std::size_t row, const std::string& column) const {
    require(row < rows_.size(), "CsvTable: row out of range");
    return rows_[row][column_index(column)];
}

double CsvTable::number(std::size_t row, const std::string& column) const {
    const auto& text = cell(row, column);
    if (text.empty()) return std::numeric_limits<double>::quiet_NaN();
    try {
        return std::stod(text);
    } catch (const std::exception&) {
        throw ConfigError("CsvTable: '" + text + "' in column " + column + " is not a number");
    }
}

std::vector<double> CsvTable::column(const std::string& name) const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r) out.push_back(number(r, name));
    return out;
}

std::string format_number(double value) {
    if (std::isnan(value)) return "";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";
    char buffer[40];
    // Plain decimals for moderate magnitudes, exponent form otherwise.
    const double magnitude = std::abs(value);
    const auto format = magnitude >= 1e-5 && magnitude < 1e16 ? std::chars_format::fixed : std::chars_format::scientific;
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value, format);
    return std::string(buffer, result.ptr);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << contents;
    if (!out) throw ConfigError("write failed for " + path.string());
}

}  // namespace cmaa2c::io
