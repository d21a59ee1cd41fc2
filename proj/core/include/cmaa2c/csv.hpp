#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cmaa2c::io {

/// Comma-separated table with a header row. Empty cells read as NaN.
class CsvTable {
public:
    static CsvTable read(const std::filesystem::path& path);

    const std::vector<std::string>& header() const { return header_; }
    std::size_t row_count() const { return rows_.size(); }
    bool has_column(const std::string& name) const;
    std::size_t column_index(const std::string& name) const;

    const std::string& cell(std::size_t row, const std::string& column) const;
    double number(std::size_t row, const std::string& column) const;
    std::vector<double> column(const std::string& name) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::vector<std::string> split_csv_line(const std::string& line);

/// Shortest round-trip decimal representation; NaN prints empty.
std::string format_number(double value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace cmaa2c::io
