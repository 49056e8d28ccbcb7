#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace locmix {

/// "%.10g"; NaN and infinities become empty cells.
std::string csv_cell(double value);

/// Comma-separated table. The first line is "# config_hash=<h> seed=<s>",
/// the second the column header; rows keep insertion order.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns);

    void add_row(std::vector<std::string> cells);
    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }

    std::string render(const std::string& config_hash, std::uint64_t seed) const;
    void write(const std::string& path, const std::string& config_hash, std::uint64_t seed) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace locmix
