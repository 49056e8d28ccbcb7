#include "locmix/csv.hpp"

#include "locmix/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace locmix {

std::string csv_cell(double value)
{
    if (!std::isfinite(value))
        return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns))
{
    if (columns_.empty())
        throw std::invalid_argument("CsvTable: no columns");
}

void CsvTable::add_row(std::vector<std::string> cells)
{
    if (cells.size() != columns_.size())
        throw std::invalid_argument("CsvTable: row width does not match the header");
    rows_.push_back(std::move(cells));
}

std::string CsvTable::render(const std::string& config_hash, std::uint64_t seed) const
{
    std::ostringstream out;
    out << "# config_hash=" << config_hash << " seed=" << seed << "\n";
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out << (i ? "," : "") << cells[i];
        out << "\n";
    };
    line(columns_);
    for (const auto& r : rows_)
        line(r);
    return out.str();
}

void CsvTable::write(const std::string& path, const std::string& config_hash, std::uint64_t seed) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << render(config_hash, seed);
}

}  // namespace locmix
