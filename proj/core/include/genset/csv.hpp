#pragma once

#include <string>
#include <vector>

#include "genset/time_series.hpp"

namespace genset {

// Plain numeric table with a header row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows; // row-major

    std::size_t column_index(const std::string& name) const; // throws ValidationError if absent
    std::vector<double> column(const std::string& name) const;
};

// Comma-separated, '.' decimal, header row, LF line endings. Lines starting
// with '#' and blank lines are skipped.
CsvTable read_csv(const std::string& path);
CsvTable read_csv_text(const std::string& text);
void write_csv(const std::string& path, const CsvTable& table);
std::string to_csv_text(const CsvTable& table);

// First column must be time with uniform spacing (1 ppm tolerance).
TimeSeries time_series_from_csv(const CsvTable& table);
CsvTable time_series_to_csv(const TimeSeries& series, const std::string& time_name = "t");

} // namespace genset
