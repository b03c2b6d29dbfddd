#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace evk {

// Numeric CSV with a mandatory header row. Cells are doubles; "inf", "-inf"
// and "nan" parse to the obvious values.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t col(const std::string& name) const;  // throws if absent
    std::vector<double> column(const std::string& name) const;
};

Table read_csv(std::istream& in, const std::string& origin = "<stream>");
Table read_csv_file(const std::string& path);

// Floats are written with 17 significant digits so that a written value
// round-trips to the identical double.
std::string format_double(double v);
void write_csv(std::ostream& out, const Table& t);
std::string csv_to_string(const Table& t);

}  // namespace evk
