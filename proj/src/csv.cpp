#include "evalkit/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "evalkit/common.hpp"

namespace evk {

std::size_t Table::col(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end())
        throw domain_error("csv: missing required column '" + name + "'");
    return std::size_t(it - columns.begin());
}

std::vector<double> Table::column(const std::string& name) const {
    std::size_t c = col(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace((unsigned char)s[a])) a++;
    while (b > a && std::isspace((unsigned char)s[b - 1])) b--;
    return s.substr(a, b - a);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

double parse_cell(const std::string& cell, const std::string& origin,
                  std::size_t lineno) {
    std::string low = cell;
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (low == "inf" || low == "+inf" || low == "infinity") return kInf;
    if (low == "-inf" || low == "-infinity") return -kInf;
    if (low == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || p != cell.data() + cell.size())
        throw domain_error(origin + ":" + std::to_string(lineno) +
                           ": malformed numeric cell '" + cell + "'");
    return v;
}

}  // namespace

Table read_csv(std::istream& in, const std::string& origin) {
    Table t;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        lineno++;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (!have_header) {
            for (auto& c : cells)
                if (c.empty())
                    throw domain_error(origin + ":" + std::to_string(lineno) +
                                       ": empty header cell");
            t.columns = cells;
            have_header = true;
            continue;
        }
        if (cells.size() != t.columns.size())
            throw domain_error(origin + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(t.columns.size()) +
                               " cells, got " + std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_cell(c, origin, lineno));
        t.rows.push_back(std::move(row));
    }
    if (!have_header) throw domain_error(origin + ": missing csv header row");
    return t;
}

Table read_csv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw domain_error("cannot open csv file '" + path + "'");
    return read_csv(f, path);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& out, const Table& t) {
    for (std::size_t i = 0; i < t.columns.size(); i++)
        out << (i ? "," : "") << t.columns[i];
    out << "\n";
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); i++)
            out << (i ? "," : "") << format_double(r[i]);
        out << "\n";
    }
}

std::string csv_to_string(const Table& t) {
    std::ostringstream ss;
    write_csv(ss, t);
    return ss.str();
}

}  // namespace evk
