#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace percept {

/* Rectangular table of named numeric columns. */
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/* Canonical number rendering for all emitted data: 9 significant digits,
 * trailing zeros kept, so identical tables give identical bytes. */
inline std::string format_csv_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%#.9g", x);
    return buf;
}

inline std::string render_csv(const Table& table) {
    if (table.columns.empty()) throw std::domain_error("render_csv: table needs at least one column");
    for (const auto& name : table.columns)
        if (name.empty() || name.find(',') != std::string::npos || name.find('\n') != std::string::npos)
            throw std::domain_error("render_csv: bad column name '" + name + "'");
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c > 0) out += ',';
        out += table.columns[c];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw std::domain_error("render_csv: ragged row");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += ',';
            out += format_csv_number(row[c]);
        }
        out += '\n';
    }
    return out;
}

inline std::filesystem::path emit_csv(const Table& table, const std::filesystem::path& path) {
    const std::string body = render_csv(table);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_csv: cannot open " + path.string());
    out << body;
    if (!out) throw std::runtime_error("emit_csv: write failed for " + path.string());
    return path;
}

}  // namespace percept
