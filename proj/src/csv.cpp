#include "tcn/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace tcn {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string render_csv(const CsvTable& table) {
    std::string out;
    auto append_row = [&out](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    };
    append_row(table.header);
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw std::invalid_argument("csv row width does not match header");
        append_row(row);
    }
    return out;
}

void write_csv_atomic(const std::string& path, const CsvTable& table) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out << render_csv(table);
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed: " + path);
}

} // namespace tcn
