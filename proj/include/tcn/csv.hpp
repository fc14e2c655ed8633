#pragma once

#include <string>
#include <vector>

namespace tcn {

inline constexpr const char* kCsvSchemaVersion = "1";

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Fixed six-decimal rendering, so equal runs produce byte-equal files.
std::string format_double(double v);

// Writes to a temporary file in the same directory, then renames over the
// target, so readers never observe a half-written file.
void write_csv_atomic(const std::string& path, const CsvTable& table);

std::string render_csv(const CsvTable& table);

} // namespace tcn
