#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace speckle {

/// Minimal CSV support for the pipeline's flat tables: comma separation,
/// optional double-quote quoting, '#'-prefixed schema comment lines skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(const std::string& line);
std::string csv_escape(const std::string& field);

/// Fixed-format float used in every CSV we emit, so identical runs produce
/// identical bytes.
std::string format_double(double v);

}
