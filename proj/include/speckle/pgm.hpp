#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace speckle {

struct PgmImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // row-major
};

/// Binary (P5) PGM, 8-bit. Throws std::runtime_error on malformed input.
PgmImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const PgmImage& img);

}
