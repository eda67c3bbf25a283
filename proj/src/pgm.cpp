#include "speckle/pgm.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>
#include <string>

namespace speckle {

namespace {

// Skips whitespace and '#' comment lines between header tokens.
int next_header_int(std::istream& in, const std::filesystem::path& path) {
    for (;;) {
        const int c = in.peek();
        if (c == EOF) throw std::runtime_error("pgm: truncated header in " + path.string());
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        break;
    }
    int value = 0;
    if (!(in >> value)) throw std::runtime_error("pgm: bad header field in " + path.string());
    return value;
}

}  // namespace

PgmImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("pgm: cannot open " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5") throw std::runtime_error("pgm: expected binary P5 format in " + path.string());

    PgmImage img;
    img.width = next_header_int(in, path);
    img.height = next_header_int(in, path);
    const int maxval = next_header_int(in, path);
    if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 255)
        throw std::runtime_error("pgm: unsupported geometry or depth in " + path.string());
    in.get();  // single whitespace after maxval

    img.data.resize(static_cast<std::size_t>(img.width) * img.height);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
        throw std::runtime_error("pgm: truncated pixel data in " + path.string());
    return img;
}

void write_pgm(const std::filesystem::path& path, const PgmImage& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.data.size() != static_cast<std::size_t>(img.width) * img.height)
        throw std::runtime_error("pgm: inconsistent image for " + path.string());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("pgm: cannot write " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
    if (!out) throw std::runtime_error("pgm: write failed for " + path.string());
}

}
