#include "segforge/image_io.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "segforge/error.hpp"

namespace segforge {

namespace {

uint8_t quantize(double v) {
    const double q = std::round(v * 255.0);
    return static_cast<uint8_t>(std::min(255.0, std::max(0.0, q)));
}

void write_pnm(const std::filesystem::path& path, const char* magic, int width, int height,
               const std::vector<uint8_t>& payload) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << magic << "\n" << width << " " << height << "\n255\n";
    f.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

/// Reads one whitespace-separated PNM header token, skipping # comments.
std::string next_token(std::istream& in, const std::filesystem::path& path) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw MalformedFileError("unexpected end of header: " + path.string());
    return tok;
}

struct PnmHeader {
    int width = 0, height = 0;
};

PnmHeader read_header(std::istream& in, const char* magic, const std::filesystem::path& path) {
    const std::string m = next_token(in, path);
    if (m != magic) {
        throw MalformedFileError("expected " + std::string(magic) + " magic in " + path.string() +
                                 ", got '" + m + "'");
    }
    PnmHeader h;
    try {
        h.width = std::stoi(next_token(in, path));
        h.height = std::stoi(next_token(in, path));
        const int maxval = std::stoi(next_token(in, path));
        if (maxval != 255) {
            throw MalformedFileError("maxval must be 255 in " + path.string() + ", got " +
                                     std::to_string(maxval));
        }
    } catch (const std::invalid_argument&) {
        throw MalformedFileError("non-numeric header field in " + path.string());
    }
    if (h.width <= 0 || h.height <= 0) {
        throw MalformedFileError("non-positive dimensions in " + path.string());
    }
    // exactly one whitespace byte separates header and payload; already
    // consumed by the tokenizer
    return h;
}

std::vector<uint8_t> read_payload(std::istream& in, size_t expected, const std::filesystem::path& path) {
    std::vector<uint8_t> payload(expected);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(expected));
    if (static_cast<size_t>(in.gcount()) != expected) {
        throw TruncatedFileError("payload truncated in " + path.string() + ": expected " +
                                 std::to_string(expected) + " bytes, got " + std::to_string(in.gcount()));
    }
    return payload;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    return f;
}

} // namespace

void write_ppm(const std::filesystem::path& path, const Image& image) {
    std::vector<uint8_t> payload(image.data.size());
    for (size_t i = 0; i < image.data.size(); ++i) payload[i] = quantize(image.data[i]);
    write_pnm(path, "P6", image.width, image.height, payload);
}

Image read_ppm(const std::filesystem::path& path) {
    std::ifstream f = open_input(path);
    const PnmHeader h = read_header(f, "P6", path);
    const auto payload = read_payload(f, static_cast<size_t>(h.width) * h.height * 3, path);
    Image img = Image::filled(h.height, h.width, 0.0);
    for (size_t i = 0; i < payload.size(); ++i) img.data[i] = payload[i] / 255.0;
    return img;
}

void write_pgm(const std::filesystem::path& path, const ClassMask& mask) {
    write_pnm(path, "P5", mask.width, mask.height, mask.values);
}

ClassMask read_pgm(const std::filesystem::path& path) {
    std::ifstream f = open_input(path);
    const PnmHeader h = read_header(f, "P5", path);
    ClassMask mask;
    mask.width = h.width;
    mask.height = h.height;
    mask.values = read_payload(f, static_cast<size_t>(h.width) * h.height, path);
    return mask;
}

} // namespace segforge
