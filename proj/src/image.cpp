#include "ppd/image.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "ppd/errors.hpp"

namespace ppd {

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width_ < 3 || height_ < 3)
        throw DataError("image dimensions must be at least 3x3, got " + std::to_string(width_) +
                        "x" + std::to_string(height_));
    if (pixels_.size() != static_cast<std::size_t>(width_) * height_)
        throw DataError("pixel buffer size does not match dimensions");
}

GrayImage GrayImage::filled(int width, int height, std::uint8_t value) {
    return GrayImage(width, height,
                     std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, value));
}

namespace {

// --- PGM (P5) ------------------------------------------------------------

// Reads one whitespace-separated ASCII token, skipping '#' comments.
bool next_pgm_token(std::istream& in, std::string& token) {
    token.clear();
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (!std::isspace(ch)) break;
    }
    if (ch == EOF) return false;
    do {
        token.push_back(static_cast<char>(ch));
        ch = in.get();
    } while (ch != EOF && !std::isspace(ch) && ch != '#');
    if (ch == '#') in.unget(); // leave the comment for the next call
    return true;
}

int parse_dim(const std::string& token, const std::filesystem::path& path) {
    std::size_t pos = 0;
    int value = 0;
    try {
        value = std::stoi(token, &pos);
    } catch (const std::exception&) {
        throw IoError(path.string() + ": malformed PGM header token '" + token + "'");
    }
    if (pos != token.size() || value <= 0)
        throw IoError(path.string() + ": malformed PGM header token '" + token + "'");
    return value;
}

GrayImage load_pgm(std::ifstream& in, const std::filesystem::path& path) {
    std::string token;
    if (!next_pgm_token(in, token) || token != "P5")
        throw IoError(path.string() + ": not a binary PGM (P5) file");
    std::string wtok, htok, mtok;
    if (!next_pgm_token(in, wtok) || !next_pgm_token(in, htok) || !next_pgm_token(in, mtok))
        throw IoError(path.string() + ": truncated PGM header");
    const int width = parse_dim(wtok, path);
    const int height = parse_dim(htok, path);
    const int maxval = parse_dim(mtok, path);
    if (maxval != 255)
        throw IoError(path.string() + ": unsupported maxval " + std::to_string(maxval) +
                      " (only 255)");
    // The maxval token is followed by exactly one whitespace byte, already
    // consumed by the tokenizer.
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != pixels.size())
        throw IoError(path.string() + ": truncated PGM raster");
    try {
        return GrayImage(width, height, std::move(pixels));
    } catch (const DataError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

// --- PNG -----------------------------------------------------------------

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* file = nullptr;

    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (file) std::fclose(file);
    }
};

GrayImage load_png(const std::filesystem::path& path, bool strict) {
    PngReader r;
    r.file = std::fopen(path.string().c_str(), "rb");
    if (!r.file) throw IoError(path.string() + ": cannot open file");

    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw IoError(path.string() + ": libpng init failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw IoError(path.string() + ": libpng init failed");

    if (setjmp(png_jmpbuf(r.png))) throw IoError(path.string() + ": PNG decode error");

    png_init_io(r.png, r.file);
    png_read_info(r.png, r.info);

    const png_uint_32 width = png_get_image_width(r.png, r.info);
    const png_uint_32 height = png_get_image_height(r.png, r.info);
    const int bit_depth = png_get_bit_depth(r.png, r.info);
    const int color_type = png_get_color_type(r.png, r.info);

    if (bit_depth != 8)
        throw IoError(path.string() + ": unsupported PNG bit depth " + std::to_string(bit_depth) +
                      " (only 8)");

    const bool is_gray = color_type == PNG_COLOR_TYPE_GRAY;
    if (strict && !is_gray)
        throw IoError(path.string() + ": not an 8-bit grayscale PNG (strict mode)");

    // Normalize everything that is not plain 8-bit gray to 8-bit RGB and
    // convert with integer BT.601 luma below.
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
    if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(r.png);
    png_set_strip_alpha(r.png);
    png_set_interlace_handling(r.png);
    png_read_update_info(r.png, r.info);

    const std::size_t rowbytes = png_get_rowbytes(r.png, r.info);
    const int channels = png_get_channels(r.png, r.info);
    if (channels != 1 && channels != 3)
        throw IoError(path.string() + ": unsupported PNG channel layout");

    std::vector<std::uint8_t> raster(rowbytes * height);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = raster.data() + y * rowbytes;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
    if (channels == 1) {
        for (png_uint_32 y = 0; y < height; ++y)
            std::memcpy(pixels.data() + static_cast<std::size_t>(y) * width, rows[y], width);
    } else {
        for (png_uint_32 y = 0; y < height; ++y) {
            const std::uint8_t* src = rows[y];
            std::uint8_t* dst = pixels.data() + static_cast<std::size_t>(y) * width;
            for (png_uint_32 x = 0; x < width; ++x) {
                const unsigned rch = src[3 * x], gch = src[3 * x + 1], bch = src[3 * x + 2];
                dst[x] = static_cast<std::uint8_t>((299u * rch + 587u * gch + 114u * bch + 500u) / 1000u);
            }
        }
    }

    try {
        return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
    } catch (const DataError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

} // namespace

GrayImage load_image(const std::filesystem::path& path, bool strict) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot open file");

    unsigned char magic[8] = {};
    in.read(reinterpret_cast<char*>(magic), sizeof(magic));
    const std::streamsize got = in.gcount();
    in.clear();
    in.seekg(0);

    if (got >= 2 && magic[0] == 'P' && magic[1] == '5') return load_pgm(in, path);

    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (got >= 8 && std::memcmp(magic, png_sig, 8) == 0) {
        in.close();
        return load_png(path, strict);
    }

    throw IoError(path.string() + ": unsupported format (need binary PGM P5 or PNG)");
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open file for writing");
    out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels().data()),
              static_cast<std::streamsize>(img.pixels().size()));
    if (!out) throw IoError(path.string() + ": write failed");
}

} // namespace ppd
