#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace ppd {

// 8-bit single-channel raster, row-major. Immutable after construction;
// safe to share between threads. Minimum size 3x3 so at least one
// difference block exists.
class GrayImage {
public:
    GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

    static GrayImage filled(int width, int height, std::uint8_t value);

    int width() const { return width_; }
    int height() const { return height_; }
    std::uint8_t at(int row, int col) const { return pixels_[static_cast<std::size_t>(row) * width_ + col]; }
    const std::vector<std::uint8_t>& pixels() const { return pixels_; }

    bool operator==(const GrayImage& other) const = default;

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> pixels_;
};

// Reads a binary PGM (P5, maxval 255) or an 8-bit PNG. Color PNGs are
// rejected when strict, otherwise converted with integer BT.601 luma
// (299*R + 587*G + 114*B + 500) / 1000, i.e. round-half-up.
GrayImage load_image(const std::filesystem::path& path, bool strict = false);

// Writes binary P5. load_image(save_image(img)) is pixel-exact.
void save_image(const GrayImage& img, const std::filesystem::path& path);

} // namespace ppd
