#pragma once

#include <cstdint>

#include "ppd/image.hpp"
#include "ppd/rng.hpp"

namespace ppd {

struct EmbedParams {
    std::uint64_t seed = 0;
    double rate = 1.0; // fraction of pixels carrying a bit, in (0,1]
};

// One LSB-matching step on a single pixel. Draws a uniform bit b; if the
// pixel's LSB already equals b the pixel is kept, otherwise a second draw
// picks +1 or -1. At 0 the change is forced to +1 and at 255 to -1, which
// keeps the embedded bit recoverable.
inline std::uint8_t embed_pixel(std::uint8_t p, Xoshiro256ss& rng) {
    const int bit = rng.next_unit() < 0.5 ? 0 : 1;
    if ((p & 1) == bit) return p;
    const bool up = rng.next_unit() < 0.5;
    if (p == 0) return 1;
    if (p == 255) return 254;
    return up ? static_cast<std::uint8_t>(p + 1) : static_cast<std::uint8_t>(p - 1);
}

// 1 bpp LSB matching over the whole image, pixels visited in raster order
// on a single xoshiro256** stream. Pure function of (img, seed).
GrayImage embed_full(const GrayImage& img, std::uint64_t seed);

// Rate-controlled embedding: each pixel is independently selected with
// probability `rate` (one extra draw per pixel), selected pixels get the
// 1 bpp step. rate = 1 takes the exact embed_full path, so the outputs
// coincide stream-for-stream.
GrayImage embed_rate(const GrayImage& img, const EmbedParams& params);

} // namespace ppd
