#include "ppd/embed.hpp"

#include "ppd/errors.hpp"

namespace ppd {

namespace {

GrayImage embed_impl(const GrayImage& img, std::uint64_t seed, double rate) {
    Xoshiro256ss rng(seed);
    std::vector<std::uint8_t> out = img.pixels();
    if (rate >= 1.0) {
        for (auto& p : out) p = embed_pixel(p, rng);
    } else {
        for (auto& p : out)
            if (rng.next_unit() < rate) p = embed_pixel(p, rng);
    }
    return GrayImage(img.width(), img.height(), std::move(out));
}

} // namespace

GrayImage embed_full(const GrayImage& img, std::uint64_t seed) {
    return embed_impl(img, seed, 1.0);
}

GrayImage embed_rate(const GrayImage& img, const EmbedParams& params) {
    if (!(params.rate > 0.0) || params.rate > 1.0)
        throw DataError("embed rate must be in (0,1], got " + std::to_string(params.rate));
    return embed_impl(img, params.seed, params.rate);
}

} // namespace ppd
