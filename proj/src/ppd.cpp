#include "ppd/ppd.hpp"

#include <omp.h>

#include <stdexcept>
#include <string>

#include "ppd/embed.hpp"
#include "ppd/errors.hpp"

namespace ppd {

namespace {

void validate_s(int s) {
    if (s < kMinS || s > kMaxS)
        throw std::invalid_argument("S must be in [2,16], got " + std::to_string(s));
}

} // namespace

std::uint32_t pattern_index(const Pattern& pattern, int s) {
    validate_s(s);
    std::uint32_t index = 0;
    for (int i = 0; i < 4; ++i) {
        if (pattern[i] >= s)
            throw std::invalid_argument("pattern digit " + std::to_string(pattern[i]) +
                                        " out of range for S=" + std::to_string(s));
        index = index * static_cast<std::uint32_t>(s) + pattern[i];
    }
    return index + 1;
}

Pattern decode_pattern(std::uint32_t index, int s) {
    validate_s(s);
    if (index < 1 || index > feature_dim(s))
        throw std::invalid_argument("pattern index " + std::to_string(index) + " out of range");
    std::uint32_t rem = index - 1;
    Pattern pattern{};
    for (int i = 3; i >= 0; --i) {
        pattern[i] = static_cast<std::uint8_t>(rem % s);
        rem /= static_cast<std::uint32_t>(s);
    }
    return pattern;
}

std::uint64_t PatternCounts::total() const {
    std::uint64_t sum = 0;
    for (std::uint64_t v : counts) sum += v;
    return sum;
}

PatternCounts count_patterns(const GrayImage& img, int s) {
    validate_s(s);
    const int h = img.height();
    const int w = img.width();
    const std::uint8_t* px = img.pixels().data();

    std::vector<std::uint64_t> counts(feature_dim(s), 0);

#pragma omp parallel
    {
        std::vector<std::uint64_t> local(counts.size(), 0);

#pragma omp for schedule(static) nowait
        for (int row = 1; row <= h - 2; ++row) {
            const std::uint8_t* above = px + static_cast<std::size_t>(row - 1) * w;
            const std::uint8_t* cur = px + static_cast<std::size_t>(row) * w;
            const std::uint8_t* below = px + static_cast<std::size_t>(row + 1) * w;
            for (int col = 0; col <= w - 2; ++col) {
                const PixelBlock block{above[col], above[col + 1], cur[col], cur[col + 1],
                                       below[col + 1]};
                const PatternPair pair = extract_patterns(block, s);
                ++local[pattern_index(pair.pmin, s) - 1];
                ++local[pattern_index(pair.pmax, s) - 1];
            }
        }

#pragma omp critical
        for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += local[k];
    }

    PatternCounts result;
    result.counts = std::move(counts);
    result.s = s;
    result.width = w;
    result.height = h;
    return result;
}

FeatureVector extract_features(const GrayImage& img, const PpdParams& params) {
    validate_s(params.s);

    const PatternCounts before = count_patterns(img, params.s);
    const GrayImage calibrated = embed_full(img, params.calibration_seed);
    const PatternCounts after = count_patterns(calibrated, params.s);

    const std::size_t dim = before.counts.size();
    std::vector<double> ratio(dim);
    for (std::size_t k = 0; k < dim; ++k)
        ratio[k] = static_cast<double>(before.counts[k] + 1) /
                   static_cast<double>(after.counts[k] + 1);

    double lo = ratio[0], hi = ratio[0];
    for (std::size_t k = 1; k < dim; ++k) {
        if (ratio[k] < lo) lo = ratio[k];
        if (ratio[k] > hi) hi = ratio[k];
    }

    FeatureVector fv;
    fv.s = params.s;
    fv.ratio_min = lo;
    fv.ratio_max = hi;
    fv.values.resize(dim);
    if (hi > lo) {
        for (std::size_t k = 0; k < dim; ++k) fv.values[k] = (ratio[k] - lo) / (hi - lo);
    }
    // hi == lo (e.g. constant images): leave all features at 0.
    return fv;
}

} // namespace ppd
