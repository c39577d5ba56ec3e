#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ppd/image.hpp"

namespace ppd {

// Feature extraction works on a 3x3 neighborhood reduced to five pixels
// (one horizontal, one vertical and two diagonal neighbor pairs survive
// the symmetry reduction):
//
//     top        top_right
//     center     right
//                bottom_right
//
// "center" is the pixel the block is anchored on.
struct PixelBlock {
    std::uint8_t top;
    std::uint8_t top_right;
    std::uint8_t center;
    std::uint8_t right;
    std::uint8_t bottom_right;

    std::array<std::uint8_t, 5> values() const {
        return {top, top_right, center, right, bottom_right};
    }
};

enum class BlockPos : int { Top = 0, TopRight = 1, Center = 2, Right = 3, BottomRight = 4 };

// A pattern is four clamped differences between a reference pixel of the
// block and its remaining four pixels, each digit in [0, S-1].
using Pattern = std::array<std::uint8_t, 4>;

struct PpdParams {
    int s = 4; // number of difference levels, 2..16; feature dimension = S^4
    std::uint64_t calibration_seed = 0;
};

inline constexpr int kMinS = 2;
inline constexpr int kMaxS = 16;

inline std::uint32_t feature_dim(int s) {
    const std::uint32_t u = static_cast<std::uint32_t>(s);
    return u * u * u * u;
}

// |x-y| clamped to S-1.
inline std::uint8_t limited_difference(std::uint8_t x, std::uint8_t y, int s) {
    const int d = x > y ? x - y : y - x;
    const int cap = s - 1;
    return static_cast<std::uint8_t>(d < cap ? d : cap);
}

// Reading order of the four non-reference pixels for each choice of
// reference. The row order mirrors BlockPos. This single fixed table is
// what makes rotated variants of the same local structure collapse onto
// one pattern.
inline constexpr std::array<std::array<BlockPos, 4>, 5> kNeighborOrder = {{
    {BlockPos::Center, BlockPos::Right, BlockPos::BottomRight, BlockPos::TopRight},   // ref = top
    {BlockPos::Right, BlockPos::BottomRight, BlockPos::Center, BlockPos::Top},        // ref = top_right
    {BlockPos::Top, BlockPos::TopRight, BlockPos::BottomRight, BlockPos::Right},      // ref = center
    {BlockPos::BottomRight, BlockPos::Center, BlockPos::Top, BlockPos::TopRight},     // ref = right
    {BlockPos::Right, BlockPos::TopRight, BlockPos::Top, BlockPos::Center},           // ref = bottom_right
}};

inline std::array<BlockPos, 4> neighbor_order(BlockPos reference) {
    return kNeighborOrder[static_cast<int>(reference)];
}

struct PatternPair {
    Pattern pmin;
    Pattern pmax;
};

// Builds the two patterns of a block, one anchored on the minimum pixel
// value and one on the maximum. When several positions attain the extreme,
// the candidate patterns are all rearrangements of the same digits; ties
// resolve to the lexicographically largest candidate for the minimum and
// the smallest for the maximum.
inline PatternPair extract_patterns(const PixelBlock& block, int s) {
    const std::array<std::uint8_t, 5> v = block.values();

    std::uint8_t minv = v[0], maxv = v[0];
    for (int i = 1; i < 5; ++i) {
        if (v[i] < minv) minv = v[i];
        if (v[i] > maxv) maxv = v[i];
    }

    PatternPair out{};
    bool have_min = false, have_max = false;
    for (int pos = 0; pos < 5; ++pos) {
        const bool is_min = v[pos] == minv;
        const bool is_max = v[pos] == maxv;
        if (!is_min && !is_max) continue;
        Pattern cand;
        const auto& order = kNeighborOrder[pos];
        for (int i = 0; i < 4; ++i)
            cand[i] = limited_difference(v[pos], v[static_cast<int>(order[i])], s);
        if (is_min && (!have_min || cand > out.pmin)) {
            out.pmin = cand;
            have_min = true;
        }
        if (is_max && (!have_max || cand < out.pmax)) {
            out.pmax = cand;
            have_max = true;
        }
    }
    return out;
}

// Base-S positional encoding of a pattern into [1, S^4]; P[0] is the most
// significant digit.
std::uint32_t pattern_index(const Pattern& pattern, int s);

// Inverse of pattern_index.
Pattern decode_pattern(std::uint32_t index, int s);

// Occurrence counters for all S^4 patterns of an image; counts[k] belongs
// to the pattern with index k+1. Produced totals are 2*(H-2)*(W-1): every
// interior block contributes its min- and max-anchored pattern.
struct PatternCounts {
    std::vector<std::uint64_t> counts;
    int s = 0;
    int width = 0;
    int height = 0;

    std::uint64_t total() const;
};

// Counts min/max patterns over all blocks anchored on rows 1..H-2 and
// columns 0..W-2 (0-based). Parallelized over row stripes with per-thread
// counters; the merged integer result is identical to the serial one.
PatternCounts count_patterns(const GrayImage& img, int s);

// Normalized pattern-reaction features. ratio_min/ratio_max keep the raw
// smoothed-ratio extremes that were scaled away.
struct FeatureVector {
    std::vector<double> values; // S^4 components in [0,1]
    int s = 0;
    double ratio_min = 0;
    double ratio_max = 0;
};

// The full feature pipeline: count patterns, re-embed the image at 1 bpp
// with the calibration seed, count again, take per-pattern ratios
// (T[k]+1)/(T'[k]+1) and min-max normalize them to [0,1]. The +1 smoothing
// keeps the ratio defined when a pattern never occurs; a flat ratio vector
// (constant images) normalizes to all zeros.
FeatureVector extract_features(const GrayImage& img, const PpdParams& params);

} // namespace ppd
