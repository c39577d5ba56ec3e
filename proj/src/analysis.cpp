#include "ppd/analysis.hpp"

#include <omp.h>

#include <stdexcept>
#include <string>

#include "ppd/embed.hpp"
#include "ppd/errors.hpp"
#include "ppd/rng.hpp"

namespace ppd {

int max_distance(const PixelBlock& block, int s) {
    const auto v = block.values();
    int best = 0;
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j) {
            const int d = v[i] > v[j] ? v[i] - v[j] : v[j] - v[i];
            if (d > best) best = d;
        }
    return best < s - 1 ? best : s - 1;
}

int pattern_d_class(const Pattern& pattern) {
    int d = 0;
    for (std::uint8_t digit : pattern)
        if (digit > d) d = digit;
    return d;
}

DClassHistogram d_class_histogram(const PatternCounts& counts, int s) {
    if (counts.s != s || counts.counts.size() != feature_dim(s))
        throw DataError("pattern counts do not match S=" + std::to_string(s));
    DClassHistogram hist;
    hist.class_counts.assign(static_cast<std::size_t>(s), 0);
    for (std::uint32_t k = 0; k < counts.counts.size(); ++k) {
        if (counts.counts[k] == 0) continue;
        hist.class_counts[pattern_d_class(decode_pattern(k + 1, s))] += counts.counts[k];
    }
    return hist;
}

PatternCounts theoretical_histogram(int s, int value_range_max) {
    if (s < kMinS || s > kMaxS) throw std::invalid_argument("S out of range");
    if (value_range_max < 0 || value_range_max > 255)
        throw std::invalid_argument("value range max must be in [0,255]");

    const std::uint64_t n = static_cast<std::uint64_t>(value_range_max) + 1;
    const std::uint64_t block_count = n * n * n * n * n;
    if (block_count > 100000000ULL)
        throw DataError("enumeration of " + std::to_string(block_count) +
                        " blocks exceeds the 1e8 cap");

    std::vector<std::uint64_t> counts(feature_dim(s), 0);

#pragma omp parallel
    {
        std::vector<std::uint64_t> local(counts.size(), 0);

#pragma omp for schedule(static) nowait
        for (int v0 = 0; v0 <= value_range_max; ++v0) {
            PixelBlock block;
            block.top = static_cast<std::uint8_t>(v0);
            for (int v1 = 0; v1 <= value_range_max; ++v1) {
                block.top_right = static_cast<std::uint8_t>(v1);
                for (int v2 = 0; v2 <= value_range_max; ++v2) {
                    block.center = static_cast<std::uint8_t>(v2);
                    for (int v3 = 0; v3 <= value_range_max; ++v3) {
                        block.right = static_cast<std::uint8_t>(v3);
                        for (int v4 = 0; v4 <= value_range_max; ++v4) {
                            block.bottom_right = static_cast<std::uint8_t>(v4);
                            const PatternPair pair = extract_patterns(block, s);
                            ++local[pattern_index(pair.pmin, s) - 1];
                            ++local[pattern_index(pair.pmax, s) - 1];
                        }
                    }
                }
            }
        }

#pragma omp critical
        for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += local[k];
    }

    PatternCounts result;
    result.counts = std::move(counts);
    result.s = s;
    return result;
}

ShiftRow shift_experiment(const PixelBlock& block, int s, std::uint64_t trials,
                          std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");

    ShiftRow row;
    row.source_d = max_distance(block, s);
    row.trials = trials;
    row.dest_counts.assign(static_cast<std::size_t>(s), 0);

#pragma omp parallel
    {
        std::vector<std::uint64_t> local(row.dest_counts.size(), 0);

#pragma omp for schedule(static) nowait
        for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); ++t) {
            // Each trial re-embeds the original block on its own stream, so
            // the result does not depend on how trials are scheduled.
            Xoshiro256ss rng(derive_seed(seed, "shift-trial", static_cast<std::uint64_t>(t)));
            PixelBlock perturbed;
            perturbed.top = embed_pixel(block.top, rng);
            perturbed.top_right = embed_pixel(block.top_right, rng);
            perturbed.center = embed_pixel(block.center, rng);
            perturbed.right = embed_pixel(block.right, rng);
            perturbed.bottom_right = embed_pixel(block.bottom_right, rng);

            const PatternPair pair = extract_patterns(perturbed, s);
            ++local[pattern_d_class(pair.pmin)];
            ++local[pattern_d_class(pair.pmax)];
        }

#pragma omp critical
        for (std::size_t k = 0; k < local.size(); ++k) row.dest_counts[k] += local[k];
    }

    return row;
}

std::vector<DClassHistogram> sequential_embedding_trajectory(const GrayImage& img, int s,
                                                             int steps, std::uint64_t seed) {
    if (steps < 0) throw std::invalid_argument("steps must be >= 0");
    std::vector<DClassHistogram> trajectory;
    trajectory.reserve(static_cast<std::size_t>(steps) + 1);
    trajectory.push_back(d_class_histogram(count_patterns(img, s), s));
    GrayImage current = img;
    for (int step = 1; step <= steps; ++step) {
        current = embed_full(current, derive_seed(seed, "trajectory-step",
                                                  static_cast<std::uint64_t>(step)));
        trajectory.push_back(d_class_histogram(count_patterns(current, s), s));
    }
    return trajectory;
}

std::vector<std::int64_t> variation_summary(const PatternCounts& cover_counts,
                                            const PatternCounts& embedded_counts, int s) {
    if (cover_counts.width != embedded_counts.width ||
        cover_counts.height != embedded_counts.height)
        throw DataError("variation summary requires same-dimension sources");
    const DClassHistogram cover = d_class_histogram(cover_counts, s);
    const DClassHistogram embedded = d_class_histogram(embedded_counts, s);
    std::vector<std::int64_t> deltas(static_cast<std::size_t>(s));
    for (int d = 0; d < s; ++d)
        deltas[d] = static_cast<std::int64_t>(embedded.class_counts[d]) -
                    static_cast<std::int64_t>(cover.class_counts[d]);
    return deltas;
}

} // namespace ppd
