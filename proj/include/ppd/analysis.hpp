#pragma once

#include <cstdint>
#include <vector>

#include "ppd/image.hpp"
#include "ppd/ppd.hpp"

namespace ppd {

// Patterns group into S classes by their maximum digit ("d-patterns").
struct DClassHistogram {
    std::vector<std::uint64_t> class_counts; // index d = 0..S-1
};

// Largest pairwise pixel difference within the block, clamped to S-1.
// Equals the infinity norm of both patterns of the block.
int max_distance(const PixelBlock& block, int s);

int pattern_d_class(const Pattern& pattern);

// Buckets pattern counters by d-class.
DClassHistogram d_class_histogram(const PatternCounts& counts, int s);

// Pattern counters for the synthetic "image" containing every block whose
// five values lie in [0, value_range_max]. Enumeration is capped at 1e8
// blocks. Parallel over the leading pixel value.
PatternCounts theoretical_histogram(int s, int value_range_max = 7);

// Destination d-class counts after `trials` independent 1 bpp embeddings
// of the same block. Each trial perturbs the five pixels independently
// (keep 1/2, +1 1/4, -1 1/4, forced direction at 0/255) on its own derived
// stream, then both patterns of the perturbed block are classified.
// dest_counts sums to 2*trials.
struct ShiftRow {
    int source_d = 0;
    std::vector<std::uint64_t> dest_counts;
    std::uint64_t trials = 0;
};

ShiftRow shift_experiment(const PixelBlock& block, int s, std::uint64_t trials,
                          std::uint64_t seed);

// d-class histograms for the image itself and after each of `steps`
// cumulative 1 bpp embeddings (step k uses sub-seed k of `seed`).
std::vector<DClassHistogram> sequential_embedding_trajectory(const GrayImage& img, int s,
                                                             int steps, std::uint64_t seed);

// Per-d-class signed count deltas (embedded - cover). Both counter sets
// must come from same-sized images with the same S.
std::vector<std::int64_t> variation_summary(const PatternCounts& cover_counts,
                                            const PatternCounts& embedded_counts, int s);

} // namespace ppd
