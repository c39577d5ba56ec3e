#pragma once

#include "ppd/image.hpp"
#include "ppd/ppd.hpp"

namespace ppd::ref {

// Serial reference implementations, written independently of the optimized
// kernels (own order table, own clamping, own selection loops). Tests and
// the benchmark compare the fast paths against these; they are not used by
// the production pipeline.

PatternCounts count_patterns(const GrayImage& img, int s);

// Straight-line feature pipeline on top of the reference counter. The
// calibration embedding is shared with the production path on purpose: the
// reference checks the counting and normalization arithmetic, not the
// generator.
FeatureVector extract_features(const GrayImage& img, const PpdParams& params);

} // namespace ppd::ref
