#include "ppd/reference.hpp"

#include <algorithm>
#include <stdexcept>

#include "ppd/embed.hpp"

namespace ppd::ref {

namespace {

// Everything below is deliberately written from scratch: plain loops, its
// own copy of the neighbor-order table, no shortcuts.

int clamp_diff(int x, int y, int s) {
    int d = x - y;
    if (d < 0) d = -d;
    if (d > s - 1) d = s - 1;
    return d;
}

// Rows: reference position 0..4 = (top, top_right, center, right,
// bottom_right); entries are positions of the four neighbors in reading
// order.
const int kOrder[5][4] = {
    {2, 3, 4, 1}, // top
    {3, 4, 2, 0}, // top_right
    {0, 1, 4, 3}, // center
    {4, 2, 0, 1}, // right
    {3, 1, 0, 2}, // bottom_right
};

std::vector<int> pattern_for(const int v[5], int ref, int s) {
    std::vector<int> p(4);
    for (int i = 0; i < 4; ++i) p[i] = clamp_diff(v[ref], v[kOrder[ref][i]], s);
    return p;
}

long index_of(const std::vector<int>& p, int s) {
    long idx = 0;
    for (int i = 0; i < 4; ++i) idx = idx * s + p[i];
    return idx; // 0-based
}

void count_block(const int v[5], int s, std::vector<std::uint64_t>& counts) {
    const int minv = *std::min_element(v, v + 5);
    const int maxv = *std::max_element(v, v + 5);

    bool have = false;
    std::vector<int> best_min;
    for (int ref = 0; ref < 5; ++ref) {
        if (v[ref] != minv) continue;
        std::vector<int> cand = pattern_for(v, ref, s);
        if (!have || std::lexicographical_compare(best_min.begin(), best_min.end(),
                                                  cand.begin(), cand.end())) {
            best_min = cand;
            have = true;
        }
    }

    have = false;
    std::vector<int> best_max;
    for (int ref = 0; ref < 5; ++ref) {
        if (v[ref] != maxv) continue;
        std::vector<int> cand = pattern_for(v, ref, s);
        if (!have || std::lexicographical_compare(cand.begin(), cand.end(),
                                                  best_max.begin(), best_max.end())) {
            best_max = cand;
            have = true;
        }
    }

    ++counts[index_of(best_min, s)];
    ++counts[index_of(best_max, s)];
}

} // namespace

PatternCounts count_patterns(const GrayImage& img, int s) {
    if (s < 2 || s > 16) throw std::invalid_argument("S out of range");
    const int h = img.height();
    const int w = img.width();

    std::vector<std::uint64_t> counts(static_cast<std::size_t>(s) * s * s * s, 0);
    for (int i = 2; i <= h - 1; ++i) {     // 1-based row of the block center
        for (int j = 1; j <= w - 1; ++j) { // 1-based column
            const int v[5] = {
                img.at(i - 2, j - 1), // top
                img.at(i - 2, j),     // top_right
                img.at(i - 1, j - 1), // center
                img.at(i - 1, j),     // right
                img.at(i, j),         // bottom_right
            };
            count_block(v, s, counts);
        }
    }

    PatternCounts result;
    result.counts = std::move(counts);
    result.s = s;
    result.width = w;
    result.height = h;
    return result;
}

FeatureVector extract_features(const GrayImage& img, const PpdParams& params) {
    const PatternCounts before = ref::count_patterns(img, params.s);
    const GrayImage calibrated = embed_full(img, params.calibration_seed);
    const PatternCounts after = ref::count_patterns(calibrated, params.s);

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
    fv.values.assign(dim, 0.0);
    if (hi > lo)
        for (std::size_t k = 0; k < dim; ++k) fv.values[k] = (ratio[k] - lo) / (hi - lo);
    return fv;
}

} // namespace ppd::ref
