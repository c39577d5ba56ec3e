// Compares the OpenMP kernels against the serial reference implementations
// on synthetic inputs and reports speedups. Also verifies the outputs agree.

#include <omp.h>

#include <cstdio>
#include <cstdint>
#include <string>
#include <vector>

#include "ppd/analysis.hpp"
#include "ppd/embed.hpp"
#include "ppd/image.hpp"
#include "ppd/ppd.hpp"
#include "ppd/reference.hpp"
#include "ppd/rng.hpp"

namespace {

ppd::GrayImage random_image(int width, int height, std::uint64_t seed) {
    ppd::Xoshiro256ss rng(seed);
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
    for (auto& p : pixels) p = static_cast<std::uint8_t>(rng.below(256));
    return ppd::GrayImage(width, height, std::move(pixels));
}

template <typename F>
double best_of(int reps, F&& fn) {
    double best = 1e30;
    for (int r = 0; r < reps; ++r) {
        const double t0 = omp_get_wtime();
        fn();
        const double t1 = omp_get_wtime();
        if (t1 - t0 < best) best = t1 - t0;
    }
    return best;
}

void report(const std::string& name, double serial, double parallel, bool equal) {
    std::printf("%-28s serial %8.3fs   omp %8.3fs   speedup %.2fx   results %s\n", name.c_str(),
                serial, parallel, serial / parallel, equal ? "equal" : "DIFFER");
}

} // namespace

int main() {
    const int threads = omp_get_max_threads();
    std::printf("ppd_bench: %d threads\n\n", threads);

    // Pattern counting on a photo-sized raster.
    {
        const ppd::GrayImage img = random_image(2100, 1500, 1);
        ppd::PatternCounts serial_counts, parallel_counts;
        const double t_serial =
            best_of(3, [&] { serial_counts = ppd::ref::count_patterns(img, 4); });
        const double t_parallel = best_of(3, [&] { parallel_counts = ppd::count_patterns(img, 4); });
        report("count_patterns 2100x1500", t_serial, t_parallel,
               serial_counts.counts == parallel_counts.counts);
    }

    // Feature extraction throughput, 1 thread vs all.
    {
        const ppd::GrayImage img = random_image(1024, 1024, 2);
        ppd::FeatureVector a, b;
        omp_set_num_threads(1);
        const double t_serial = best_of(3, [&] { a = ppd::extract_features(img, {4, 7}); });
        omp_set_num_threads(threads);
        const double t_parallel = best_of(3, [&] { b = ppd::extract_features(img, {4, 7}); });
        report("extract_features 1024x1024", t_serial, t_parallel, a.values == b.values);
    }

    // Exhaustive block enumeration over [0,15]^5.
    {
        ppd::PatternCounts serial_counts, parallel_counts;
        omp_set_num_threads(1);
        const double t_serial =
            best_of(3, [&] { serial_counts = ppd::theoretical_histogram(4, 15); });
        omp_set_num_threads(threads);
        const double t_parallel =
            best_of(3, [&] { parallel_counts = ppd::theoretical_histogram(4, 15); });
        report("theoretical_hist [0,15]^5", t_serial, t_parallel,
               serial_counts.counts == parallel_counts.counts);
    }

    // Monte Carlo pattern shifts.
    {
        const ppd::PixelBlock block{100, 102, 102, 101, 100};
        ppd::ShiftRow serial_row, parallel_row;
        omp_set_num_threads(1);
        const double t_serial =
            best_of(3, [&] { serial_row = ppd::shift_experiment(block, 4, 2000000, 9); });
        omp_set_num_threads(threads);
        const double t_parallel =
            best_of(3, [&] { parallel_row = ppd::shift_experiment(block, 4, 2000000, 9); });
        report("shift_experiment 2e6 trials", t_serial, t_parallel,
               serial_row.dest_counts == parallel_row.dest_counts);
    }

    return 0;
}
