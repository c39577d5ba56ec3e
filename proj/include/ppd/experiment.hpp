#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ppd/svm.hpp"

namespace ppd {

// One master seed drives everything: stego synthesis, calibration
// embeddings, the train/test split, fold assignment and SMO randomness.
// Sub-seeds come from derive_seed(master, tag, ...); see README.
struct ExperimentConfig {
    std::filesystem::path cover_dir;
    std::filesystem::path stego_dir;          // exclusive with embed_rate
    std::optional<double> embed_rate;         // synthesize stego from covers
    int s = 4;
    std::uint64_t seed = 0;
    double split_fraction = 0.5;              // training share, stratified
    GridSpec grid = GridSpec::standard();
    SmoOptions smo;
    std::filesystem::path output_dir;
    bool strict_load = false;
};

struct PhaseTiming {
    std::string phase;
    double wall_seconds = 0;
    double cpu_seconds = 0;
};

struct EvalReport {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0;
    double training_accuracy = 0;
    double chosen_c = 0, chosen_gamma = 0, cv_accuracy = 0;
    double auc = 0;
    std::uint64_t train_cover = 0, train_stego = 0, test_cover = 0, test_stego = 0;
    std::vector<PhaseTiming> timing; // written to a separate volatile file
};

// One row of the feature cache CSV: image_id,label,S,seed,f1,...,fS^4.
struct FeatureRecord {
    std::string id;
    std::string label; // cover | stego | unknown
    int s = 0;
    std::uint64_t seed = 0; // calibration seed used for this image
    std::vector<double> features;
};

void write_feature_csv(const std::filesystem::path& path,
                       const std::vector<FeatureRecord>& records);
std::vector<FeatureRecord> read_feature_csv(const std::filesystem::path& path);

// Sorted list of .pgm/.png files in a directory.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

// Feature extraction for a set of images under one master seed; ids are
// prefix/filename, calibration seeds derive from the ids. Parallel over
// images, output order fixed.
std::vector<FeatureRecord> extract_corpus_features(
    const std::vector<std::filesystem::path>& files, const std::string& id_prefix,
    const std::string& label, int s, std::uint64_t master_seed, bool strict_load);

// The full experiment: build/load the stego half, extract features, grid
// search on the training half, train the final model, evaluate the test
// half. Writes report.json, report.txt, features.csv, model.svm, roc.csv
// and timing.txt into output_dir; all but timing.txt are byte-deterministic
// for a fixed config and seed.
EvalReport run_evaluation(const ExperimentConfig& config);

struct SweepRow {
    int s = 0;
    double rate = 0;
    double accuracy = 0;
    std::uint64_t dim = 0;
    double chosen_c = 0, chosen_gamma = 0;
};

// run_evaluation per (S, rate); one CSV row each. Per-run artifacts land in
// output_dir/s<S>_rate<rate>/.
std::vector<SweepRow> sweep_s(const ExperimentConfig& base, const std::vector<int>& s_values,
                              const std::vector<double>& rates);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

struct TimingRow {
    std::string id;
    std::uint64_t pixel_count = 0;
    double wall_seconds = 0;
    double cpu_seconds = 0;
};

struct TimingReport {
    std::vector<TimingRow> per_image;
    double total_wall_seconds = 0;
    double total_cpu_seconds = 0;
};

// Per-image and total feature-extraction times.
TimingReport time_features(const std::vector<std::filesystem::path>& files, int s,
                           std::uint64_t master_seed, bool strict_load = false);

} // namespace ppd
