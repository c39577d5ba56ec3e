// Command-line front end: embedding, feature extraction, training,
// prediction and the experiment harness.

#include <omp.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ppd/analysis.hpp"
#include "ppd/embed.hpp"
#include "ppd/errors.hpp"
#include "ppd/experiment.hpp"
#include "ppd/image.hpp"
#include "ppd/ppd.hpp"
#include "ppd/rng.hpp"
#include "ppd/roc.hpp"
#include "ppd/svm.hpp"
#include "ppd/util.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::vector<ppd::LabeledSample> labeled_samples(const std::vector<ppd::FeatureRecord>& records) {
    std::vector<ppd::LabeledSample> samples;
    for (const auto& rec : records) {
        if (rec.label == "unknown")
            throw ppd::DataError("record '" + rec.id + "' is unlabeled; cannot use for training");
        samples.push_back({rec.id, rec.label == "stego" ? 1 : -1, rec.features});
    }
    return samples;
}

void print_eval_report(const ppd::EvalReport& r) {
    std::cout << "accuracy " << ppd::fmt_g17(r.accuracy) << "  (TP " << r.tp << "  FP " << r.fp
              << "  TN " << r.tn << "  FN " << r.fn << ")\n";
    std::cout << "training accuracy " << ppd::fmt_g17(r.training_accuracy) << ", test AUC "
              << ppd::fmt_g17(r.auc) << "\n";
    std::cout << "chosen C=" << ppd::fmt_g17(r.chosen_c)
              << " gamma=" << ppd::fmt_g17(r.chosen_gamma) << " (cv accuracy "
              << ppd::fmt_g17(r.cv_accuracy) << ")\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PPD steganalysis toolkit: LSB-matching embedding, pattern-difference "
                 "features, RBF-SVM classification and experiment harness"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key=value config file");

    int threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (default: all cores)");

    // --- embed ---
    auto* embed = app.add_subcommand("embed", "LSB-matching (+/-1) embedding");
    fs::path embed_in, embed_out;
    double embed_rate_value = 1.0;
    std::uint64_t embed_seed = 0;
    bool embed_strict = false;
    embed->add_option("--in", embed_in, "Input image (PGM/PNG)")->required();
    embed->add_option("--out", embed_out, "Output PGM")->required();
    embed->add_option("--rate", embed_rate_value, "Fraction of pixels carrying a bit, (0,1]");
    embed->add_option("--seed", embed_seed, "Random seed")->required();
    embed->add_flag("--strict", embed_strict, "Reject non-grayscale inputs");

    // --- features ---
    auto* features = app.add_subcommand("features", "Extract PPD feature vectors to CSV");
    fs::path feat_cover_dir, feat_stego_dir, feat_out;
    std::vector<fs::path> feat_inputs;
    int feat_s = 4;
    std::uint64_t feat_seed = 0;
    bool feat_strict = false;
    features->add_option("--cover-dir", feat_cover_dir, "Directory of cover images");
    features->add_option("--stego-dir", feat_stego_dir, "Directory of stego images");
    features->add_option("--in", feat_inputs, "Individual images (label: unknown)");
    features->add_option("--s", feat_s, "Difference levels S in [2,16]");
    features->add_option("--seed", feat_seed, "Master seed (calibration)")->required();
    features->add_option("--out", feat_out, "Output CSV")->required();
    features->add_flag("--strict", feat_strict, "Reject non-grayscale inputs");

    // --- train ---
    auto* train = app.add_subcommand("train", "Train an RBF-SVM on a feature CSV");
    fs::path train_features, train_model;
    std::uint64_t train_seed = 0;
    std::optional<double> train_c, train_gamma;
    int train_folds = 5;
    double train_tol = 1e-3;
    int train_max_passes = 10000;
    train->add_option("--features", train_features, "Labeled feature CSV")->required();
    train->add_option("--model", train_model, "Output model file")->required();
    train->add_option("--seed", train_seed, "Random seed")->required();
    train->add_option("--c", train_c, "Fix C (skips grid search; needs --gamma)");
    train->add_option("--gamma", train_gamma, "Fix gamma (skips grid search; needs --c)");
    train->add_option("--folds", train_folds, "Cross-validation folds");
    train->add_option("--tol", train_tol, "KKT tolerance");
    train->add_option("--max-passes", train_max_passes, "SMO sweep limit");

    // --- predict ---
    auto* predict_cmd = app.add_subcommand("predict", "Classify feature rows or images");
    fs::path pred_model, pred_features, pred_out;
    std::vector<fs::path> pred_inputs;
    std::uint64_t pred_seed = 0;
    bool pred_have_seed = false, pred_strict = false;
    predict_cmd->add_option("--model", pred_model, "Model file")->required();
    predict_cmd->add_option("--features", pred_features, "Feature CSV to classify");
    predict_cmd->add_option("--in", pred_inputs, "Images to classify");
    predict_cmd->add_option("--seed", pred_seed, "Master seed (calibration for --in)")
        ->each([&](const std::string&) { pred_have_seed = true; });
    predict_cmd->add_option("--out", pred_out, "Output CSV (default: stdout)");
    predict_cmd->add_flag("--strict", pred_strict, "Reject non-grayscale inputs");

    // --- evaluate ---
    auto* evaluate = app.add_subcommand("evaluate", "Full train/test experiment");
    ppd::ExperimentConfig eval_config;
    double eval_rate = 0;
    bool eval_have_rate = false;
    evaluate->add_option("--cover-dir", eval_config.cover_dir, "Directory of cover images")
        ->required();
    evaluate->add_option("--stego-dir", eval_config.stego_dir, "Directory of stego images");
    evaluate->add_option("--embed-rate", eval_rate, "Synthesize stego at this rate")
        ->each([&](const std::string&) { eval_have_rate = true; });
    evaluate->add_option("--s", eval_config.s, "Difference levels S in [2,16]");
    evaluate->add_option("--seed", eval_config.seed, "Master seed")->required();
    evaluate->add_option("--split", eval_config.split_fraction, "Training fraction in (0,1)");
    evaluate->add_option("--folds", eval_config.grid.folds, "Cross-validation folds");
    evaluate->add_option("--tol", eval_config.smo.tol, "KKT tolerance");
    evaluate->add_option("--max-passes", eval_config.smo.max_passes, "SMO sweep limit");
    evaluate->add_option("--out-dir", eval_config.output_dir, "Output directory")->required();
    evaluate->add_flag("--strict", eval_config.strict_load, "Reject non-grayscale inputs");

    // --- roc ---
    auto* roc = app.add_subcommand("roc", "ROC curve for a model over a labeled feature CSV");
    fs::path roc_model, roc_features, roc_out;
    roc->add_option("--model", roc_model, "Model file")->required();
    roc->add_option("--features", roc_features, "Labeled feature CSV")->required();
    roc->add_option("--out", roc_out, "Output CSV")->required();

    // --- sweep-s ---
    auto* sweep = app.add_subcommand("sweep-s", "Accuracy sweep over S values and rates");
    ppd::ExperimentConfig sweep_config;
    std::vector<int> sweep_s_values{4};
    std::vector<double> sweep_rates{1.0};
    sweep->add_option("--cover-dir", sweep_config.cover_dir, "Directory of cover images")
        ->required();
    sweep->add_option("--s-values", sweep_s_values, "S values, e.g. --s-values 3 4 5")
        ->delimiter(',');
    sweep->add_option("--rates", sweep_rates, "Embedding rates, e.g. --rates 0.25,0.5,1.0")
        ->delimiter(',');
    sweep->add_option("--seed", sweep_config.seed, "Master seed")->required();
    sweep->add_option("--split", sweep_config.split_fraction, "Training fraction in (0,1)");
    sweep->add_option("--folds", sweep_config.grid.folds, "Cross-validation folds");
    sweep->add_option("--out-dir", sweep_config.output_dir, "Output directory")->required();
    sweep->add_flag("--strict", sweep_config.strict_load, "Reject non-grayscale inputs");

    // --- shift-experiment ---
    auto* shift = app.add_subcommand("shift-experiment",
                                     "Monte Carlo d-class shifts for one pixel block");
    std::vector<int> shift_block;
    int shift_s = 4;
    std::uint64_t shift_trials = 1000, shift_seed = 0;
    fs::path shift_out;
    shift
        ->add_option("--block", shift_block,
                     "Five pixel values: top,top_right,center,right,bottom_right")
        ->required()
        ->delimiter(',')
        ->expected(5);
    shift->add_option("--s", shift_s, "Difference levels S in [2,16]");
    shift->add_option("--trials", shift_trials, "Number of independent embeddings");
    shift->add_option("--seed", shift_seed, "Random seed")->required();
    shift->add_option("--out", shift_out, "Output CSV (optional)");

    // --- theoretical-hist ---
    auto* theo = app.add_subcommand("theoretical-hist",
                                    "Pattern distribution over all blocks in a value range");
    int theo_s = 4, theo_range = 7;
    fs::path theo_out;
    theo->add_option("--s", theo_s, "Difference levels S in [2,16]");
    theo->add_option("--range-max", theo_range, "Pixel values span [0,range-max]");
    theo->add_option("--out", theo_out, "Output CSV")->required();

    // --- time-features ---
    auto* timing = app.add_subcommand("time-features", "Feature extraction timing report");
    fs::path time_dir;
    std::vector<fs::path> time_inputs;
    int time_s = 4;
    std::uint64_t time_seed = 0;
    bool time_strict = false;
    timing->add_option("--dir", time_dir, "Directory of images");
    timing->add_option("--in", time_inputs, "Individual images");
    timing->add_option("--s", time_s, "Difference levels S in [2,16]");
    timing->add_option("--seed", time_seed, "Master seed (calibration)")->required();
    timing->add_flag("--strict", time_strict, "Reject non-grayscale inputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (threads > 0) omp_set_num_threads(threads);

        if (embed->parsed()) {
            const ppd::GrayImage img = ppd::load_image(embed_in, embed_strict);
            ppd::save_image(ppd::embed_rate(img, {embed_seed, embed_rate_value}), embed_out);
            std::cout << "embedded " << embed_in.string() << " -> " << embed_out.string()
                      << " at rate " << embed_rate_value << "\n";
        } else if (features->parsed()) {
            std::vector<ppd::FeatureRecord> records;
            if (!feat_cover_dir.empty()) {
                auto recs = ppd::extract_corpus_features(ppd::list_images(feat_cover_dir),
                                                         "cover/", "cover", feat_s, feat_seed,
                                                         feat_strict);
                records.insert(records.end(), recs.begin(), recs.end());
            }
            if (!feat_stego_dir.empty()) {
                auto recs = ppd::extract_corpus_features(ppd::list_images(feat_stego_dir),
                                                         "stego/", "stego", feat_s, feat_seed,
                                                         feat_strict);
                records.insert(records.end(), recs.begin(), recs.end());
            }
            if (!feat_inputs.empty()) {
                auto recs = ppd::extract_corpus_features(feat_inputs, "", "unknown", feat_s,
                                                         feat_seed, feat_strict);
                records.insert(records.end(), recs.begin(), recs.end());
            }
            if (records.empty())
                throw std::invalid_argument("need --cover-dir, --stego-dir or --in");
            ppd::write_feature_csv(feat_out, records);
            std::cout << "wrote " << records.size() << " feature rows to " << feat_out.string()
                      << "\n";
        } else if (train->parsed()) {
            if (train_c.has_value() != train_gamma.has_value())
                throw std::invalid_argument("--c and --gamma must be given together");
            const auto records = ppd::read_feature_csv(train_features);
            const auto samples = labeled_samples(records);
            const ppd::SmoOptions options{train_tol, train_max_passes};
            double c, gamma;
            if (train_c) {
                c = *train_c;
                gamma = *train_gamma;
            } else {
                ppd::GridSpec grid = ppd::GridSpec::standard();
                grid.folds = train_folds;
                const ppd::GridResult result =
                    ppd::grid_search(samples, grid, ppd::derive_seed(train_seed, "grid"), options);
                c = result.best_c;
                gamma = result.best_gamma;
                std::cout << "grid search: C=" << ppd::fmt_g17(c)
                          << " gamma=" << ppd::fmt_g17(gamma) << " (cv accuracy "
                          << ppd::fmt_g17(result.best_accuracy) << ")\n";
            }
            ppd::SvmModel model = ppd::train_smo(samples, c, gamma,
                                                 ppd::derive_seed(train_seed, "smo-final"),
                                                 options);
            model.s = records.front().s;
            model.seed = train_seed;
            ppd::save_model(model, train_model);
            std::cout << "wrote model with " << model.support_vectors.size()
                      << " support vectors to " << train_model.string() << "\n";
        } else if (predict_cmd->parsed()) {
            const ppd::SvmModel model = ppd::load_model(pred_model);
            std::vector<ppd::FeatureRecord> records;
            if (!pred_features.empty()) {
                const auto recs = ppd::read_feature_csv(pred_features);
                records.insert(records.end(), recs.begin(), recs.end());
            }
            if (!pred_inputs.empty()) {
                if (!pred_have_seed)
                    throw std::invalid_argument("--seed is required when classifying images");
                const auto recs = ppd::extract_corpus_features(pred_inputs, "", "unknown",
                                                               model.s, pred_seed, pred_strict);
                records.insert(records.end(), recs.begin(), recs.end());
            }
            if (records.empty()) throw std::invalid_argument("need --features or --in");

            std::ofstream file;
            std::ostream* out = &std::cout;
            if (!pred_out.empty()) {
                file.open(pred_out, std::ios::binary | std::ios::trunc);
                if (!file) throw ppd::IoError(pred_out.string() + ": cannot open for writing");
                out = &file;
            }
            *out << "image_id,decision_value,label\n";
            for (const auto& rec : records) {
                const ppd::Prediction p = ppd::predict(model, rec.features);
                *out << rec.id << "," << ppd::fmt_g17(p.decision_value) << ","
                     << (p.label == 1 ? "stego" : "cover") << "\n";
            }
        } else if (evaluate->parsed()) {
            if (eval_have_rate) eval_config.embed_rate = eval_rate;
            const ppd::EvalReport report = ppd::run_evaluation(eval_config);
            print_eval_report(report);
            std::cout << "artifacts in " << eval_config.output_dir.string() << "\n";
        } else if (roc->parsed()) {
            const ppd::SvmModel model = ppd::load_model(roc_model);
            const auto samples = labeled_samples(ppd::read_feature_csv(roc_features));
            const auto curve = ppd::roc_curve(model, samples);
            std::ofstream out(roc_out, std::ios::binary | std::ios::trunc);
            if (!out) throw ppd::IoError(roc_out.string() + ": cannot open for writing");
            out << "fpr,tpr,threshold\n";
            for (const auto& p : curve)
                out << ppd::fmt_g17(p.fpr) << "," << ppd::fmt_g17(p.tpr) << ","
                    << ppd::fmt_g17(p.threshold) << "\n";
            std::cout << "AUC " << ppd::fmt_g17(ppd::roc_auc(curve)) << ", " << curve.size()
                      << " vertices -> " << roc_out.string() << "\n";
        } else if (sweep->parsed()) {
            const auto rows = ppd::sweep_s(sweep_config, sweep_s_values, sweep_rates);
            std::filesystem::create_directories(sweep_config.output_dir);
            ppd::write_sweep_csv(sweep_config.output_dir / "sweep.csv", rows);
            std::cout << "s,rate,accuracy,feature_dim\n";
            for (const auto& row : rows)
                std::cout << row.s << "," << row.rate << "," << ppd::fmt_g17(row.accuracy) << ","
                          << row.dim << "\n";
        } else if (shift->parsed()) {
            for (int v : shift_block)
                if (v < 0 || v > 255)
                    throw std::invalid_argument("block values must be in [0,255]");
            const ppd::PixelBlock block{
                static_cast<std::uint8_t>(shift_block[0]), static_cast<std::uint8_t>(shift_block[1]),
                static_cast<std::uint8_t>(shift_block[2]), static_cast<std::uint8_t>(shift_block[3]),
                static_cast<std::uint8_t>(shift_block[4])};
            const ppd::ShiftRow row = ppd::shift_experiment(block, shift_s, shift_trials,
                                                            shift_seed);
            std::cout << "source d-class: " << row.source_d << " (" << row.trials
                      << " trials, 2 patterns each)\n";
            for (std::size_t d = 0; d < row.dest_counts.size(); ++d)
                std::cout << "  -> " << d << "-patterns: " << row.dest_counts[d] << " ("
                          << ppd::fmt_g17(static_cast<double>(row.dest_counts[d]) /
                                          (2.0 * row.trials))
                          << ")\n";
            if (!shift_out.empty()) {
                std::ofstream out(shift_out, std::ios::binary | std::ios::trunc);
                if (!out) throw ppd::IoError(shift_out.string() + ": cannot open for writing");
                out << "dest_class,count,share\n";
                for (std::size_t d = 0; d < row.dest_counts.size(); ++d)
                    out << d << "," << row.dest_counts[d] << ","
                        << ppd::fmt_g17(static_cast<double>(row.dest_counts[d]) /
                                        (2.0 * row.trials))
                        << "\n";
            }
        } else if (theo->parsed()) {
            const ppd::PatternCounts counts = ppd::theoretical_histogram(theo_s, theo_range);
            std::ofstream out(theo_out, std::ios::binary | std::ios::trunc);
            if (!out) throw ppd::IoError(theo_out.string() + ": cannot open for writing");
            out << "index,count\n";
            for (std::size_t k = 0; k < counts.counts.size(); ++k)
                out << (k + 1) << "," << counts.counts[k] << "\n";
            std::cout << "wrote " << counts.counts.size() << " pattern counts to "
                      << theo_out.string() << "\n";
        } else if (timing->parsed()) {
            std::vector<fs::path> files = time_inputs;
            if (!time_dir.empty()) {
                const auto listed = ppd::list_images(time_dir);
                files.insert(files.end(), listed.begin(), listed.end());
            }
            const ppd::TimingReport report = ppd::time_features(files, time_s, time_seed,
                                                                time_strict);
            std::cout << "image_id,pixels,wall_s,cpu_s\n";
            for (const auto& row : report.per_image) {
                char line[256];
                std::snprintf(line, sizeof(line), "%s,%llu,%.4f,%.4f\n", row.id.c_str(),
                              static_cast<unsigned long long>(row.pixel_count), row.wall_seconds,
                              row.cpu_seconds);
                std::cout << line;
            }
            char total[128];
            std::snprintf(total, sizeof(total), "TOTAL,%zu images,%.4f,%.4f\n",
                          report.per_image.size(), report.total_wall_seconds,
                          report.total_cpu_seconds);
            std::cout << total;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
