#include "ppd/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ppd/embed.hpp"
#include "ppd/errors.hpp"
#include "ppd/image.hpp"
#include "ppd/ppd.hpp"
#include "ppd/rng.hpp"
#include "ppd/roc.hpp"
#include "ppd/util.hpp"

namespace ppd {

namespace {

using Clock = std::chrono::steady_clock;

struct PhaseClock {
    Clock::time_point wall_start = Clock::now();
    std::clock_t cpu_start = std::clock();

    PhaseTiming stop(const std::string& phase) const {
        PhaseTiming t;
        t.phase = phase;
        t.wall_seconds = std::chrono::duration<double>(Clock::now() - wall_start).count();
        t.cpu_seconds = static_cast<double>(std::clock() - cpu_start) / CLOCKS_PER_SEC;
        return t;
    }
};

std::string lower_ext(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    for (char& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return ext;
}

double parse_double_field(const std::string& field, const std::filesystem::path& path) {
    char* end = nullptr;
    const double value = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size())
        throw IoError(path.string() + ": malformed numeric field '" + field + "'");
    return value;
}

void check_id(const std::string& id) {
    if (id.find(',') != std::string::npos || id.find('\n') != std::string::npos)
        throw DataError("image id '" + id + "' contains a comma or newline");
}

} // namespace

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw IoError(dir.string() + ": not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = lower_ext(entry.path());
        if (ext == ".pgm" || ext == ".png") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
        return a.filename().string() < b.filename().string();
    });
    return files;
}

void write_feature_csv(const std::filesystem::path& path,
                       const std::vector<FeatureRecord>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open file for writing");
    if (records.empty()) throw DataError("no feature records to write");

    const std::size_t dim = records[0].features.size();
    out << "image_id,label,S,seed";
    for (std::size_t k = 1; k <= dim; ++k) out << ",f" << k;
    out << "\n";
    for (const FeatureRecord& rec : records) {
        check_id(rec.id);
        if (rec.features.size() != dim)
            throw DataError("feature-dimension drift in record '" + rec.id + "'");
        out << rec.id << "," << rec.label << "," << rec.s << "," << rec.seed;
        for (double v : rec.features) out << "," << fmt_g17(v);
        out << "\n";
    }
    if (!out) throw IoError(path.string() + ": write failed");
}

std::vector<FeatureRecord> read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string() + ": cannot open file");

    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty feature file");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 5 || header[0] != "image_id" || header[1] != "label" ||
        header[2] != "S" || header[3] != "seed" || header[4] != "f1")
        throw IoError(path.string() + ": unexpected feature CSV header");
    const std::size_t dim = header.size() - 4;

    std::vector<FeatureRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw IoError(path.string() + ": row with " + std::to_string(fields.size()) +
                          " fields, expected " + std::to_string(header.size()));
        FeatureRecord rec;
        rec.id = fields[0];
        rec.label = fields[1];
        if (rec.label != "cover" && rec.label != "stego" && rec.label != "unknown")
            throw IoError(path.string() + ": unknown label '" + rec.label + "'");
        rec.s = static_cast<int>(parse_double_field(fields[2], path));
        rec.seed = std::strtoull(fields[3].c_str(), nullptr, 10);
        rec.features.reserve(dim);
        for (std::size_t k = 4; k < fields.size(); ++k)
            rec.features.push_back(parse_double_field(fields[k], path));
        if (feature_dim(rec.s) != dim)
            throw DataError(path.string() + ": S=" + std::to_string(rec.s) +
                            " does not match feature dimension " + std::to_string(dim));
        if (!records.empty() && records.front().s != rec.s)
            throw DataError(path.string() + ": mixed S values in feature file");
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw DataError(path.string() + ": no feature rows");
    return records;
}

std::vector<FeatureRecord> extract_corpus_features(
    const std::vector<std::filesystem::path>& files, const std::string& id_prefix,
    const std::string& label, int s, std::uint64_t master_seed, bool strict_load) {
    std::vector<FeatureRecord> records(files.size());
    std::string first_error;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(files.size()); ++i) {
        try {
            const std::string id = id_prefix + files[i].filename().string();
            const std::uint64_t calib = derive_seed(master_seed, "calib", id);
            const GrayImage img = load_image(files[i], strict_load);
            const FeatureVector fv = extract_features(img, {s, calib});
            records[i] = {id, label, s, calib, fv.values};
        } catch (const std::exception& e) {
#pragma omp critical
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!first_error.empty()) throw DataError(first_error);
    return records;
}

namespace {

LabeledSample to_sample(const FeatureRecord& rec) {
    if (rec.label != "cover" && rec.label != "stego")
        throw DataError("sample '" + rec.id + "' has no cover/stego label");
    return {rec.id, rec.label == "stego" ? 1 : -1, rec.features};
}

void validate_config(const ExperimentConfig& config) {
    if (config.s < kMinS || config.s > kMaxS)
        throw std::invalid_argument("S must be in [2,16]");
    if (!(config.split_fraction > 0.0 && config.split_fraction < 1.0))
        throw std::invalid_argument("split fraction must be in (0,1)");
    if (config.embed_rate && !config.stego_dir.empty())
        throw std::invalid_argument("stego dir and embed rate are mutually exclusive");
    if (!config.embed_rate && config.stego_dir.empty())
        throw std::invalid_argument("need either a stego dir or an embed rate");
    if (config.embed_rate && !(*config.embed_rate > 0.0 && *config.embed_rate <= 1.0))
        throw std::invalid_argument("embed rate must be in (0,1]");
    if (config.output_dir.empty()) throw std::invalid_argument("output dir is required");
}

// Ranks ids by a seeded hash; the first `take` of each list land in the
// training half. Pairing covers with their synthesized stegos happens at
// the call site by reusing the cover's rank.
std::vector<std::size_t> hash_ranked(const std::vector<std::string>& ids, std::uint64_t seed,
                                     std::string_view tag) {
    std::vector<std::size_t> order(ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<std::uint64_t> keys(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) keys[i] = derive_seed(seed, tag, ids[i]);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (keys[a] != keys[b]) return keys[a] < keys[b];
        return ids[a] < ids[b];
    });
    return order;
}

std::string pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", fraction * 100.0);
    return buf;
}

void write_report_files(const ExperimentConfig& config, const EvalReport& report,
                        const GridResult& grid) {
    using nlohmann::ordered_json;

    ordered_json j;
    j["config"]["cover_dir"] = config.cover_dir.string();
    if (config.embed_rate)
        j["config"]["embed_rate"] = *config.embed_rate;
    else
        j["config"]["stego_dir"] = config.stego_dir.string();
    j["config"]["s"] = config.s;
    j["config"]["seed"] = config.seed;
    j["config"]["split_fraction"] = config.split_fraction;
    j["config"]["folds"] = config.grid.folds;
    j["config"]["grid_cells"] = config.grid.c_values.size() * config.grid.gamma_values.size();
    j["config"]["prng"] = kPrngName;
    j["config"]["smoothing"] = "add-one";
    j["data"]["train_cover"] = report.train_cover;
    j["data"]["train_stego"] = report.train_stego;
    j["data"]["test_cover"] = report.test_cover;
    j["data"]["test_stego"] = report.test_stego;
    j["grid"]["chosen_c"] = report.chosen_c;
    j["grid"]["chosen_gamma"] = report.chosen_gamma;
    j["grid"]["cv_accuracy"] = report.cv_accuracy;
    ordered_json table = ordered_json::array();
    for (const GridCell& cell : grid.table)
        table.push_back({{"c", cell.c}, {"gamma", cell.gamma}, {"accuracy", cell.cv_accuracy}});
    j["grid"]["table"] = std::move(table);
    j["results"]["accuracy"] = report.accuracy;
    j["results"]["tp"] = report.tp;
    j["results"]["fp"] = report.fp;
    j["results"]["tn"] = report.tn;
    j["results"]["fn"] = report.fn;
    j["results"]["training_accuracy"] = report.training_accuracy;
    j["results"]["auc"] = report.auc;

    {
        std::ofstream out(config.output_dir / "report.json", std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write report.json");
        out << j.dump(2) << "\n";
    }

    {
        std::ofstream out(config.output_dir / "report.txt", std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write report.txt");
        out << "PPD evaluation\n==============\n";
        out << "cover dir : " << config.cover_dir.string() << "\n";
        if (config.embed_rate)
            out << "stego     : synthesized, LSB matching at rate " << *config.embed_rate << "\n";
        else
            out << "stego dir : " << config.stego_dir.string() << "\n";
        out << "S=" << config.s << "  seed=" << config.seed
            << "  split=" << config.split_fraction << "  folds=" << config.grid.folds << "\n";
        out << "chosen    : C=" << fmt_g17(report.chosen_c)
            << "  gamma=" << fmt_g17(report.chosen_gamma) << "  (cv accuracy "
            << pct(report.cv_accuracy) << ")\n\n";
        char row[160];
        out << " Accuracy |    TP |    FP |    TN |    FN | Training\n";
        out << "----------+-------+-------+-------+-------+---------\n";
        std::snprintf(row, sizeof(row), "%9s | %5llu | %5llu | %5llu | %5llu | %8s\n",
                      pct(report.accuracy).c_str(),
                      static_cast<unsigned long long>(report.tp),
                      static_cast<unsigned long long>(report.fp),
                      static_cast<unsigned long long>(report.tn),
                      static_cast<unsigned long long>(report.fn),
                      pct(report.training_accuracy).c_str());
        out << row;
        out << "\ntest AUC  : " << fmt_g17(report.auc) << "\n";
    }
}

void write_roc_csv(const std::filesystem::path& path, const std::vector<RocPoint>& curve) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open file for writing");
    out << "fpr,tpr,threshold\n";
    for (const RocPoint& p : curve)
        out << fmt_g17(p.fpr) << "," << fmt_g17(p.tpr) << "," << fmt_g17(p.threshold) << "\n";
}

void write_timing(const std::filesystem::path& path, const std::vector<PhaseTiming>& timing) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open file for writing");
    out << "# volatile timing sidecar; excluded from the determinism contract\n";
    for (const PhaseTiming& t : timing) {
        char row[160];
        std::snprintf(row, sizeof(row), "%-16s wall=%.3fs cpu=%.3fs\n", t.phase.c_str(),
                      t.wall_seconds, t.cpu_seconds);
        out << row;
    }
}

} // namespace

EvalReport run_evaluation(const ExperimentConfig& config) {
    validate_config(config);
    std::filesystem::create_directories(config.output_dir);

    EvalReport report;
    const PhaseClock total_clock;

    // ---- features (with stego synthesis when requested) ----
    PhaseClock feature_clock;
    const std::vector<std::filesystem::path> cover_files = list_images(config.cover_dir);
    if (cover_files.empty()) throw DataError(config.cover_dir.string() + ": empty corpus");

    std::vector<FeatureRecord> cover_records(cover_files.size());
    std::vector<FeatureRecord> stego_records;

    if (config.embed_rate) {
        stego_records.resize(cover_files.size());
        std::string first_error;
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cover_files.size()); ++i) {
            try {
                const std::string name = cover_files[i].filename().string();
                const std::string cover_id = "cover/" + name;
                const std::string stego_id = "stego/" + name;
                const GrayImage cover = load_image(cover_files[i], config.strict_load);

                const std::uint64_t cover_calib = derive_seed(config.seed, "calib", cover_id);
                const FeatureVector cover_fv = extract_features(cover, {config.s, cover_calib});
                cover_records[i] = {cover_id, "cover", config.s, cover_calib, cover_fv.values};

                const GrayImage stego = embed_rate(
                    cover, {derive_seed(config.seed, "embed", stego_id), *config.embed_rate});
                const std::uint64_t stego_calib = derive_seed(config.seed, "calib", stego_id);
                const FeatureVector stego_fv = extract_features(stego, {config.s, stego_calib});
                stego_records[i] = {stego_id, "stego", config.s, stego_calib, stego_fv.values};
            } catch (const std::exception& e) {
#pragma omp critical
                if (first_error.empty()) first_error = e.what();
            }
        }
        if (!first_error.empty()) throw DataError(first_error);
    } else {
        const std::vector<std::filesystem::path> stego_files = list_images(config.stego_dir);
        if (stego_files.empty()) throw DataError(config.stego_dir.string() + ": empty corpus");
        if (stego_files.size() != cover_files.size())
            throw DataError("cover and stego corpora must have equal sizes (" +
                            std::to_string(cover_files.size()) + " vs " +
                            std::to_string(stego_files.size()) + ")");
        cover_records = extract_corpus_features(cover_files, "cover/", "cover", config.s,
                                                config.seed, config.strict_load);
        stego_records = extract_corpus_features(stego_files, "stego/", "stego", config.s,
                                                config.seed, config.strict_load);
    }

    std::vector<FeatureRecord> all_records = cover_records;
    all_records.insert(all_records.end(), stego_records.begin(), stego_records.end());
    write_feature_csv(config.output_dir / "features.csv", all_records);
    report.timing.push_back(feature_clock.stop("features"));

    // ---- train/test split ----
    const std::uint64_t split_seed = derive_seed(config.seed, "split");
    std::vector<LabeledSample> train, test;

    auto take_count = [&](std::size_t n) {
        const std::size_t k =
            static_cast<std::size_t>(std::floor(n * config.split_fraction + 0.5));
        if (k == 0 || k >= n)
            throw DataError("split fraction " + std::to_string(config.split_fraction) +
                            " leaves an empty half for " + std::to_string(n) + " images");
        return k;
    };

    if (config.embed_rate) {
        // A synthesized stego image always follows its cover into the same
        // half, so no test stego has its cover in the training set.
        std::vector<std::string> cover_ids(cover_records.size());
        for (std::size_t i = 0; i < cover_records.size(); ++i) cover_ids[i] = cover_records[i].id;
        const std::vector<std::size_t> order = hash_ranked(cover_ids, split_seed, "pair");
        const std::size_t k = take_count(order.size());
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            auto& dst = rank < k ? train : test;
            dst.push_back(to_sample(cover_records[order[rank]]));
            dst.push_back(to_sample(stego_records[order[rank]]));
        }
    } else {
        for (const auto* group : {&cover_records, &stego_records}) {
            std::vector<std::string> ids(group->size());
            for (std::size_t i = 0; i < group->size(); ++i) ids[i] = (*group)[i].id;
            const std::vector<std::size_t> order = hash_ranked(ids, split_seed, "half");
            const std::size_t k = take_count(order.size());
            for (std::size_t rank = 0; rank < order.size(); ++rank)
                (rank < k ? train : test).push_back(to_sample((*group)[order[rank]]));
        }
    }

    {
        std::set<std::string> train_ids, test_ids;
        for (const auto& s : train) train_ids.insert(s.id);
        for (const auto& s : test) test_ids.insert(s.id);
        if (train_ids.size() != train.size() || test_ids.size() != test.size())
            throw DataError("duplicate image ids in split");
        for (const auto& id : test_ids)
            if (train_ids.count(id)) throw DataError("overlapping train/test id: " + id);
    }

    for (const auto& s : train) (s.label == 1 ? report.train_stego : report.train_cover)++;
    for (const auto& s : test) (s.label == 1 ? report.test_stego : report.test_cover)++;

    // ---- grid search on the training half ----
    PhaseClock grid_clock;
    const GridResult grid = grid_search(train, config.grid, derive_seed(config.seed, "grid"),
                                        config.smo);
    report.chosen_c = grid.best_c;
    report.chosen_gamma = grid.best_gamma;
    report.cv_accuracy = grid.best_accuracy;
    report.timing.push_back(grid_clock.stop("grid_search"));

    // ---- final model ----
    PhaseClock train_clock;
    SvmModel model = train_smo(train, grid.best_c, grid.best_gamma,
                               derive_seed(config.seed, "smo-final"), config.smo);
    model.s = config.s;
    model.seed = config.seed;
    save_model(model, config.output_dir / "model.svm");

    std::size_t train_correct = 0;
    for (const auto& s : train)
        if (predict(model, s.features).label == s.label) ++train_correct;
    report.training_accuracy = static_cast<double>(train_correct) / train.size();
    report.timing.push_back(train_clock.stop("final_train"));

    // ---- evaluation ----
    PhaseClock eval_clock;
    std::vector<double> decisions(test.size());
    std::vector<int> labels(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        const Prediction p = predict(model, test[i].features);
        decisions[i] = p.decision_value;
        labels[i] = test[i].label;
        if (test[i].label == 1)
            (p.label == 1 ? report.tp : report.fn)++;
        else
            (p.label == 1 ? report.fp : report.tn)++;
    }
    report.accuracy = static_cast<double>(report.tp + report.tn) / test.size();

    const std::vector<RocPoint> curve = roc_curve(decisions, labels);
    report.auc = roc_auc(curve);
    write_roc_csv(config.output_dir / "roc.csv", curve);
    report.timing.push_back(eval_clock.stop("evaluate"));

    report.timing.push_back(total_clock.stop("total"));
    write_report_files(config, report, grid);
    write_timing(config.output_dir / "timing.txt", report.timing);
    return report;
}

std::vector<SweepRow> sweep_s(const ExperimentConfig& base, const std::vector<int>& s_values,
                              const std::vector<double>& rates) {
    if (s_values.empty() || rates.empty())
        throw std::invalid_argument("sweep needs at least one S and one rate");
    if (!base.stego_dir.empty())
        throw std::invalid_argument("sweep synthesizes stego corpora; stego dir not supported");

    std::vector<SweepRow> rows;
    for (int s : s_values) {
        for (double rate : rates) {
            ExperimentConfig config = base;
            config.s = s;
            config.embed_rate = rate;
            char leaf[64];
            std::snprintf(leaf, sizeof(leaf), "s%d_rate%g", s, rate);
            config.output_dir = base.output_dir / leaf;
            const EvalReport report = run_evaluation(config);
            rows.push_back({s, rate, report.accuracy, feature_dim(s), report.chosen_c,
                            report.chosen_gamma});
        }
    }
    return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open file for writing");
    out << "s,rate,accuracy,feature_dim,chosen_c,chosen_gamma\n";
    for (const SweepRow& row : rows)
        out << row.s << "," << fmt_g17(row.rate) << "," << fmt_g17(row.accuracy) << ","
            << row.dim << "," << fmt_g17(row.chosen_c) << "," << fmt_g17(row.chosen_gamma)
            << "\n";
}

TimingReport time_features(const std::vector<std::filesystem::path>& files, int s,
                           std::uint64_t master_seed, bool strict_load) {
    if (files.empty()) throw DataError("no images to time");
    TimingReport report;
    for (const auto& file : files) {
        const std::string id = file.filename().string();
        const GrayImage img = load_image(file, strict_load);
        const PhaseClock clock;
        const FeatureVector fv = extract_features(img, {s, derive_seed(master_seed, "calib", id)});
        (void)fv;
        const PhaseTiming t = clock.stop(id);
        report.per_image.push_back({id,
                                    static_cast<std::uint64_t>(img.width()) * img.height(),
                                    t.wall_seconds, t.cpu_seconds});
        report.total_wall_seconds += t.wall_seconds;
        report.total_cpu_seconds += t.cpu_seconds;
    }
    return report;
}

} // namespace ppd
