#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ppd/embed.hpp"
#include "ppd/errors.hpp"
#include "ppd/experiment.hpp"
#include "ppd/image.hpp"

#include "support/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ppd_harness_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path make_corpus(const std::string& name, int count, int size, std::uint64_t seed0) {
    const fs::path dir = fresh_dir(name);
    for (int i = 0; i < count; ++i) {
        char leaf[32];
        std::snprintf(leaf, sizeof(leaf), "img%03d.pgm", i);
        ppd::save_image(testsupport::natural_image(size, size, seed0 + i), dir / leaf);
    }
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("feature CSV round-trip") {
    const fs::path dir = fresh_dir("csv");
    std::vector<ppd::FeatureRecord> records;
    ppd::Xoshiro256ss rng(4);
    for (int i = 0; i < 5; ++i) {
        ppd::FeatureRecord rec;
        rec.id = "cover/img" + std::to_string(i) + ".pgm";
        rec.label = i % 2 == 0 ? "cover" : "stego";
        rec.s = 2;
        rec.seed = rng.next();
        for (int k = 0; k < 16; ++k) rec.features.push_back(rng.next_unit());
        records.push_back(std::move(rec));
    }
    ppd::write_feature_csv(dir / "f.csv", records);
    const auto loaded = ppd::read_feature_csv(dir / "f.csv");
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].id == records[i].id);
        CHECK(loaded[i].label == records[i].label);
        CHECK(loaded[i].s == records[i].s);
        CHECK(loaded[i].seed == records[i].seed);
        CHECK(loaded[i].features == records[i].features); // 17 digits round-trip
    }
}

TEST_CASE("feature CSV rejects malformed input") {
    const fs::path dir = fresh_dir("badcsv");
    {
        std::ofstream out(dir / "bad.csv");
        out << "image_id,label,S,seed,f1\nx,maybe,2,0,0.5\n";
    }
    CHECK_THROWS_AS(ppd::read_feature_csv(dir / "bad.csv"), ppd::IoError);
    {
        std::ofstream out(dir / "drift.csv");
        out << "image_id,label,S,seed,f1,f2\na,cover,2,0,0.5,0.5\n"; // S=2 needs 16 features
    }
    CHECK_THROWS_AS(ppd::read_feature_csv(dir / "drift.csv"), ppd::DataError);
}

TEST_CASE("list_images filters and sorts") {
    const fs::path dir = fresh_dir("listing");
    ppd::save_image(ppd::GrayImage::filled(4, 4, 1), dir / "b.pgm");
    ppd::save_image(ppd::GrayImage::filled(4, 4, 1), dir / "a.pgm");
    std::ofstream(dir / "notes.txt") << "ignored";
    const auto files = ppd::list_images(dir);
    REQUIRE(files.size() == 2);
    CHECK(files[0].filename() == "a.pgm");
    CHECK(files[1].filename() == "b.pgm");
    CHECK_THROWS_AS(ppd::list_images(dir / "nope"), ppd::IoError);
}

TEST_CASE("corpus features are deterministic and id-keyed") {
    const fs::path dir = make_corpus("detfeat", 4, 32, 900);
    const auto files = ppd::list_images(dir);
    const auto a = ppd::extract_corpus_features(files, "cover/", "cover", 3, 42, false);
    const auto b = ppd::extract_corpus_features(files, "cover/", "cover", 3, 42, false);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == "cover/" + files[i].filename().string());
        CHECK(a[i].features == b[i].features);
        CHECK(a[i].seed == b[i].seed);
    }
    // different master seed, different calibration
    const auto c = ppd::extract_corpus_features(files, "cover/", "cover", 3, 43, false);
    CHECK(a[0].seed != c[0].seed);
}

TEST_CASE("run_evaluation at desk scale") {
    const fs::path covers = make_corpus("evalcovers", 20, 48, 100);

    ppd::ExperimentConfig config;
    config.cover_dir = covers;
    config.embed_rate = 1.0;
    config.s = 3;
    config.seed = 7;
    config.output_dir = fresh_dir("evalout");
    // small grid keeps the unit test quick; the acceptance suite runs the full one
    config.grid.c_values = {1.0, 8.0, 64.0};
    config.grid.gamma_values = {0.125, 1.0, 8.0};
    config.grid.folds = 5;

    const ppd::EvalReport report = ppd::run_evaluation(config);

    CHECK(report.train_cover == 10);
    CHECK(report.train_stego == 10);
    CHECK(report.tp + report.fn == report.test_stego);
    CHECK(report.tn + report.fp == report.test_cover);
    CHECK(report.accuracy ==
          doctest::Approx(double(report.tp + report.tn) /
                          (report.test_cover + report.test_stego)));
    CHECK(report.accuracy > 0.5);

    for (const char* name : {"report.json", "report.txt", "features.csv", "model.svm", "roc.csv",
                             "timing.txt"})
        CHECK(fs::exists(config.output_dir / name));

    // byte-identical artifacts on a second run with the same config and seed
    ppd::ExperimentConfig rerun = config;
    rerun.output_dir = fresh_dir("evalout2");
    ppd::run_evaluation(rerun);
    for (const char* name : {"report.json", "report.txt", "features.csv", "model.svm", "roc.csv"})
        CHECK(slurp(config.output_dir / name) == slurp(rerun.output_dir / name));

    // a different seed changes the feature cache
    ppd::ExperimentConfig other = config;
    other.seed = 8;
    other.output_dir = fresh_dir("evalout3");
    ppd::run_evaluation(other);
    CHECK(slurp(config.output_dir / "features.csv") != slurp(other.output_dir / "features.csv"));
}

TEST_CASE("evaluation config errors") {
    const fs::path covers = make_corpus("cfgcovers", 6, 32, 300);
    ppd::ExperimentConfig config;
    config.cover_dir = covers;
    config.output_dir = fresh_dir("cfgout");

    SUBCASE("stego dir and embed rate are mutually exclusive") {
        config.embed_rate = 1.0;
        config.stego_dir = covers;
        CHECK_THROWS_AS(ppd::run_evaluation(config), std::invalid_argument);
    }
    SUBCASE("one stego source is required") {
        CHECK_THROWS_AS(ppd::run_evaluation(config), std::invalid_argument);
    }
    SUBCASE("split must keep both halves nonempty") {
        config.embed_rate = 1.0;
        config.split_fraction = 1.5;
        CHECK_THROWS_AS(ppd::run_evaluation(config), std::invalid_argument);
    }
    SUBCASE("empty corpus") {
        config.cover_dir = fresh_dir("emptydir");
        config.embed_rate = 1.0;
        CHECK_THROWS_AS(ppd::run_evaluation(config), ppd::DataError);
    }
    SUBCASE("unequal external corpora") {
        config.stego_dir = make_corpus("cfgstego", 4, 32, 400);
        CHECK_THROWS_AS(ppd::run_evaluation(config), ppd::DataError);
    }
}

TEST_CASE("external stego corpus splits disjointly") {
    const fs::path covers = make_corpus("extcovers", 8, 32, 500);
    const fs::path stegodir = fresh_dir("extstego");
    {
        const auto files = ppd::list_images(covers);
        for (std::size_t i = 0; i < files.size(); ++i) {
            const ppd::GrayImage img = ppd::load_image(files[i]);
            ppd::save_image(ppd::embed_full(img, 1000 + i), stegodir / files[i].filename());
        }
    }

    ppd::ExperimentConfig config;
    config.cover_dir = covers;
    config.stego_dir = stegodir;
    config.s = 2;
    config.seed = 5;
    config.output_dir = fresh_dir("extout");
    config.grid.c_values = {8.0};
    config.grid.gamma_values = {1.0};
    config.grid.folds = 2;

    const ppd::EvalReport report = ppd::run_evaluation(config);
    CHECK(report.train_cover + report.test_cover == 8);
    CHECK(report.train_stego + report.test_stego == 8);
    CHECK(report.train_cover == report.train_stego);
}

TEST_CASE("sweep with a single cell matches a direct evaluation") {
    const fs::path covers = make_corpus("sweepcovers", 12, 40, 700);

    ppd::ExperimentConfig base;
    base.cover_dir = covers;
    base.seed = 11;
    base.output_dir = fresh_dir("sweepout");
    base.grid.c_values = {1.0, 16.0};
    base.grid.gamma_values = {0.5, 4.0};
    base.grid.folds = 3;

    const auto rows = ppd::sweep_s(base, {2}, {1.0});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].s == 2);
    CHECK(rows[0].dim == 16);

    ppd::ExperimentConfig direct = base;
    direct.s = 2;
    direct.embed_rate = 1.0;
    direct.output_dir = fresh_dir("sweepdirect");
    const ppd::EvalReport report = ppd::run_evaluation(direct);
    CHECK(rows[0].accuracy == report.accuracy);
    CHECK(rows[0].chosen_c == report.chosen_c);

    const fs::path csv = fresh_dir("sweepcsv") / "sweep.csv";
    ppd::write_sweep_csv(csv, rows);
    const std::string text = slurp(csv);
    CHECK(text.find("s,rate,accuracy,feature_dim,chosen_c,chosen_gamma") == 0);
    CHECK(text.find(",16,") != std::string::npos);
}

TEST_CASE("S=4 stays within five points of the best of {3,4,5} at rate 1") {
    const fs::path covers = make_corpus("sweep345", 16, 48, 2200);

    ppd::ExperimentConfig base;
    base.cover_dir = covers;
    base.seed = 21;
    base.output_dir = fresh_dir("sweep345out");
    base.grid.c_values = {1.0, 8.0, 64.0};
    base.grid.gamma_values = {0.125, 1.0, 8.0};
    base.grid.folds = 4;

    const auto rows = ppd::sweep_s(base, {3, 4, 5}, {1.0});
    REQUIRE(rows.size() == 3);
    double best = 0, s4 = 0;
    for (const auto& row : rows) {
        best = std::max(best, row.accuracy);
        if (row.s == 4) s4 = row.accuracy;
    }
    CHECK(s4 >= best - 0.05);
}

TEST_CASE("feature timing report") {
    const fs::path dir = fresh_dir("timing");
    ppd::save_image(testsupport::natural_image(96, 96, 1), dir / "small.pgm");
    ppd::save_image(testsupport::natural_image(960, 960, 2), dir / "large.pgm");

    CHECK_THROWS_AS(ppd::time_features({}, 4, 1), ppd::DataError);

    const auto report = ppd::time_features(ppd::list_images(dir), 4, 1);
    REQUIRE(report.per_image.size() == 2);
    CHECK(report.per_image[0].pixel_count == 960ULL * 960); // sorted: large.pgm first
    CHECK(report.per_image[1].pixel_count == 96ULL * 96);
    CHECK(report.total_wall_seconds > 0);
    // 100x the pixels must cost clearly more than 2x the time
    CHECK(report.per_image[0].wall_seconds > 2 * report.per_image[1].wall_seconds);
}
