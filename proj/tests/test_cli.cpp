// Drives the installed CLI binary end to end: subcommands, exit codes and
// byte-determinism of the emitted artifacts.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ppd/embed.hpp"
#include "ppd/image.hpp"

#include "support/synthetic.hpp"

namespace fs = std::filesystem;

#ifndef PPDSTEG_BIN
#error "PPDSTEG_BIN must point at the CLI binary"
#endif

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(PPDSTEG_BIN) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ppd_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Corpus {
    fs::path dir;
    int count;
};

Corpus small_corpus(const std::string& name, int count = 12, int size = 64) {
    Corpus corpus{fresh_dir(name), count};
    for (int i = 0; i < count; ++i) {
        char leaf[32];
        std::snprintf(leaf, sizeof(leaf), "img%02d.pgm", i);
        ppd::save_image(testsupport::natural_image(size, size, 600 + i), corpus.dir / leaf);
    }
    return corpus;
}

} // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(run_cli("") == 1);                       // missing subcommand
    CHECK(run_cli("embed --in a.pgm") == 1);       // missing required flags
    CHECK(run_cli("no-such-command --x 1") == 1);
    CHECK(run_cli("--help") == 0);
}

TEST_CASE("data errors exit with 2") {
    const fs::path dir = fresh_dir("dataerr");
    CHECK(run_cli("embed --in " + (dir / "missing.pgm").string() + " --out " +
                  (dir / "o.pgm").string() + " --seed 1") == 2);
    CHECK(run_cli("features --cover-dir " + (dir / "void").string() + " --seed 1 --out " +
                  (dir / "f.csv").string()) == 2);
}

TEST_CASE("embed subcommand writes a valid +/-1 stego image") {
    const fs::path dir = fresh_dir("embed");
    const ppd::GrayImage img = testsupport::natural_image(48, 48, 7);
    ppd::save_image(img, dir / "cover.pgm");

    CHECK(run_cli("embed --in " + (dir / "cover.pgm").string() + " --out " +
                  (dir / "stego.pgm").string() + " --rate 0.5 --seed 31") == 0);

    const ppd::GrayImage stego = ppd::load_image(dir / "stego.pgm");
    CHECK(stego == ppd::embed_rate(img, {31, 0.5}));
}

TEST_CASE("features -> train -> predict -> roc pipeline") {
    const Corpus corpus = small_corpus("pipeline");
    const fs::path work = fresh_dir("pipelinework");
    const std::string features = (work / "features.csv").string();

    CHECK(run_cli("features --cover-dir " + corpus.dir.string() + " --stego-dir " +
                  corpus.dir.string() + " --s 3 --seed 5 --out " + features) == 0);
    {
        std::ifstream in(features);
        std::string line;
        int rows = 0;
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 1 + 2 * corpus.count);
    }

    // note: identical dirs make a nonsense classifier; this only checks the wiring
    const std::string model = (work / "model.svm").string();
    CHECK(run_cli("train --features " + features + " --model " + model +
                  " --seed 5 --c 8 --gamma 0.5") == 0);
    CHECK(fs::exists(model));

    const std::string preds = (work / "preds.csv").string();
    CHECK(run_cli("predict --model " + model + " --features " + features + " --out " + preds) ==
          0);
    CHECK(slurp(preds).find("image_id,decision_value,label") == 0);

    const std::string roc = (work / "roc.csv").string();
    CHECK(run_cli("roc --model " + model + " --features " + features + " --out " + roc) == 0);
    CHECK(slurp(roc).find("fpr,tpr,threshold") == 0);
}

TEST_CASE("evaluate is byte-deterministic through the CLI") {
    const Corpus corpus = small_corpus("evaldet");
    const fs::path out_a = fresh_dir("evaldet_a");
    const fs::path out_b = fresh_dir("evaldet_b");

    const std::string common = "evaluate --cover-dir " + corpus.dir.string() +
                               " --embed-rate 1.0 --s 2 --seed 12 --folds 3 --out-dir ";
    CHECK(run_cli(common + out_a.string()) == 0);
    CHECK(run_cli(common + out_b.string()) == 0);

    for (const char* name : {"report.json", "report.txt", "features.csv", "model.svm", "roc.csv"})
        CHECK(slurp(out_a / name) == slurp(out_b / name));

    // conflicting stego sources are a usage error
    CHECK(run_cli("evaluate --cover-dir " + corpus.dir.string() + " --stego-dir " +
                  corpus.dir.string() + " --embed-rate 1.0 --s 2 --seed 12 --out-dir " +
                  (out_a / "x").string()) == 1);
}

TEST_CASE("diagnostics subcommands") {
    const fs::path dir = fresh_dir("diag");
    CHECK(run_cli("shift-experiment --block 100,101,100,101,100 --s 4 --trials 2000 --seed 3 "
                  "--out " +
                  (dir / "shift.csv").string()) == 0);
    CHECK(slurp(dir / "shift.csv").find("dest_class,count,share") == 0);

    CHECK(run_cli("theoretical-hist --s 3 --range-max 5 --out " + (dir / "theo.csv").string()) ==
          0);
    CHECK(slurp(dir / "theo.csv").find("index,count") == 0);

    const Corpus corpus = small_corpus("timing", 3, 48);
    CHECK(run_cli("time-features --dir " + corpus.dir.string() + " --s 4 --seed 4") == 0);
}
