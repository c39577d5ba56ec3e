#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "ppd/errors.hpp"
#include "ppd/image.hpp"

#include "support/pngwrite.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using ppd::GrayImage;

namespace {

fs::path temp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ppd_image_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write_bytes(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

} // namespace

TEST_CASE("3x3 all-zero P5 file") {
    const fs::path path = temp_file("zero3.pgm");
    write_bytes(path, std::string("P5\n3 3\n255\n") + std::string(9, '\0'));
    const GrayImage img = ppd::load_image(path);
    CHECK(img.width() == 3);
    CHECK(img.height() == 3);
    for (std::uint8_t p : img.pixels()) CHECK(p == 0);
}

TEST_CASE("P5 header with single-space separators") {
    const fs::path path = temp_file("fourthree.pgm");
    write_bytes(path, std::string("P5 4 3 255 ") + std::string(12, 'x'));
    const GrayImage img = ppd::load_image(path);
    CHECK(img.width() == 4);
    CHECK(img.height() == 3);
}

TEST_CASE("header comments are skipped") {
    const fs::path path = temp_file("comments.pgm");
    write_bytes(path, std::string("P5\n# a comment\n3 # inline\n3\n255\n") + std::string(9, 'a'));
    const GrayImage img = ppd::load_image(path);
    CHECK(img.width() == 3);
    CHECK(img.at(0, 0) == 'a');
}

TEST_CASE("maxval other than 255 is rejected") {
    const fs::path path = temp_file("deep.pgm");
    write_bytes(path, std::string("P5\n3 3\n65535\n") + std::string(18, '\0'));
    CHECK_THROWS_WITH_AS(ppd::load_image(path), doctest::Contains("unsupported maxval"),
                         ppd::IoError);
}

TEST_CASE("ASCII PGM (P2) is not supported") {
    const fs::path path = temp_file("ascii.pgm");
    write_bytes(path, "P2\n3 3\n255\n0 0 0 0 0 0 0 0 0\n");
    CHECK_THROWS_AS(ppd::load_image(path), ppd::IoError);
}

TEST_CASE("truncated raster is rejected") {
    const fs::path path = temp_file("short.pgm");
    write_bytes(path, std::string("P5\n4 4\n255\n") + std::string(7, '\0'));
    CHECK_THROWS_AS(ppd::load_image(path), ppd::IoError);
}

TEST_CASE("missing file") {
    CHECK_THROWS_AS(ppd::load_image(temp_file("does_not_exist.pgm")), ppd::IoError);
}

TEST_CASE("images smaller than 3x3 cannot exist") {
    CHECK_THROWS_AS(GrayImage(1, 1, std::vector<std::uint8_t>(1)), ppd::DataError);
    CHECK_THROWS_AS(GrayImage(2, 5, std::vector<std::uint8_t>(10)), ppd::DataError);
    const fs::path path = temp_file("tiny.pgm");
    write_bytes(path, std::string("P5\n2 2\n255\n") + std::string(4, '\0'));
    CHECK_THROWS_AS(ppd::load_image(path), ppd::IoError);
}

TEST_CASE("pixel buffer must match dimensions") {
    CHECK_THROWS_AS(GrayImage(3, 3, std::vector<std::uint8_t>(8)), ppd::DataError);
}

TEST_CASE("round-trip identity on random images") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const int w = 3 + static_cast<int>(seed * 13 % 60);
        const int h = 3 + static_cast<int>(seed * 7 % 40);
        const GrayImage img = testsupport::random_image(w, h, seed);
        const fs::path path = temp_file("roundtrip.pgm");
        ppd::save_image(img, path);
        CHECK(ppd::load_image(path) == img);
    }
}

TEST_CASE("round-trip of a 2100x1500 raster") {
    const GrayImage img = testsupport::random_image(2100, 1500, 99);
    const fs::path path = temp_file("big.pgm");
    ppd::save_image(img, path);
    const GrayImage back = ppd::load_image(path);
    CHECK(back.pixels() == img.pixels());
}

TEST_CASE("grayscale PNG read") {
    const fs::path path = temp_file("gray.png");
    const GrayImage img = testsupport::random_image(17, 9, 4);
    testsupport::write_png(path, 17, 9, img.pixels());
    CHECK(ppd::load_image(path) == img);
    CHECK(ppd::load_image(path, /*strict=*/true) == img);
}

TEST_CASE("color PNG converts with integer BT.601 luma") {
    const int w = 5, h = 4;
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * h * 3);
    ppd::Xoshiro256ss rng(11);
    for (auto& v : rgb) v = static_cast<std::uint8_t>(rng.below(256));
    const fs::path path = temp_file("color.png");
    testsupport::write_png(path, w, h, rgb, 3);

    const GrayImage img = ppd::load_image(path);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            const std::size_t k = (static_cast<std::size_t>(i) * w + j) * 3;
            const unsigned expected = (299u * rgb[k] + 587u * rgb[k + 1] + 114u * rgb[k + 2] + 500u) / 1000u;
            CHECK(img.at(i, j) == expected);
        }
}

TEST_CASE("color PNG is rejected in strict mode") {
    const fs::path path = temp_file("color_strict.png");
    testsupport::write_png(path, 4, 4, std::vector<std::uint8_t>(48, 7), 3);
    CHECK_THROWS_AS(ppd::load_image(path, /*strict=*/true), ppd::IoError);
}

TEST_CASE("16-bit PNG is rejected") {
    const fs::path path = temp_file("deep.png");
    testsupport::write_png(path, 4, 4, std::vector<std::uint8_t>(32, 0), 1, 16);
    CHECK_THROWS_WITH_AS(ppd::load_image(path), doctest::Contains("bit depth"), ppd::IoError);
}

TEST_CASE("loader never yields out-of-range intensities") {
    // uint8 storage makes this structural; spot-check the accessor anyway.
    const GrayImage img = testsupport::random_image(31, 17, 5);
    for (int i = 0; i < img.height(); ++i)
        for (int j = 0; j < img.width(); ++j) CHECK(img.at(i, j) <= 255);
}
