#include <doctest.h>

#include <cmath>
#include <fstream>

#include "helpers.hpp"
#include "specflow/cube.hpp"
#include "specflow/deriv.hpp"
#include "specflow/errors.hpp"

using namespace specflow;
using testutil::TempDir;

TEST_CASE("cube round-trip: zeros") {
    TempDir dir;
    std::vector<Grid> frames(3, Grid(16, 16, 0.0));
    ImageCube c = cube_from_frames(frames);
    save_cube(c, dir / "z.ofc");
    ImageCube r = load_cube(dir / "z.ofc");
    CHECK(r.t == 3);
    CHECK(r.h == 16);
    CHECK(r.w == 16);
    for (double v : r.data) CHECK(v == 0.0);
    // A uniformly zero cube has no blank frames to single out.
    for (auto f : r.valid) CHECK(f == 1);
}

TEST_CASE("cube load: wrong magic is a format error") {
    TempDir dir;
    std::ofstream f(dir / "bad.ofc", std::ios::binary);
    f << "JUNKJUNKJUNKJUNKJUNKJUNK";
    f.close();
    CHECK_THROWS_AS(load_cube(dir / "bad.ofc"), FormatError);
    CHECK_THROWS_AS(load_cube(dir / "missing.ofc"), IoError);
}

TEST_CASE("cube round-trip: random values are bit-exact") {
    TempDir dir;
    std::vector<Grid> frames;
    for (int k = 0; k < 4; ++k) frames.push_back(testutil::random_grid(20, 24, 100 + k, 0.0, 1.0));
    ImageCube c = cube_from_frames(frames, 0.348, 45.0);
    save_cube(c, dir / "r.ofc");
    ImageCube r = load_cube(dir / "r.ofc");
    REQUIRE(r.data.size() == c.data.size());
    double max_diff = 0.0;
    for (size_t i = 0; i < c.data.size(); ++i)
        max_diff = std::max(max_diff, std::fabs(c.data[i] - r.data[i]));
    CHECK(max_diff == 0.0);
    CHECK(r.pixel_scale == c.pixel_scale);
    CHECK(r.cadence == c.cadence);
}

TEST_CASE("cube f32 storage loads with float precision") {
    TempDir dir;
    std::vector<Grid> frames{testutil::random_grid(8, 8, 7), testutil::random_grid(8, 8, 8)};
    ImageCube c = cube_from_frames(frames);
    save_cube(c, dir / "f.ofc", /*as_f32=*/true);
    ImageCube r = load_cube(dir / "f.ofc");
    for (size_t i = 0; i < c.data.size(); ++i)
        CHECK(std::fabs(c.data[i] - r.data[i]) < 1e-6);
}

TEST_CASE("gaussian noise: sigma 0 is the identity") {
    ImageCube c = cube_from_frames({testutil::random_grid(10, 10, 1), Grid(10, 10, 3.0)});
    ImageCube out = add_gaussian_noise(c, 0.0, 99);
    CHECK(out.data == c.data);
    CHECK_THROWS_AS(add_gaussian_noise(c, -1.0, 0), ArgumentError);
}

TEST_CASE("gaussian noise: sample statistics match sigma") {
    // 64 frames of 48x48 gives ~1.5e5 samples; the std estimate has a
    // relative standard error of about 1/sqrt(2 n) ~ 0.2%.
    std::vector<Grid> frames(64, Grid(48, 48, 100.0));
    ImageCube c = cube_from_frames(frames);
    ImageCube noisy = add_gaussian_noise(c, 10.0, 1234);
    double sum = 0.0, sum2 = 0.0;
    for (size_t i = 0; i < c.data.size(); ++i) {
        const double d = noisy.data[i] - c.data[i];
        sum += d;
        sum2 += d * d;
    }
    const double n = static_cast<double>(c.data.size());
    const double std_est = std::sqrt(sum2 / n - (sum / n) * (sum / n));
    CHECK(std_est == doctest::Approx(10.0).epsilon(0.02));
}

TEST_CASE("gaussian noise: deterministic per seed, invalid frames untouched") {
    std::vector<Grid> frames(5, Grid(12, 12, 1.0));
    ImageCube c = mark_missing(cube_from_frames(frames), std::vector<int>{2});
    ImageCube a = add_gaussian_noise(c, 3.0, 77);
    ImageCube b = add_gaussian_noise(c, 3.0, 77);
    CHECK(a.data == b.data);
    CHECK(a.valid == c.valid);
    for (int i = 0; i < 144; ++i) CHECK(a.frame(2)[i] == c.frame(2)[i]);
    ImageCube d = add_gaussian_noise(c, 3.0, 78);
    CHECK(a.data != d.data);
}

TEST_CASE("apply_gradient: identity, uniform scale, ramp") {
    ImageCube c = cube_from_frames({Grid(8, 8, 2.0), Grid(8, 8, 5.0)});

    ImageCube same = apply_gradient(c, Grid(8, 8, 1.0));
    CHECK(same.data == c.data);

    ImageCube twice = apply_gradient(c, Grid(8, 8, 2.0));
    for (size_t i = 0; i < c.data.size(); ++i) CHECK(twice.data[i] == 2.0 * c.data[i]);

    Grid ramp(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) ramp(y, x) = 0.5 + static_cast<double>(x) / 7.0;
    ImageCube ramped = apply_gradient(c, ramp);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) CHECK(ramped.frame(0)[y * 8 + x] == ramp(y, x) * 2.0);

    Grid bad(8, 8, 1.0);
    bad(3, 3) = 0.0;
    CHECK_THROWS_AS(apply_gradient(c, bad), ArgumentError);
    CHECK_THROWS_AS(apply_gradient(c, Grid(4, 4, 1.0)), ArgumentError);
}

TEST_CASE("apply_gradient and noise commute in variance") {
    // With a uniform profile c, gradient(noise(sigma)) and
    // noise(gradient, c*sigma) agree in distribution; compare the sample
    // stds at 3 standard errors.
    std::vector<Grid> frames(40, Grid(32, 32, 10.0));
    ImageCube base = cube_from_frames(frames);
    const Grid profile(32, 32, 2.0);
    const double sigma = 5.0;

    ImageCube path1 = apply_gradient(add_gaussian_noise(base, sigma, 11), profile);
    ImageCube path2 = add_gaussian_noise(apply_gradient(base, profile), 2.0 * sigma, 12);
    ImageCube ref = apply_gradient(base, profile);

    auto sample_std = [&](const ImageCube& cube) {
        double sum2 = 0.0;
        for (size_t i = 0; i < cube.data.size(); ++i) {
            const double d = cube.data[i] - ref.data[i];
            sum2 += d * d;
        }
        return std::sqrt(sum2 / static_cast<double>(cube.data.size()));
    };
    const double n = static_cast<double>(base.data.size());
    const double se = (2.0 * sigma) / std::sqrt(2.0 * n);
    CHECK(std::fabs(sample_std(path1) - 2.0 * sigma) < 3.0 * se);
    CHECK(std::fabs(sample_std(path2) - 2.0 * sigma) < 3.0 * se);
}

TEST_CASE("mark_missing flags frames and validates indices") {
    std::vector<Grid> frames(10, Grid(8, 8, 1.0));
    ImageCube c = cube_from_frames(frames);
    ImageCube m = mark_missing(c, std::vector<int>{3});
    int invalid = 0;
    for (auto f : m.valid) invalid += (f == 0);
    CHECK(invalid == 1);
    CHECK(m.valid[3] == 0);
    CHECK_THROWS_AS(mark_missing(c, std::vector<int>{10}), ArgumentError);
    CHECK_THROWS_AS(mark_missing(c, std::vector<int>{-1}), ArgumentError);
}

TEST_CASE("blank frames are auto-flagged at load") {
    TempDir dir;
    std::vector<Grid> frames(4, Grid(8, 8, 2.0));
    frames[1] = Grid(8, 8, 0.0);
    ImageCube c = cube_from_frames(frames);
    save_cube(c, dir / "blank.ofc");
    ImageCube r = load_cube(dir / "blank.ofc");
    CHECK(r.valid[0] == 1);
    CHECK(r.valid[1] == 0);
    CHECK(r.valid[2] == 1);
    CHECK(r.valid[3] == 1);
}

TEST_CASE("missing frame drops exactly its two pairs") {
    std::vector<Grid> frames;
    for (int k = 0; k < 10; ++k) frames.push_back(testutil::random_grid(16, 16, 500 + k));
    ImageCube c = mark_missing(cube_from_frames(frames), std::vector<int>{5});
    DerivativeProducts p = accumulate_products(c);
    CHECK(p.pair_count == 7);  // pairs (4,5) and (5,6) dropped out of 9
}

TEST_CASE("PGM import: 8-bit and 16-bit") {
    TempDir dir;
    {
        std::ofstream f(dir / "a.pgm", std::ios::binary);
        f << "P5\n# comment\n3 2\n255\n";
        const uint8_t px[6] = {0, 10, 20, 30, 40, 255};
        f.write(reinterpret_cast<const char*>(px), 6);
    }
    Grid g = load_pgm(dir / "a.pgm");
    CHECK(g.ny == 2);
    CHECK(g.nx == 3);
    CHECK(g(0, 1) == 10.0);
    CHECK(g(1, 2) == 255.0);

    {
        std::ofstream f(dir / "b.pgm", std::ios::binary);
        f << "P5 2 1 65535 ";
        const uint8_t px[4] = {0x01, 0x00, 0xff, 0xfe};  // big-endian samples
        f.write(reinterpret_cast<const char*>(px), 4);
    }
    Grid h = load_pgm(dir / "b.pgm");
    CHECK(h(0, 0) == 256.0);
    CHECK(h(0, 1) == 65534.0);

    {
        std::ofstream f(dir / "c.pgm", std::ios::binary);
        f << "P2\n1 1\n255\n0";
    }
    CHECK_THROWS_AS(load_pgm(dir / "c.pgm"), FormatError);
}
