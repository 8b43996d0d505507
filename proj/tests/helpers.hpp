#pragma once

#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "specflow/cube.hpp"
#include "specflow/grid.hpp"
#include "specflow/rng.hpp"
#include "specflow/spectral.hpp"
#include "specflow/synth.hpp"

namespace testutil {

namespace fs = std::filesystem;

// Unique scratch directory, removed on destruction.
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("specflow_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    fs::path operator/(const std::string& name) const { return path / name; }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

inline specflow::Grid random_grid(int ny, int nx, uint64_t seed, double lo = -1.0,
                                  double hi = 1.0) {
    specflow::Rng rng(seed);
    specflow::Grid g(ny, nx);
    for (auto& v : g.v) v = lo + (hi - lo) * rng.uniform();
    return g;
}

// Direct double-sum evaluation of the Fourier velocity expansion (the
// oracle counterpart of the FFT-based evaluate()).
inline std::pair<specflow::Grid, specflow::Grid> evaluate_naive(
    const specflow::SpectralVelocity& v) {
    specflow::Grid vx(v.Y, v.X), vy(v.Y, v.X);
    for (int y = 0; y < v.Y; ++y)
        for (int x = 0; x < v.X; ++x) {
            std::complex<double> sx = 0.0, sy = 0.0;
            for (int j = -v.n_y; j <= v.n_y; ++j)
                for (int i = -v.n_x; i <= v.n_x; ++i) {
                    const double phase = -2.0 * std::numbers::pi *
                                         (static_cast<double>(i) * x / v.X +
                                          static_cast<double>(j) * y / v.Y);
                    const std::complex<double> e(std::cos(phase), std::sin(phase));
                    sx += v.a(i, j) * e;
                    sy += v.b(i, j) * e;
                }
            vx(y, x) = sx.real();
            vy(y, x) = sy.real();
        }
    return {vx, vy};
}

// Direct DFT of a real field at one frequency pair.
inline std::complex<double> dft_bin_naive(const specflow::Grid& g, int m, int n) {
    std::complex<double> acc = 0.0;
    for (int y = 0; y < g.ny; ++y)
        for (int x = 0; x < g.nx; ++x) {
            const double phase = -2.0 * std::numbers::pi *
                                 (static_cast<double>(m) * x / g.nx +
                                  static_cast<double>(n) * y / g.ny);
            acc += g(y, x) * std::complex<double>(std::cos(phase), std::sin(phase));
        }
    return acc;
}

// Runs the CLI binary named by SPECFLOW_CLI; returns the exit code and
// captures stdout+stderr to a file in dir.
inline int run_cli(const TempDir& dir, const std::string& args, std::string* output = nullptr) {
    const char* exe = std::getenv("SPECFLOW_CLI");
    if (!exe) return -1;
    const fs::path log = dir / ("cli_log_" + std::to_string(TempDir::counter()++) + ".txt");
    const std::string cmd =
        std::string("\"") + exe + "\" " + args + " > " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (output) {
        std::ifstream f(log);
        output->assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    }
    if (rc == -1) return -1;
    return WEXITSTATUS(rc);
}

inline std::vector<char> read_bytes(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// Ground-truth dataset: band-limited texture advected by an in-span random
// field.
struct SynthCase {
    specflow::ImageCube cube;
    specflow::SpectralVelocity truth;
    specflow::Grid truth_x, truth_y;
};

inline SynthCase make_advected_case(int size, int modes, double rms, int frames,
                                    double feature_scale, uint64_t seed,
                                    specflow::Interp interp = specflow::Interp::spectral,
                                    int substeps = 2) {
    SynthCase s;
    specflow::Grid seed_img = specflow::make_texture(size, size, feature_scale, seed);
    s.truth = specflow::random_field(modes, modes, rms, seed + 1, size, size);
    std::tie(s.truth_x, s.truth_y) = specflow::evaluate(s.truth);
    specflow::AdvectionConfig cfg;
    cfg.n_frames = frames;
    cfg.substeps = substeps;
    cfg.interpolation = interp;
    cfg.boundary = specflow::Boundary::periodic;
    s.cube = specflow::advect(seed_img, s.truth_x, s.truth_y, cfg);
    return s;
}

inline double relative_error(const specflow::SpectralVelocity& fit, const specflow::Grid& tx,
                             const specflow::Grid& ty, int border) {
    auto [fx, fy] = specflow::evaluate(fit);
    double dist2 = 0.0, ref2 = 0.0;
    long long count = 0;
    for (int y = border; y < tx.ny - border; ++y)
        for (int x = border; x < tx.nx - border; ++x) {
            const double dx = fx(y, x) - tx(y, x), dy = fy(y, x) - ty(y, x);
            dist2 += dx * dx + dy * dy;
            ref2 += tx(y, x) * tx(y, x) + ty(y, x) * ty(y, x);
            ++count;
        }
    return std::sqrt(dist2 / count) / std::sqrt(ref2 / count);
}

}  // namespace testutil
