#include "specflow/spectral.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "specflow/errors.hpp"
#include "specflow/fft.hpp"
#include "specflow/rng.hpp"

namespace specflow {

namespace {

constexpr char kMagic[4] = {'O', 'F', 'V', '1'};

void check_evaluable(const SpectralVelocity& v) {
    if (v.X <= 0 || v.Y <= 0) throw ArgumentError("velocity has no domain size");
    if (2 * v.n_x >= v.X || 2 * v.n_y >= v.Y)
        throw ArgumentError("mode count too large for the domain (2n must be < X, Y)");
}

// Places the amplitude grid on DFT bins and transforms; the forward kernel
// e^{-2 pi i (i x / X + j y / Y)} evaluated over pixels is exactly a forward
// DFT over the bin-mapped amplitudes.
CGrid evaluate_component(const std::vector<std::complex<double>>& amp, int n_x, int n_y, int X,
                         int Y) {
    CGrid spec(Y, X);
    for (int j = -n_y; j <= n_y; ++j) {
        const int by = ((j % Y) + Y) % Y;
        for (int i = -n_x; i <= n_x; ++i) {
            const int bx = ((i % X) + X) % X;
            spec(by, bx) = amp[static_cast<size_t>(j + n_y) * (2 * n_x + 1) + (i + n_x)];
        }
    }
    fft2(spec, -1);
    return spec;
}

}  // namespace

std::pair<Grid, Grid> evaluate(const SpectralVelocity& v) {
    check_evaluable(v);
    CGrid cx = evaluate_component(v.alpha, v.n_x, v.n_y, v.X, v.Y);
    CGrid cy = evaluate_component(v.beta, v.n_x, v.n_y, v.X, v.Y);
    Grid vx(v.Y, v.X), vy(v.Y, v.X);
    for (size_t k = 0; k < cx.v.size(); ++k) {
        vx.v[k] = cx.v[k].real();
        vy.v[k] = cy.v[k].real();
    }
    return {std::move(vx), std::move(vy)};
}

std::pair<Grid, Grid> evaluate(const SpectralVelocity& v, int height, int width) {
    if (height != v.Y || width != v.X)
        throw ArgumentError("evaluate: requested shape does not match the velocity domain");
    return evaluate(v);
}

double evaluation_imag_residue(const SpectralVelocity& v) {
    check_evaluable(v);
    CGrid cx = evaluate_component(v.alpha, v.n_x, v.n_y, v.X, v.Y);
    CGrid cy = evaluate_component(v.beta, v.n_x, v.n_y, v.X, v.Y);
    double max_im = 0.0, sum_sq = 0.0;
    for (size_t k = 0; k < cx.v.size(); ++k) {
        max_im = std::max({max_im, std::fabs(cx.v[k].imag()), std::fabs(cy.v[k].imag())});
        sum_sq += std::norm(cx.v[k]) + std::norm(cy.v[k]);
    }
    const double rms = std::sqrt(sum_sq / static_cast<double>(cx.v.size()));
    return rms > 0.0 ? max_im / rms : max_im;
}

std::pair<double, double> mean_flow(const SpectralVelocity& v) {
    return {v.a(0, 0).real(), v.b(0, 0).real()};
}

SpectralVelocity subtract_mean_flow(SpectralVelocity v) {
    v.a(0, 0) = 0.0;
    v.b(0, 0) = 0.0;
    return v;
}

SpectralVelocity random_field(int n_x, int n_y, double target_rms, uint64_t seed, int X, int Y) {
    if (target_rms < 0.0) throw ArgumentError("target_rms must be >= 0");
    SpectralVelocity v(n_x, n_y, X, Y);
    if (target_rms == 0.0) return v;

    Rng rng(seed);
    for (auto& c : v.alpha) c = {rng.gaussian(), rng.gaussian()};
    for (auto& c : v.beta) c = {rng.gaussian(), rng.gaussian()};
    symmetrize(v);

    auto [vx, vy] = evaluate(v);
    const double rms = field_rms(vx, vy);
    if (rms <= 0.0) throw ArgumentError("random_field: degenerate draw");
    const double s = target_rms / rms;
    for (auto& c : v.alpha) c *= s;
    for (auto& c : v.beta) c *= s;
    return v;
}

SpectralVelocity project_field(const Grid& vx, const Grid& vy, int n_x, int n_y) {
    if (!vx.same_shape(vy)) throw ArgumentError("project_field: shape mismatch");
    const int X = vx.nx, Y = vx.ny;
    if (2 * n_x >= X || 2 * n_y >= Y)
        throw ArgumentError("project_field: mode count too large for the grid");

    // Inverse of the evaluation kernel: a(i,j) = (1/XY) sum_r v(r) e^{+2 pi i ...}.
    auto project = [&](const Grid& g) {
        CGrid spec(Y, X);
        for (size_t k = 0; k < g.v.size(); ++k) spec.v[k] = g.v[k];
        fft2(spec, +1);
        return spec;
    };
    CGrid sx = project(vx), sy = project(vy);

    SpectralVelocity v(n_x, n_y, X, Y);
    const double norm = 1.0 / (static_cast<double>(X) * Y);
    for (int j = -n_y; j <= n_y; ++j) {
        const int by = ((j % Y) + Y) % Y;
        for (int i = -n_x; i <= n_x; ++i) {
            const int bx = ((i % X) + X) % X;
            v.a(i, j) = sx(by, bx) * norm;
            v.b(i, j) = sy(by, bx) * norm;
        }
    }
    return v;
}

void hexagonal_velocity_at(double amplitude, double wavelength, double x, double y, double& vx,
                           double& vy) {
    const double k = 2.0 * std::numbers::pi / wavelength;
    vx = 0.0;
    vy = 0.0;
    for (int m = 0; m < 3; ++m) {
        const double th = 2.0 * std::numbers::pi * m / 3.0;
        const double kx = k * std::cos(th), ky = k * std::sin(th);
        const double s = std::sin(kx * x + ky * y);
        vx -= amplitude * kx * s;
        vy -= amplitude * ky * s;
    }
}

std::pair<Grid, Grid> hexagonal_field(double amplitude, double wavelength, int X, int Y) {
    if (!(wavelength > 0.0)) throw ArgumentError("hexagonal wavelength must be positive");
    Grid vx(Y, X), vy(Y, X);
    for (int y = 0; y < Y; ++y)
        for (int x = 0; x < X; ++x) {
            double ux, uy;
            hexagonal_velocity_at(amplitude, wavelength, x, y, ux, uy);
            vx(y, x) = ux;
            vy(y, x) = uy;
        }
    return {std::move(vx), std::move(vy)};
}

double symmetry_deviation(const SpectralVelocity& v) {
    double max_dev = 0.0, sum_sq = 0.0;
    for (int j = -v.n_y; j <= v.n_y; ++j)
        for (int i = -v.n_x; i <= v.n_x; ++i) {
            max_dev = std::max(max_dev, std::abs(v.a(i, j) - std::conj(v.a(-i, -j))));
            max_dev = std::max(max_dev, std::abs(v.b(i, j) - std::conj(v.b(-i, -j))));
            sum_sq += std::norm(v.a(i, j)) + std::norm(v.b(i, j));
        }
    const double rms = std::sqrt(sum_sq / static_cast<double>(2 * v.mode_count()));
    return rms > 0.0 ? max_dev / rms : max_dev;
}

void symmetrize(SpectralVelocity& v) {
    for (int j = -v.n_y; j <= v.n_y; ++j)
        for (int i = -v.n_x; i <= v.n_x; ++i) {
            if (j < 0 || (j == 0 && i < 0)) continue;  // handle each pair once
            const auto am = 0.5 * (v.a(i, j) + std::conj(v.a(-i, -j)));
            const auto bm = 0.5 * (v.b(i, j) + std::conj(v.b(-i, -j)));
            v.a(i, j) = am;
            v.a(-i, -j) = std::conj(am);
            v.b(i, j) = bm;
            v.b(-i, -j) = std::conj(bm);
        }
    v.a(0, 0) = v.a(0, 0).real();
    v.b(0, 0) = v.b(0, 0).real();
}

SpectralVelocity load_velocity(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open velocity file: " + path.string());
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("not a velocity file (bad magic): " + path.string());

    uint32_t vals[4];
    f.read(reinterpret_cast<char*>(vals), sizeof(vals));
    if (!f) throw FormatError("velocity file truncated");
    if (vals[0] > 4096 || vals[1] > 4096 || vals[2] == 0 || vals[3] == 0)
        throw FormatError("velocity header out of range");

    SpectralVelocity v(static_cast<int>(vals[0]), static_cast<int>(vals[1]),
                       static_cast<int>(vals[2]), static_cast<int>(vals[3]));
    const std::streamsize bytes = std::streamsize(v.mode_count() * 2 * sizeof(double));
    f.read(reinterpret_cast<char*>(v.alpha.data()), bytes);
    f.read(reinterpret_cast<char*>(v.beta.data()), bytes);
    if (!f) throw FormatError("velocity file truncated");
    for (const auto& c : v.alpha)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw FormatError("velocity file contains non-finite amplitude");
    return v;
}

void save_velocity(const SpectralVelocity& v, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write velocity file: " + path.string());
    f.write(kMagic, 4);
    const uint32_t vals[4] = {static_cast<uint32_t>(v.n_x), static_cast<uint32_t>(v.n_y),
                              static_cast<uint32_t>(v.X), static_cast<uint32_t>(v.Y)};
    f.write(reinterpret_cast<const char*>(vals), sizeof(vals));
    const std::streamsize bytes = std::streamsize(v.mode_count() * 2 * sizeof(double));
    f.write(reinterpret_cast<const char*>(v.alpha.data()), bytes);
    f.write(reinterpret_cast<const char*>(v.beta.data()), bytes);
    if (!f) throw IoError("short write: " + path.string());
}

void write_field_csv(const std::filesystem::path& path, const Grid& vx, const Grid& vy,
                     double unit_scale) {
    if (!vx.same_shape(vy)) throw ArgumentError("write_field_csv: shape mismatch");
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write CSV: " + path.string());
    f << "x,y,vx,vy\n";
    f.precision(10);
    for (int y = 0; y < vx.ny; ++y)
        for (int x = 0; x < vx.nx; ++x)
            f << x << ',' << y << ',' << vx(y, x) * unit_scale << ',' << vy(y, x) * unit_scale
              << '\n';
    if (!f) throw IoError("short write: " + path.string());
}

}  // namespace specflow
