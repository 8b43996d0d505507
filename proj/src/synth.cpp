#include "specflow/synth.hpp"

#include <cmath>
#include <memory>
#include <numbers>

#include "specflow/errors.hpp"
#include "specflow/fft.hpp"
#include "specflow/rng.hpp"

namespace specflow {

namespace {

double max_speed(const Grid& vx, const Grid& vy) {
    double m = 0.0;
    for (size_t k = 0; k < vx.v.size(); ++k)
        m = std::max(m, std::hypot(vx.v[k], vy.v[k]));
    return m;
}

}  // namespace

ImageCube advect(const Grid& seed, const Grid& vx, const Grid& vy, const AdvectionConfig& config) {
    if (!vx.same_shape(seed) || !vy.same_shape(seed))
        throw ArgumentError("advect: velocity shape must match the seed");
    if (config.n_frames < 2) throw ArgumentError("advect: need at least 2 frames");
    if (config.substeps < 1) throw ArgumentError("advect: substeps must be >= 1");
    if (config.interpolation == Interp::spectral && config.boundary == Boundary::clamp)
        throw ArgumentError("advect: spectral interpolation requires a periodic boundary");
    if (max_speed(vx, vy) > 2.0)
        throw ArgumentError(
            "advect: per-frame displacement exceeds 2 px; reduce the field amplitude "
            "(substeps only refine the integration, not this limit)");

    const int ny = seed.ny, nx = seed.nx;
    const bool clamped = config.boundary == Boundary::clamp;
    // Velocity fields of interest are smooth, so bicubic lookups along the
    // characteristics are accurate regardless of the seed interpolation mode.
    BicubicSampler vel_x(vx, config.boundary), vel_y(vy, config.boundary);

    std::unique_ptr<BicubicSampler> bicubic;
    std::unique_ptr<SpectralSampler> spectral;
    if (config.interpolation == Interp::bicubic)
        bicubic = std::make_unique<BicubicSampler>(seed, config.boundary);
    else
        spectral = std::make_unique<SpectralSampler>(seed);
    auto sample_seed = [&](double x, double y) {
        return bicubic ? (*bicubic)(x, y) : (*spectral)(x, y);
    };

    ImageCube cube;
    cube.t = config.n_frames;
    cube.h = ny;
    cube.w = nx;
    cube.data.resize(static_cast<size_t>(cube.t) * ny * nx);
    cube.valid.assign(cube.t, 1);
    std::copy(seed.v.begin(), seed.v.end(), cube.frame(0));

    // Characteristic feet, advanced backward one frame at a time; with a
    // steady field, continuing the integration is exact composition.
    std::vector<double> px(static_cast<size_t>(ny) * nx), py(px.size());
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
            px[static_cast<size_t>(y) * nx + x] = x;
            py[static_cast<size_t>(y) * nx + x] = y;
        }

    const double h = 1.0 / config.substeps;
    for (int f = 1; f < cube.t; ++f) {
        double* out = cube.frame(f);
#pragma omp parallel for schedule(static)
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                const size_t c = static_cast<size_t>(y) * nx + x;
                double cx = px[c], cy = py[c];
                for (int s = 0; s < config.substeps; ++s) {
                    const double k1x = -vel_x(cx, cy), k1y = -vel_y(cx, cy);
                    const double a1x = cx + 0.5 * h * k1x, a1y = cy + 0.5 * h * k1y;
                    const double k2x = -vel_x(a1x, a1y), k2y = -vel_y(a1x, a1y);
                    const double a2x = cx + 0.5 * h * k2x, a2y = cy + 0.5 * h * k2y;
                    const double k3x = -vel_x(a2x, a2y), k3y = -vel_y(a2x, a2y);
                    const double a3x = cx + h * k3x, a3y = cy + h * k3y;
                    const double k4x = -vel_x(a3x, a3y), k4y = -vel_y(a3x, a3y);
                    cx += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
                    cy += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
                    if (clamped) {
                        cx = std::clamp(cx, 0.0, static_cast<double>(nx - 1));
                        cy = std::clamp(cy, 0.0, static_cast<double>(ny - 1));
                    }
                }
                px[c] = cx;
                py[c] = cy;
                out[c] = sample_seed(cx, cy);
            }
        }
    }
    return cube;
}

Grid make_texture(int width, int height, double feature_scale, uint64_t seed) {
    if (width < 8 || height < 8) throw ArgumentError("make_texture: size must be at least 8x8");
    if (!(feature_scale >= 2.0)) throw ArgumentError("make_texture: feature_scale must be >= 2");

    Rng rng(seed);
    Grid noise(height, width);
    for (auto& v : noise.v) v = rng.gaussian();

    CGrid spec = fft2_of(noise);
    const double k0 = 1.0 / feature_scale;  // cycles per pixel
    const double bw = 0.15 * k0;            // keeps the band narrow around k0
    for (int fy = 0; fy < height; ++fy) {
        const int cy = fy <= height / 2 ? fy : fy - height;
        for (int fx = 0; fx < width; ++fx) {
            const int cx = fx <= width / 2 ? fx : fx - width;
            double amp = 0.0;
            const bool nyquist = (2 * cx == width) || (2 * cy == height);
            if (!(cx == 0 && cy == 0) && !nyquist) {
                const double k = std::hypot(static_cast<double>(cx) / width,
                                            static_cast<double>(cy) / height);
                const double d = (k - k0) / bw;
                amp = std::exp(-0.5 * d * d);
            }
            spec(fy, fx) *= amp;
        }
    }
    fft2(spec, +1);

    Grid out(height, width);
    const double norm = 1.0 / (static_cast<double>(width) * height);
    for (size_t k = 0; k < out.v.size(); ++k) out.v[k] = spec.v[k].real() * norm;
    const double mean = grid_mean(out);
    for (auto& v : out.v) v -= mean;
    const double rms = grid_rms(out);
    if (rms <= 0.0) throw ArgumentError("make_texture: degenerate draw");
    for (auto& v : out.v) v /= rms;
    return out;
}

ImageCube add_traveling_waves(const ImageCube& cube, double amplitude, uint64_t seed,
                              int n_waves) {
    if (amplitude < 0.0) throw ArgumentError("wave amplitude must be >= 0");
    if (n_waves < 1) throw ArgumentError("need at least one wave");
    ImageCube out = cube;
    if (amplitude == 0.0) return out;

    Rng rng(seed);
    struct Wave {
        double kx, ky, omega, phase;
    };
    std::vector<Wave> waves(n_waves);
    for (auto& w : waves) {
        const double theta = 2.0 * std::numbers::pi * rng.uniform();
        const double wavelength = 10.0 + 20.0 * rng.uniform();   // px
        const double period = 4.5 + 9.0 * rng.uniform();         // frames
        const double k = 2.0 * std::numbers::pi / wavelength;
        w.kx = k * std::cos(theta);
        w.ky = k * std::sin(theta);
        w.omega = 2.0 * std::numbers::pi / period;
        w.phase = 2.0 * std::numbers::pi * rng.uniform();
    }
    const double per_wave = amplitude * std::sqrt(2.0 / n_waves);

    for (int t = 0; t < cube.t; ++t) {
        double* p = out.frame(t);
        for (int y = 0; y < cube.h; ++y)
            for (int x = 0; x < cube.w; ++x) {
                double add = 0.0;
                for (const auto& w : waves)
                    add += per_wave * std::cos(w.kx * x + w.ky * y - w.omega * t + w.phase);
                p[static_cast<size_t>(y) * cube.w + x] += add;
            }
    }
    return out;
}

}  // namespace specflow
