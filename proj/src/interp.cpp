#include "specflow/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "specflow/errors.hpp"
#include "specflow/fft.hpp"

namespace specflow {

namespace {

inline int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

inline double wrap_coord(double x, int n) {
    x = std::fmod(x, n);
    return x < 0.0 ? x + n : x;
}

// Gaussian gridding parameters: 2x oversampling, 24-tap window. tau balances
// window truncation against deconvolution aliasing at ~2.7e-12.
constexpr int kHalfTaps = 12;
const double kTau = kHalfTaps / (2.0 * std::numbers::sqrt2 * std::numbers::pi);

}  // namespace

BicubicSampler::BicubicSampler(const Grid& g, Boundary boundary) : g_(g), boundary_(boundary) {
    if (g.ny < 4 || g.nx < 4) throw ArgumentError("bicubic sampling needs at least 4x4 grids");
}

double BicubicSampler::operator()(double x, double y) const {
    if (boundary_ == Boundary::periodic) {
        x = wrap_coord(x, g_.nx);
        y = wrap_coord(y, g_.ny);
    } else {
        x = std::clamp(x, 0.0, static_cast<double>(g_.nx - 1));
        y = std::clamp(y, 0.0, static_cast<double>(g_.ny - 1));
    }
    const int ix = static_cast<int>(std::floor(x));
    const int iy = static_cast<int>(std::floor(y));
    const double tx = x - ix, ty = y - iy;

    // Catmull-Rom weights.
    auto weights = [](double t, double w[4]) {
        const double t2 = t * t, t3 = t2 * t;
        w[0] = 0.5 * (-t3 + 2.0 * t2 - t);
        w[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
        w[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
        w[3] = 0.5 * (t3 - t2);
    };
    double wx[4], wy[4];
    weights(tx, wx);
    weights(ty, wy);

    int cols[4], rows[4];
    for (int k = 0; k < 4; ++k) {
        const int cx = ix - 1 + k, cy = iy - 1 + k;
        if (boundary_ == Boundary::periodic) {
            cols[k] = wrap(cx, g_.nx);
            rows[k] = wrap(cy, g_.ny);
        } else {
            cols[k] = std::clamp(cx, 0, g_.nx - 1);
            rows[k] = std::clamp(cy, 0, g_.ny - 1);
        }
    }
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) {
        double row_acc = 0.0;
        for (int b = 0; b < 4; ++b) row_acc += wx[b] * g_(rows[a], cols[b]);
        acc += wy[a] * row_acc;
    }
    return acc;
}

SpectralSampler::SpectralSampler(const Grid& g) : nx_(g.nx), ny_(g.ny) {
    if (g.ny < 4 || g.nx < 4) throw ArgumentError("spectral sampling needs at least 4x4 grids");
    fx_ = 2 * nx_;
    fy_ = 2 * ny_;

    CGrid spec = fft2_of(g);
    CGrid fine(fy_, fx_);
    const int kx_lo = -(nx_ - 1) / 2, kx_hi = nx_ / 2;  // Nyquist (even size) excluded below
    const int ky_lo = -(ny_ - 1) / 2, ky_hi = ny_ / 2;
    for (int ky = ky_lo; ky <= ky_hi; ++ky) {
        if (2 * ky == ny_) continue;
        const double wy = 2.0 * std::numbers::pi * ky / fy_;
        for (int kx = kx_lo; kx <= kx_hi; ++kx) {
            if (2 * kx == nx_) continue;
            const double wx = 2.0 * std::numbers::pi * kx / fx_;
            // Deconvolve by the kernel transform sqrt(4 pi tau) e^{-tau w^2}
            // per axis.
            const double deconv =
                std::exp(kTau * (wx * wx + wy * wy)) / (4.0 * std::numbers::pi * kTau);
            fine(wrap(ky, fy_), wrap(kx, fx_)) = spec(wrap(ky, ny_), wrap(kx, nx_)) * deconv;
        }
    }
    fft2(fine, +1);
    fine_ = Grid(fy_, fx_);
    const double norm = 1.0 / (static_cast<double>(nx_) * ny_);
    for (size_t k = 0; k < fine.v.size(); ++k) fine_.v[k] = fine.v[k].real() * norm;
}

double SpectralSampler::operator()(double x, double y) const {
    const double x2 = wrap_coord(2.0 * x, fx_);
    const double y2 = wrap_coord(2.0 * y, fy_);
    const int ix0 = static_cast<int>(std::floor(x2)) - (kHalfTaps - 1);
    const int iy0 = static_cast<int>(std::floor(y2)) - (kHalfTaps - 1);

    double wx[2 * kHalfTaps], wy[2 * kHalfTaps];
    int cx[2 * kHalfTaps], cy[2 * kHalfTaps];
    for (int k = 0; k < 2 * kHalfTaps; ++k) {
        const double dx = x2 - (ix0 + k);
        const double dy = y2 - (iy0 + k);
        wx[k] = std::exp(-dx * dx / (4.0 * kTau));
        wy[k] = std::exp(-dy * dy / (4.0 * kTau));
        cx[k] = wrap(ix0 + k, fx_);
        cy[k] = wrap(iy0 + k, fy_);
    }
    double acc = 0.0;
    for (int a = 0; a < 2 * kHalfTaps; ++a) {
        const double* row = fine_.v.data() + static_cast<size_t>(cy[a]) * fx_;
        double row_acc = 0.0;
        for (int b = 0; b < 2 * kHalfTaps; ++b) row_acc += wx[b] * row[cx[b]];
        acc += wy[a] * row_acc;
    }
    return acc;
}

}  // namespace specflow
