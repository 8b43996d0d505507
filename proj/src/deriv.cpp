#include "specflow/deriv.hpp"

#include "specflow/errors.hpp"

namespace specflow {

Grid temporal_derivative(const Grid& frame_a, const Grid& frame_b) {
    if (!frame_a.same_shape(frame_b)) throw ArgumentError("temporal_derivative: shape mismatch");
    Grid out(frame_a.ny, frame_a.nx);
    for (size_t k = 0; k < out.v.size(); ++k) out.v[k] = frame_b.v[k] - frame_a.v[k];
    return out;
}

std::pair<Grid, Grid> spatial_gradient(const Grid& frame_a, const Grid& frame_b) {
    if (!frame_a.same_shape(frame_b)) throw ArgumentError("spatial_gradient: shape mismatch");
    const int ny = frame_a.ny, nx = frame_a.nx;
    if (ny < 5 || nx < 5) throw ArgumentError("spatial_gradient: needs at least 5x5 frames");

    Grid m(ny, nx);
    for (size_t k = 0; k < m.v.size(); ++k) m.v[k] = 0.5 * (frame_a.v[k] + frame_b.v[k]);

    Grid gx(ny, nx), gy(ny, nx);
#pragma omp parallel for schedule(static)
    for (int y = 2; y < ny - 2; ++y) {
        for (int x = 2; x < nx - 2; ++x) {
            gx(y, x) = (-m(y, x + 2) + 8.0 * m(y, x + 1) - 8.0 * m(y, x - 1) + m(y, x - 2)) / 12.0;
            gy(y, x) = (-m(y + 2, x) + 8.0 * m(y + 1, x) - 8.0 * m(y - 1, x) + m(y - 2, x)) / 12.0;
        }
    }
    return {std::move(gx), std::move(gy)};
}

DerivativeProducts accumulate_products(const ImageCube& cube, bool include_invalid) {
    const int ny = cube.h, nx = cube.w;
    if (ny < 5 || nx < 5) throw ArgumentError("accumulate_products: frames too small");
    if (cube.t < 2) throw DegenerateDataError("accumulate_products: need at least two frames");

    DerivativeProducts p;
    p.h = ny;
    p.w = nx;
    p.sxx = Grid(ny, nx);
    p.sxy = Grid(ny, nx);
    p.syy = Grid(ny, nx);
    p.stx = Grid(ny, nx);
    p.sty = Grid(ny, nx);
    p.weight = Grid(ny, nx);

    for (int t = 0; t + 1 < cube.t; ++t) {
        if (!include_invalid && !(cube.valid[t] && cube.valid[t + 1])) continue;
        const double* a = cube.frame(t);
        const double* b = cube.frame(t + 1);
#pragma omp parallel for schedule(static)
        for (int y = 2; y < ny - 2; ++y) {
            for (int x = 2; x < nx - 2; ++x) {
                const size_t c = static_cast<size_t>(y) * nx + x;
                const double it = b[c] - a[c];
                auto mid = [&](int yy, int xx) {
                    const size_t k = static_cast<size_t>(yy) * nx + xx;
                    return 0.5 * (a[k] + b[k]);
                };
                const double ix = (-mid(y, x + 2) + 8.0 * mid(y, x + 1) - 8.0 * mid(y, x - 1) +
                                   mid(y, x - 2)) / 12.0;
                const double iy = (-mid(y + 2, x) + 8.0 * mid(y + 1, x) - 8.0 * mid(y - 1, x) +
                                   mid(y - 2, x)) / 12.0;
                p.sxx.v[c] += ix * ix;
                p.sxy.v[c] += ix * iy;
                p.syy.v[c] += iy * iy;
                p.stx.v[c] += it * ix;
                p.sty.v[c] += it * iy;
                p.weight.v[c] += 1.0;
            }
        }
        ++p.pair_count;
    }

    if (p.pair_count == 0)
        throw DegenerateDataError("no valid consecutive frame pair in the cube");
    return p;
}

}  // namespace specflow
