#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace specflow {

/// Dense H x W scalar field, row-major, indexed (y, x).
struct Grid {
    int ny = 0;
    int nx = 0;
    std::vector<double> v;

    Grid() = default;
    Grid(int ny_, int nx_, double fill = 0.0)
        : ny(ny_), nx(nx_), v(static_cast<size_t>(ny_) * nx_, fill) {}

    double& operator()(int y, int x) { return v[static_cast<size_t>(y) * nx + x]; }
    double operator()(int y, int x) const { return v[static_cast<size_t>(y) * nx + x]; }

    size_t size() const { return v.size(); }
    bool same_shape(const Grid& o) const { return ny == o.ny && nx == o.nx; }
};

/// Complex counterpart, used for spectra and DFT tables.
struct CGrid {
    int ny = 0;
    int nx = 0;
    std::vector<std::complex<double>> v;

    CGrid() = default;
    CGrid(int ny_, int nx_) : ny(ny_), nx(nx_), v(static_cast<size_t>(ny_) * nx_) {}

    std::complex<double>& operator()(int y, int x) { return v[static_cast<size_t>(y) * nx + x]; }
    const std::complex<double>& operator()(int y, int x) const {
        return v[static_cast<size_t>(y) * nx + x];
    }
    size_t size() const { return v.size(); }
};

double grid_mean(const Grid& g);
double grid_rms(const Grid& g);

/// RMS of the two-component field magnitude: sqrt(mean(gx^2 + gy^2)).
double field_rms(const Grid& gx, const Grid& gy);

double max_abs_diff(const Grid& a, const Grid& b);

}  // namespace specflow
