#pragma once

#include <memory>
#include <vector>

#include "specflow/grid.hpp"

namespace specflow {

enum class Boundary { periodic, clamp };

/// Catmull-Rom bicubic sampling of a grid at continuous coordinates.
class BicubicSampler {
public:
    BicubicSampler(const Grid& g, Boundary boundary);
    double operator()(double x, double y) const;

private:
    const Grid& g_;
    Boundary boundary_;
};

/// Trigonometric (periodic band-exact) sampling at continuous coordinates,
/// implemented as 2x-oversampled Gaussian gridding: the spectrum is
/// deconvolved by the kernel transform, inverse-transformed on the fine grid,
/// and samples are gathered with a truncated Gaussian window. Error is at the
/// 1e-11 level for band-limited inputs; Nyquist bins are dropped.
class SpectralSampler {
public:
    explicit SpectralSampler(const Grid& g);
    double operator()(double x, double y) const;

private:
    int nx_, ny_;    // original grid
    int fx_, fy_;    // fine (2x) grid
    Grid fine_;
};

}  // namespace specflow
