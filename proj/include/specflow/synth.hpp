#pragma once

#include <cstdint>

#include "specflow/cube.hpp"
#include "specflow/grid.hpp"
#include "specflow/interp.hpp"

namespace specflow {

enum class Interp { bicubic, spectral };

struct AdvectionConfig {
    int n_frames = 2;
    int substeps = 1;  // integration steps per frame
    Interp interpolation = Interp::bicubic;
    Boundary boundary = Boundary::periodic;
};

/// Passive advection of a seed image under a steady velocity field (pixels
/// per frame, given on the pixel grid). Frame 0 is the seed; frame t samples
/// the seed at the foot of the characteristic traced backward through t
/// frames of flow (RK4 per substep). Per-frame displacement is limited to
/// 2 px.
ImageCube advect(const Grid& seed, const Grid& vx, const Grid& vy, const AdvectionConfig& config);

/// Band-limited random texture with spectral power concentrated near
/// wavelength feature_scale (pixels); mean 0, RMS 1. Deterministic per seed.
Grid make_texture(int width, int height, double feature_scale, uint64_t seed);

/// Adds a superposition of traveling plane waves (oscillatory contaminant)
/// to every frame; total wave RMS equals `amplitude` in counts.
ImageCube add_traveling_waves(const ImageCube& cube, double amplitude, uint64_t seed,
                              int n_waves = 4);

}  // namespace specflow
