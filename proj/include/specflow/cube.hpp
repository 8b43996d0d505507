#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "specflow/grid.hpp"

namespace specflow {

/// T x H x W intensity sequence with per-frame validity flags.
/// Treated as immutable: every mutating operation returns a new cube.
struct ImageCube {
    int t = 0, h = 0, w = 0;
    std::vector<double> data;    // frame-major, row-major within a frame
    std::vector<uint8_t> valid;  // 1 = frame usable
    double pixel_scale = 0.0;    // length per pixel, 0 = unset
    double cadence = 0.0;        // time per frame, 0 = unset

    const double* frame(int k) const { return data.data() + static_cast<size_t>(k) * h * w; }
    double* frame(int k) { return data.data() + static_cast<size_t>(k) * h * w; }

    Grid frame_grid(int k) const;
    int valid_count() const;
};

ImageCube cube_from_frames(const std::vector<Grid>& frames, double pixel_scale = 0.0,
                           double cadence = 0.0);

/// Binary cube file. Frames that are entirely zero are auto-flagged invalid
/// on load (blank-frame detection).
ImageCube load_cube(const std::filesystem::path& path);
void save_cube(const ImageCube& cube, const std::filesystem::path& path, bool as_f32 = false);

/// Independent N(0, sigma^2) perturbation of every pixel of every valid
/// frame. Invalid frames are left untouched.
ImageCube add_gaussian_noise(const ImageCube& cube, double sigma, uint64_t seed);

/// Pointwise multiplication of every frame by a positive H x W profile
/// (smooth large-scale intensity gradients, vignetting and the like).
ImageCube apply_gradient(const ImageCube& cube, const Grid& profile);

/// apply_gradient with a uniform profile.
ImageCube scale_intensity(const ImageCube& cube, double factor);

ImageCube mark_missing(const ImageCube& cube, std::span<const int> indices);

/// Frames in reverse order (validity flags follow their frames).
ImageCube reverse_time(const ImageCube& cube);

/// Sub-sequence of `count` frames starting at `first`.
ImageCube slice_frames(const ImageCube& cube, int first, int count);

/// Binary P5 PGM (8- or 16-bit), converted to double.
Grid load_pgm(const std::filesystem::path& path);

}  // namespace specflow
