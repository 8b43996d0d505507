#pragma once

#include <utility>

#include "specflow/cube.hpp"
#include "specflow/grid.hpp"

namespace specflow {

/// Time-accumulated derivative products over all usable consecutive frame
/// pairs. The 2-pixel frame border is excluded (weight 0 there); inside it
/// every pixel receives pair_count contributions.
struct DerivativeProducts {
    int h = 0, w = 0;
    Grid sxx;     // sum It-pairs of Ix^2
    Grid sxy;     // Ix*Iy
    Grid syy;     // Iy^2
    Grid stx;     // It*Ix
    Grid sty;     // It*Iy
    Grid weight;  // contributions per pixel (pair_count interior, 0 on border)
    int pair_count = 0;
};

/// frame_b - frame_a, units counts/frame.
Grid temporal_derivative(const Grid& frame_a, const Grid& frame_b);

/// 4th-order centered gradients of the pair average m = (a + b)/2:
///   m_x = (-m(+2) + 8 m(+1) - 8 m(-1) + m(-2)) / 12
/// per axis. The 2-pixel rim is set to zero.
std::pair<Grid, Grid> spatial_gradient(const Grid& frame_a, const Grid& frame_b);

/// Accumulates the five product fields over consecutive frame pairs.
/// Normally a pair contributes only when both frames are valid;
/// include_invalid = true uses every consecutive pair regardless of flags.
DerivativeProducts accumulate_products(const ImageCube& cube, bool include_invalid = false);

}  // namespace specflow
