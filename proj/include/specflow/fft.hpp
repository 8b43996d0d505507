#pragma once

#include <complex>

#include "specflow/grid.hpp"

namespace specflow {

/// In-place 2-D DFT on row-major (ny, nx) data.
/// sign -1: kernel e^{-2*pi*i*(kx*x/nx + ky*y/ny)} (forward).
/// sign +1: conjugate kernel, unnormalized.
void fft2(std::complex<double>* data, int ny, int nx, int sign);
void fft2(CGrid& g, int sign);

/// Forward DFT of a real field into a freshly allocated complex grid.
CGrid fft2_of(const Grid& g);

/// Smallest n' >= n whose prime factors are all in {2, 3, 5, 7}.
int next_fast_size(int n);

}  // namespace specflow
