#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "specflow/grid.hpp"

namespace specflow {

/// Truncated Fourier representation of a 2-D velocity field on an X x Y
/// pixel domain:
///
///   v_x(x, y) = sum_{i=-n_x..n_x} sum_{j=-n_y..n_y} alpha(i,j) e^{-2 pi I (i x / X + j y / Y)}
///
/// and the same for v_y with beta. Real fields correspond to amplitudes with
/// conjugate symmetry a(-i,-j) = conj(a(i,j)).
struct SpectralVelocity {
    int n_x = 0, n_y = 0;  // retained modes per axis
    int X = 0, Y = 0;      // domain size in pixels
    std::vector<std::complex<double>> alpha, beta;  // (2n_y+1) x (2n_x+1), row-major in j

    SpectralVelocity() = default;
    SpectralVelocity(int nx, int ny, int X_, int Y_)
        : n_x(nx), n_y(ny), X(X_), Y(Y_),
          alpha(static_cast<size_t>(2 * ny + 1) * (2 * nx + 1)),
          beta(static_cast<size_t>(2 * ny + 1) * (2 * nx + 1)) {}

    size_t idx(int i, int j) const {
        return static_cast<size_t>(j + n_y) * (2 * n_x + 1) + (i + n_x);
    }
    std::complex<double>& a(int i, int j) { return alpha[idx(i, j)]; }
    const std::complex<double>& a(int i, int j) const { return alpha[idx(i, j)]; }
    std::complex<double>& b(int i, int j) { return beta[idx(i, j)]; }
    const std::complex<double>& b(int i, int j) const { return beta[idx(i, j)]; }
    size_t mode_count() const { return alpha.size(); }
};

/// Evaluates both components on the X x Y pixel grid (FFT-based).
std::pair<Grid, Grid> evaluate(const SpectralVelocity& v);

/// Same, with an explicit shape check against (height, width) = (Y, X).
std::pair<Grid, Grid> evaluate(const SpectralVelocity& v, int height, int width);

/// Largest relative imaginary residue of the grid evaluation,
/// max|Im| / RMS(field); near zero for conjugate-symmetric amplitudes.
double evaluation_imag_residue(const SpectralVelocity& v);

/// The spatial mean of the field: (Re alpha(0,0), Re beta(0,0)).
std::pair<double, double> mean_flow(const SpectralVelocity& v);

/// Copy with the (0,0) modes zeroed.
SpectralVelocity subtract_mean_flow(SpectralVelocity v);

/// Random amplitudes, flat over the retained modes, symmetrized, then scaled
/// so the evaluated grid RMS equals target_rms. Deterministic per seed.
SpectralVelocity random_field(int n_x, int n_y, double target_rms, uint64_t seed, int X, int Y);

/// DFT projection of grid velocity fields onto the truncated basis (exact
/// when the field lies in the span).
SpectralVelocity project_field(const Grid& vx, const Grid& vy, int n_x, int n_y);

/// Divergent velocity of a hexagonal cellular pattern: v = A grad(phi) with
/// phi = sum_{m=1..3} cos(k_m . r), unit wavevectors at 0/120/240 degrees
/// scaled to 2 pi / wavelength. Generally not periodic on the domain.
std::pair<Grid, Grid> hexagonal_field(double amplitude, double wavelength, int X, int Y);

/// Point evaluation of the same analytic field.
void hexagonal_velocity_at(double amplitude, double wavelength, double x, double y,
                           double& vx, double& vy);

/// Conjugate-symmetry deviation: max |a(i,j) - conj(a(-i,-j))| over both
/// amplitude sets, relative to the amplitude RMS.
double symmetry_deviation(const SpectralVelocity& v);

/// In-place projection onto conjugate symmetry: a <- (a + conj(flip a)) / 2.
void symmetrize(SpectralVelocity& v);

SpectralVelocity load_velocity(const std::filesystem::path& path);
void save_velocity(const SpectralVelocity& v, const std::filesystem::path& path);

/// Evaluated-grid export: header "x,y,vx,vy", one row per pixel.
void write_field_csv(const std::filesystem::path& path, const Grid& vx, const Grid& vy,
                     double unit_scale = 1.0);

}  // namespace specflow
