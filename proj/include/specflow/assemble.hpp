#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>

#include "specflow/deriv.hpp"
#include "specflow/grid.hpp"
#include "specflow/spectral.hpp"

namespace specflow {

/// DFT tables of the five product fields. The quadratic tables cover
/// frequencies m in [-2n_x..2n_x], n in [-2n_y..2n_y] (index [n+2n_y][m+2n_x]);
/// the right-hand-side tables cover [-n_x..n_x] x [-n_y..n_y].
struct ProductSpectra {
    int n_x = 0, n_y = 0;
    int X = 0, Y = 0;
    CGrid pxx, pxy, pyy;  // (4n_y+1) x (4n_x+1)
    CGrid tx, ty;         // (2n_y+1) x (2n_x+1)
};

ProductSpectra product_spectra(const DerivativeProducts& products, int n_x, int n_y);

/// The least-squares normal system for the spectral amplitudes. Unknowns are
/// ordered [alpha block; beta block], each block indexed (j + n_y)*(2n_x+1) +
/// (i + n_x). Block (k,l; i,j) entries are the quadratic tables sampled at the
/// mode-index sum (k+i, l+j); the right-hand side is the negated DFT of the
/// temporal product fields.
struct NormalSystem {
    int n_x = 0, n_y = 0;
    int X = 0, Y = 0;
    CGrid pxx, pxy, pyy;                   // implicit form (always present)
    Eigen::VectorXcd rhs;                  // length dim()
    std::optional<Eigen::MatrixXcd> dense; // present after assemble_dense

    int block() const { return (2 * n_x + 1) * (2 * n_y + 1); }
    int dim() const { return 2 * block(); }
    int amp_index(int i, int j) const { return (j + n_y) * (2 * n_x + 1) + (i + n_x); }
};

NormalSystem assemble_implicit(const DerivativeProducts& products, int n_x, int n_y);
NormalSystem assemble_dense(const DerivativeProducts& products, int n_x, int n_y);

/// Materializes the dense matrix of an implicit system (in place).
void densify(NormalSystem& sys);

/// Fast operator form of the system matrix. Because entries depend on mode
/// index sums only, each block acts as a (flipped) 2-D convolution, applied
/// here with zero-padded FFTs in O(n^2 log n).
class StructuredOperator {
public:
    explicit StructuredOperator(const NormalSystem& sys);
    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
    int dim() const { return 2 * (2 * n_x_ + 1) * (2 * n_y_ + 1); }

private:
    int n_x_, n_y_;
    int lx_, ly_;  // padded transform size, >= 6n+1 per axis
    std::vector<std::complex<double>> fxx_, fxy_, fyy_;  // FFTs of padded tables
};

/// One-shot structured matvec (builds the operator internally).
Eigen::VectorXcd matvec_structured(const NormalSystem& sys, const Eigen::VectorXcd& x);

/// Dense matvec for cross-checks; requires the dense form.
Eigen::VectorXcd matvec_dense(const NormalSystem& sys, const Eigen::VectorXcd& x);

/// Packing between amplitude vectors and SpectralVelocity.
Eigen::VectorXcd pack_amplitudes(const SpectralVelocity& v);
SpectralVelocity unpack_amplitudes(const Eigen::VectorXcd& x, int n_x, int n_y, int X, int Y);

}  // namespace specflow
