#include "specflow/assemble.hpp"

#include <complex>

#include "specflow/errors.hpp"
#include "specflow/fft.hpp"

namespace specflow {

namespace {

// Extracts centered-frequency bins [-mx..mx] x [-my..my] from a full-size
// forward transform.
CGrid extract_bins(const CGrid& full, int mx, int my) {
    CGrid out(2 * my + 1, 2 * mx + 1);
    for (int n = -my; n <= my; ++n) {
        const int by = ((n % full.ny) + full.ny) % full.ny;
        for (int m = -mx; m <= mx; ++m) {
            const int bx = ((m % full.nx) + full.nx) % full.nx;
            out(n + my, m + mx) = full(by, bx);
        }
    }
    return out;
}

}  // namespace

ProductSpectra product_spectra(const DerivativeProducts& products, int n_x, int n_y) {
    if (n_x < 0 || n_y < 0) throw ArgumentError("mode counts must be >= 0");
    if (4 * n_x >= products.w || 4 * n_y >= products.h)
        throw ArgumentError("mode count too large for the image (need 4n < width and height)");

    ProductSpectra s;
    s.n_x = n_x;
    s.n_y = n_y;
    s.X = products.w;
    s.Y = products.h;
    s.pxx = extract_bins(fft2_of(products.sxx), 2 * n_x, 2 * n_y);
    s.pxy = extract_bins(fft2_of(products.sxy), 2 * n_x, 2 * n_y);
    s.pyy = extract_bins(fft2_of(products.syy), 2 * n_x, 2 * n_y);
    s.tx = extract_bins(fft2_of(products.stx), n_x, n_y);
    s.ty = extract_bins(fft2_of(products.sty), n_x, n_y);
    return s;
}

NormalSystem assemble_implicit(const DerivativeProducts& products, int n_x, int n_y) {
    ProductSpectra s = product_spectra(products, n_x, n_y);
    NormalSystem sys;
    sys.n_x = n_x;
    sys.n_y = n_y;
    sys.X = s.X;
    sys.Y = s.Y;
    sys.pxx = std::move(s.pxx);
    sys.pxy = std::move(s.pxy);
    sys.pyy = std::move(s.pyy);

    const int nb = sys.block();
    sys.rhs.resize(2 * nb);
    for (int l = -n_y; l <= n_y; ++l)
        for (int k = -n_x; k <= n_x; ++k) {
            const int r = sys.amp_index(k, l);
            sys.rhs(r) = -s.tx(l + n_y, k + n_x);
            sys.rhs(nb + r) = -s.ty(l + n_y, k + n_x);
        }
    return sys;
}

void densify(NormalSystem& sys) {
    if (sys.dense) return;
    const int n_x = sys.n_x, n_y = sys.n_y;
    const int nb = sys.block();
    Eigen::MatrixXcd m(2 * nb, 2 * nb);
    // Block entry (k,l; i,j) is the quadratic table at the index sum
    // (k+i, l+j); tables span [-2n..2n], so every sum is in range.
#pragma omp parallel for schedule(static)
    for (int row = 0; row < nb; ++row) {
        const int l = row / (2 * n_x + 1) - n_y;
        const int k = row % (2 * n_x + 1) - n_x;
        for (int j = -n_y; j <= n_y; ++j)
            for (int i = -n_x; i <= n_x; ++i) {
                const int col = sys.amp_index(i, j);
                const auto xx = sys.pxx(l + j + 2 * n_y, k + i + 2 * n_x);
                const auto xy = sys.pxy(l + j + 2 * n_y, k + i + 2 * n_x);
                const auto yy = sys.pyy(l + j + 2 * n_y, k + i + 2 * n_x);
                m(row, col) = xx;
                m(row, nb + col) = xy;
                m(nb + row, col) = xy;
                m(nb + row, nb + col) = yy;
            }
    }
    sys.dense = std::move(m);
}

NormalSystem assemble_dense(const DerivativeProducts& products, int n_x, int n_y) {
    NormalSystem sys = assemble_implicit(products, n_x, n_y);
    densify(sys);
    return sys;
}

StructuredOperator::StructuredOperator(const NormalSystem& sys)
    : n_x_(sys.n_x), n_y_(sys.n_y) {
    lx_ = next_fast_size(6 * n_x_ + 1);
    ly_ = next_fast_size(6 * n_y_ + 1);
    const size_t total = static_cast<size_t>(lx_) * ly_;
    auto padded_fft = [&](const CGrid& table) {
        std::vector<std::complex<double>> buf(total);
        for (int n = 0; n < table.ny; ++n)
            for (int m = 0; m < table.nx; ++m)
                buf[static_cast<size_t>(n) * lx_ + m] = table(n, m);
        fft2(buf.data(), ly_, lx_, -1);
        return buf;
    };
    fxx_ = padded_fft(sys.pxx);
    fxy_ = padded_fft(sys.pxy);
    fyy_ = padded_fft(sys.pyy);
}

Eigen::VectorXcd StructuredOperator::apply(const Eigen::VectorXcd& x) const {
    const int nb = (2 * n_x_ + 1) * (2 * n_y_ + 1);
    if (x.size() != 2 * nb) throw ArgumentError("structured matvec: bad vector length");
    const size_t total = static_cast<size_t>(lx_) * ly_;

    // The block action sum_{i,j} P(k+i, l+j) x(i,j) becomes a convolution of
    // P with the index-flipped vector y(u,v) = x(-u,-v); after padding, the
    // output for (k,l) sits at padded index (l+3n_y, k+3n_x).
    auto flip_pad = [&](int offset) {
        std::vector<std::complex<double>> buf(total);
        for (int v = -n_y_; v <= n_y_; ++v)
            for (int u = -n_x_; u <= n_x_; ++u) {
                const int src = (-v + n_y_) * (2 * n_x_ + 1) + (-u + n_x_);
                buf[static_cast<size_t>(v + n_y_) * lx_ + (u + n_x_)] = x(offset + src);
            }
        fft2(buf.data(), ly_, lx_, -1);
        return buf;
    };
    std::vector<std::complex<double>> ya = flip_pad(0);
    std::vector<std::complex<double>> yb = flip_pad(nb);

    std::vector<std::complex<double>> za(total), zb(total);
    for (size_t k = 0; k < total; ++k) {
        za[k] = fxx_[k] * ya[k] + fxy_[k] * yb[k];
        zb[k] = fxy_[k] * ya[k] + fyy_[k] * yb[k];
    }
    fft2(za.data(), ly_, lx_, +1);
    fft2(zb.data(), ly_, lx_, +1);

    Eigen::VectorXcd out(2 * nb);
    const double norm = 1.0 / (static_cast<double>(lx_) * ly_);
    for (int l = -n_y_; l <= n_y_; ++l)
        for (int k = -n_x_; k <= n_x_; ++k) {
            const size_t src = static_cast<size_t>(l + 3 * n_y_) * lx_ + (k + 3 * n_x_);
            const int dst = (l + n_y_) * (2 * n_x_ + 1) + (k + n_x_);
            out(dst) = za[src] * norm;
            out(nb + dst) = zb[src] * norm;
        }
    return out;
}

Eigen::VectorXcd matvec_structured(const NormalSystem& sys, const Eigen::VectorXcd& x) {
    return StructuredOperator(sys).apply(x);
}

Eigen::VectorXcd matvec_dense(const NormalSystem& sys, const Eigen::VectorXcd& x) {
    if (!sys.dense) throw ArgumentError("matvec_dense: dense form not materialized");
    return *sys.dense * x;
}

Eigen::VectorXcd pack_amplitudes(const SpectralVelocity& v) {
    const int nb = static_cast<int>(v.mode_count());
    Eigen::VectorXcd x(2 * nb);
    for (int k = 0; k < nb; ++k) {
        x(k) = v.alpha[k];
        x(nb + k) = v.beta[k];
    }
    return x;
}

SpectralVelocity unpack_amplitudes(const Eigen::VectorXcd& x, int n_x, int n_y, int X, int Y) {
    SpectralVelocity v(n_x, n_y, X, Y);
    const int nb = static_cast<int>(v.mode_count());
    if (x.size() != 2 * nb) throw ArgumentError("unpack_amplitudes: bad vector length");
    for (int k = 0; k < nb; ++k) {
        v.alpha[k] = x(k);
        v.beta[k] = x(nb + k);
    }
    return v;
}

}  // namespace specflow
