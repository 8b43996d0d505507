#include "specflow/fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "specflow/errors.hpp"

namespace specflow {

namespace {
// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex g_plan_mutex;
}  // namespace

void fft2(std::complex<double>* data, int ny, int nx, int sign) {
    if (ny <= 0 || nx <= 0) throw ArgumentError("fft2: non-positive size");
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        plan = fftw_plan_dft_2d(ny, nx, p, p, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        fftw_destroy_plan(plan);
    }
}

void fft2(CGrid& g, int sign) { fft2(g.v.data(), g.ny, g.nx, sign); }

CGrid fft2_of(const Grid& g) {
    CGrid out(g.ny, g.nx);
    for (size_t k = 0; k < g.v.size(); ++k) out.v[k] = g.v[k];
    fft2(out, -1);
    return out;
}

int next_fast_size(int n) {
    if (n < 1) return 1;
    for (int m = n;; ++m) {
        int r = m;
        for (int f : {2, 3, 5, 7})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

}  // namespace specflow
