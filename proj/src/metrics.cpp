#include "specflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "specflow/deriv.hpp"
#include "specflow/errors.hpp"

namespace specflow {

MeritValue merit_fields(const ImageCube& cube, const Grid& vx, const Grid& vy,
                        bool include_invalid) {
    if (vx.ny != cube.h || vx.nx != cube.w || !vx.same_shape(vy))
        throw ArgumentError("merit: velocity shape must match frames");
    const int ny = cube.h, nx = cube.w;
    if (ny < 5 || nx < 5) throw ArgumentError("merit: frames too small");

    MeritValue m;
    int pairs = 0;
    for (int t = 0; t + 1 < cube.t; ++t) {
        if (!include_invalid && !(cube.valid[t] && cube.valid[t + 1])) continue;
        ++pairs;
        const double* a = cube.frame(t);
        const double* b = cube.frame(t + 1);
        double chi2 = 0.0, chi0 = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : chi2, chi0)
        for (int y = 2; y < ny - 2; ++y) {
            for (int x = 2; x < nx - 2; ++x) {
                const size_t c = static_cast<size_t>(y) * nx + x;
                const double it = b[c] - a[c];
                auto mid = [&](int yy, int xx) {
                    const size_t k = static_cast<size_t>(yy) * nx + xx;
                    return 0.5 * (a[k] + b[k]);
                };
                const double ix = (-mid(y, x + 2) + 8.0 * mid(y, x + 1) - 8.0 * mid(y, x - 1) +
                                   mid(y, x - 2)) / 12.0;
                const double iy = (-mid(y + 2, x) + 8.0 * mid(y + 1, x) - 8.0 * mid(y - 1, x) +
                                   mid(y - 2, x)) / 12.0;
                const double res = it + vx.v[c] * ix + vy.v[c] * iy;
                chi2 += res * res;
                chi0 += it * it;
            }
        }
        m.chi2 += chi2;
        m.chi0 += chi0;
    }
    if (pairs == 0) throw DegenerateDataError("merit: no valid consecutive frame pair");
    m.terms = static_cast<long long>(pairs) * (ny - 4) * (nx - 4);
    m.rms = std::sqrt(m.chi2 / static_cast<double>(m.terms));
    m.rms0 = std::sqrt(m.chi0 / static_cast<double>(m.terms));
    return m;
}

MeritValue merit(const ImageCube& cube, const SpectralVelocity& v, bool include_invalid) {
    auto [vx, vy] = evaluate(v, cube.h, cube.w);
    return merit_fields(cube, vx, vy, include_invalid);
}

FlowMetrics compare_fields(const Grid& v1x, const Grid& v1y, const Grid& v2x, const Grid& v2y,
                           int exclude_border) {
    if (!v1x.same_shape(v1y) || !v1x.same_shape(v2x) || !v1x.same_shape(v2y))
        throw ArgumentError("compare_fields: shape mismatch");
    const int b = std::max(exclude_border, 0);
    const int ny = v1x.ny, nx = v1x.nx;
    if (2 * b >= ny || 2 * b >= nx)
        throw ArgumentError("compare_fields: border exclusion leaves no pixels");

    double dist2 = 0.0, dot = 0.0, n1 = 0.0, n2 = 0.0, max_sp = 0.0;
    std::vector<double> speeds;
    speeds.reserve(static_cast<size_t>(ny - 2 * b) * (nx - 2 * b));
    for (int y = b; y < ny - b; ++y)
        for (int x = b; x < nx - b; ++x) {
            const double ax = v1x(y, x), ay = v1y(y, x);
            const double bx = v2x(y, x), by = v2y(y, x);
            const double dx = ax - bx, dy = ay - by;
            dist2 += dx * dx + dy * dy;
            dot += ax * bx + ay * by;
            n1 += ax * ax + ay * ay;
            n2 += bx * bx + by * by;
            const double sp = std::hypot(ax, ay);
            speeds.push_back(sp);
            max_sp = std::max(max_sp, sp);
        }

    FlowMetrics fm;
    const double count = static_cast<double>(speeds.size());
    fm.field_distance = std::sqrt(dist2 / count);
    if (n1 > 0.0 && n2 > 0.0)
        fm.correlation = dot / std::sqrt(n1 * n2);
    else
        fm.correlation = (n1 == 0.0 && n2 == 0.0) ? 1.0 : 0.0;
    fm.rms_speed = std::sqrt(n1 / count);
    fm.max_speed = max_sp;
    auto mid = speeds.begin() + speeds.size() / 2;
    std::nth_element(speeds.begin(), mid, speeds.end());
    fm.median_speed = *mid;
    return fm;
}

int default_border(int n_x, int n_y, int X, int Y) {
    int b = 2;  // gradient stencil rim
    if (n_x > 0) b = std::max(b, (X + 2 * n_x - 1) / (2 * n_x));
    if (n_y > 0) b = std::max(b, (Y + 2 * n_y - 1) / (2 * n_y));
    return b;
}

std::vector<ConvergenceEntry> convergence_study(const ImageCube& cube, int n_x, int n_y,
                                                const std::vector<int>& window_lengths,
                                                const EstimateOptions& options, int max_offsets) {
    if (window_lengths.empty()) throw ArgumentError("convergence_study: no window lengths");
    int n_ref = 0;
    for (int n : window_lengths) {
        if (n < 2) throw ArgumentError("convergence_study: windows must span >= 2 frames");
        n_ref = std::max(n_ref, n);
    }
    if (cube.t < n_ref)
        throw ArgumentError("convergence_study: cube shorter than the largest window");
    if (max_offsets < 1) throw ArgumentError("convergence_study: max_offsets must be >= 1");

    const int border = default_border(n_x, n_y, cube.w, cube.h);
    auto fit_window = [&](int first, int count) {
        auto [v, report] = estimate(slice_frames(cube, first, count), n_x, n_y, options);
        return evaluate(subtract_mean_flow(v));
    };
    auto [ref_x, ref_y] = fit_window(cube.t - n_ref, n_ref);

    std::vector<ConvergenceEntry> table;
    for (int n : window_lengths) {
        // Offsets stay clear of the reference window when the cube allows it.
        const int j_max = std::max(0, std::min(cube.t - n, cube.t - n_ref - n));
        const int count = j_max + 1;
        const int stride = (count + max_offsets - 1) / max_offsets;
        ConvergenceEntry e;
        e.window = n;
        double sum = 0.0;
        for (int j = 0; j <= j_max; j += stride) {
            auto [fx, fy] = fit_window(j, n);
            sum += compare_fields(fx, fy, ref_x, ref_y, border).field_distance;
            ++e.offsets;
        }
        e.distance = sum / e.offsets;
        table.push_back(e);
    }
    return table;
}

SpeedHistogram speed_histogram(const Grid& vx, const Grid& vy, double bin_width,
                               double unit_scale) {
    if (!(bin_width > 0.0)) throw ArgumentError("speed_histogram: bin width must be positive");
    if (!vx.same_shape(vy)) throw ArgumentError("speed_histogram: shape mismatch");
    const double mx = grid_mean(vx), my = grid_mean(vy);

    std::vector<double> speeds(vx.size());
    double max_sp = 0.0, sum2 = 0.0;
    for (size_t k = 0; k < vx.v.size(); ++k) {
        const double s = std::hypot(vx.v[k] - mx, vy.v[k] - my) * unit_scale;
        speeds[k] = s;
        max_sp = std::max(max_sp, s);
        sum2 += s * s;
    }

    SpeedHistogram h;
    h.bin_width = bin_width;
    const int nbins = static_cast<int>(std::floor(max_sp / bin_width)) + 1;
    h.centers.resize(nbins);
    h.density.assign(nbins, 0.0);
    for (int i = 0; i < nbins; ++i) h.centers[i] = (i + 0.5) * bin_width;
    for (double s : speeds) {
        int bin = static_cast<int>(s / bin_width);
        bin = std::min(bin, nbins - 1);
        h.density[bin] += 1.0;
    }
    const double total = static_cast<double>(speeds.size());
    for (auto& d : h.density) d /= total * bin_width;

    h.rms = std::sqrt(sum2 / total);
    h.max = max_sp;
    auto mid = speeds.begin() + speeds.size() / 2;
    std::nth_element(speeds.begin(), mid, speeds.end());
    h.median = *mid;
    return h;
}

std::vector<double> boundary_residual_profile(const Grid& true_x, const Grid& true_y,
                                              const Grid& fit_x, const Grid& fit_y) {
    if (!true_x.same_shape(true_y) || !true_x.same_shape(fit_x) || !true_x.same_shape(fit_y))
        throw ArgumentError("boundary_residual_profile: shape mismatch");
    const int row = true_x.ny / 2;
    std::vector<double> profile(true_x.nx);
    for (int x = 0; x < true_x.nx; ++x)
        profile[x] = std::hypot(true_x(row, x) - fit_x(row, x), true_y(row, x) - fit_y(row, x));
    return profile;
}

std::vector<double> zonal_profile(const Grid& vx) {
    std::vector<double> profile(vx.ny, 0.0);
    for (int y = 0; y < vx.ny; ++y) {
        double s = 0.0;
        for (int x = 0; x < vx.nx; ++x) s += vx(y, x);
        profile[y] = s / vx.nx;
    }
    return profile;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ArgumentError("loglog_slope: length mismatch");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] > 0.0) || !(y[k] > 0.0)) continue;
        const double lx = std::log(x[k]), ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) throw ArgumentError("loglog_slope: fewer than two positive points");
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw ArgumentError("loglog_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

namespace {
std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write CSV: " + path.string());
    f.precision(10);
    return f;
}
}  // namespace

void write_histogram_csv(const std::filesystem::path& path, const SpeedHistogram& h) {
    auto f = open_csv(path);
    f << "bin_center,density\n";
    for (size_t k = 0; k < h.centers.size(); ++k) f << h.centers[k] << ',' << h.density[k] << '\n';
}

void write_profile_csv(const std::filesystem::path& path, const std::vector<double>& profile) {
    auto f = open_csv(path);
    f << "index,value\n";
    for (size_t k = 0; k < profile.size(); ++k) f << k << ',' << profile[k] << '\n';
}

void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<ConvergenceEntry>& table) {
    auto f = open_csv(path);
    f << "window,distance\n";
    for (const auto& e : table) f << e.window << ',' << e.distance << '\n';
}

}  // namespace specflow
