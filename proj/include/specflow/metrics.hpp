#pragma once

#include <filesystem>
#include <vector>

#include "specflow/cube.hpp"
#include "specflow/grid.hpp"
#include "specflow/solve.hpp"
#include "specflow/spectral.hpp"

namespace specflow {

/// Advection-residual merit. chi2 sums (It + v . grad I)^2 over usable frame
/// pairs and interior pixels; chi0 is the same sum at v = 0. rms/rms0 are the
/// per-pixel-per-pair RMS variants of the same quantities.
struct MeritValue {
    double chi2 = 0.0;
    double chi0 = 0.0;
    double rms = 0.0;
    double rms0 = 0.0;
    long long terms = 0;  // contributing pixel-pair samples
};

MeritValue merit(const ImageCube& cube, const SpectralVelocity& v, bool include_invalid = false);
MeritValue merit_fields(const ImageCube& cube, const Grid& vx, const Grid& vy,
                        bool include_invalid = false);

struct FlowMetrics {
    double rms_speed = 0.0;
    double median_speed = 0.0;
    double max_speed = 0.0;
    double field_distance = 0.0;  // RMS of |v1 - v2|
    double correlation = 0.0;     // cosine similarity of stacked components
};

/// Compares two evaluated fields over pixels at least exclude_border away
/// from every edge. Speed statistics describe the first field.
FlowMetrics compare_fields(const Grid& v1x, const Grid& v1y, const Grid& v2x, const Grid& v2y,
                           int exclude_border = 0);

/// Default comparison border: half a wavelength of the truncated mode,
/// max(X/(2 n_x), Y/(2 n_y)), rounded up.
int default_border(int n_x, int n_y, int X, int Y);

struct ConvergenceEntry {
    int window = 0;        // frames per fit
    double distance = 0.0; // mean field distance to the reference fit
    int offsets = 0;       // start offsets averaged over
};

/// Fits windows of each requested length against a reference fit over the
/// final full-length window; distances are taken after mean-flow subtraction,
/// averaged over start offsets (at most max_offsets, evenly strided).
std::vector<ConvergenceEntry> convergence_study(const ImageCube& cube, int n_x, int n_y,
                                                const std::vector<int>& window_lengths,
                                                const EstimateOptions& options = {},
                                                int max_offsets = 16);

struct SpeedHistogram {
    double bin_width = 0.0;
    std::vector<double> centers;
    std::vector<double> density;  // unit area: sum(density)*bin_width == 1
    double rms = 0.0, median = 0.0, max = 0.0;
};

/// Normalized histogram of |v| after mean-flow subtraction. unit_scale
/// converts pixels/frame to physical units (e.g. km/s) before binning.
SpeedHistogram speed_histogram(const Grid& vx, const Grid& vy, double bin_width,
                               double unit_scale = 1.0);

/// Mid-height row of |v_true - v_fit|, length W.
std::vector<double> boundary_residual_profile(const Grid& true_x, const Grid& true_y,
                                              const Grid& fit_x, const Grid& fit_y);

/// Row means of v_x, length H.
std::vector<double> zonal_profile(const Grid& vx);

/// Least-squares slope of log(y) vs log(x); pairs with y <= 0 are skipped.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

void write_histogram_csv(const std::filesystem::path& path, const SpeedHistogram& h);
void write_profile_csv(const std::filesystem::path& path, const std::vector<double>& profile);
void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<ConvergenceEntry>& table);

}  // namespace specflow
