#include "specflow/grid.hpp"

#include <cmath>

#include "specflow/errors.hpp"

namespace specflow {

double grid_mean(const Grid& g) {
    if (g.v.empty()) return 0.0;
    double s = 0.0;
    for (double x : g.v) s += x;
    return s / static_cast<double>(g.v.size());
}

double grid_rms(const Grid& g) {
    if (g.v.empty()) return 0.0;
    double s = 0.0;
    for (double x : g.v) s += x * x;
    return std::sqrt(s / static_cast<double>(g.v.size()));
}

double field_rms(const Grid& gx, const Grid& gy) {
    if (!gx.same_shape(gy)) throw ArgumentError("field_rms: component shapes differ");
    if (gx.v.empty()) return 0.0;
    double s = 0.0;
    for (size_t k = 0; k < gx.v.size(); ++k) s += gx.v[k] * gx.v[k] + gy.v[k] * gy.v[k];
    return std::sqrt(s / static_cast<double>(gx.v.size()));
}

double max_abs_diff(const Grid& a, const Grid& b) {
    if (!a.same_shape(b)) throw ArgumentError("max_abs_diff: shapes differ");
    double m = 0.0;
    for (size_t k = 0; k < a.v.size(); ++k) m = std::max(m, std::fabs(a.v[k] - b.v[k]));
    return m;
}

}  // namespace specflow
