#include "specflow/solve.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "specflow/deriv.hpp"

namespace specflow {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_not_textureless(const NormalSystem& sys) {
    // DC bins of the quadratic tables are the total gradient power.
    const double sxx = sys.pxx(2 * sys.n_y, 2 * sys.n_x).real();
    const double syy = sys.pyy(2 * sys.n_y, 2 * sys.n_x).real();
    if (sxx + syy <= 0.0)
        throw DegenerateDataError(
            "degenerate data: images carry no intensity gradients (constant frames?)");
    if (sxx <= 1e-14 * (sxx + syy))
        throw DegenerateDataError("degenerate data: no horizontal gradient texture");
    if (syy <= 1e-14 * (sxx + syy))
        throw DegenerateDataError("degenerate data: no vertical gradient texture");
}

SpectralVelocity finish_solution(const NormalSystem& sys, const Eigen::VectorXcd& x,
                                 SolveReport& report) {
    SpectralVelocity v = unpack_amplitudes(x, sys.n_x, sys.n_y, sys.X, sys.Y);
    report.symmetry_deviation = symmetry_deviation(v);
    symmetrize(v);
    return v;
}

}  // namespace

std::pair<SpectralVelocity, SolveReport> solve_direct(const NormalSystem& sys) {
    if (!sys.dense) throw ArgumentError("solve_direct: dense form not assembled");
    check_not_textureless(sys);
    const auto t0 = Clock::now();

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(*sys.dense);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-12)) {
        std::ostringstream msg;
        msg << "degenerate data: normal system is numerically singular (rcond " << rcond << ")";
        throw DegenerateDataError(msg.str());
    }

    SolveReport report;
    report.method = SolverMethod::direct;
    report.iterations = 0;
    report.condition_estimate = 1.0 / rcond;

    Eigen::VectorXcd x;
    const double rhs_norm = sys.rhs.norm();
    if (rhs_norm == 0.0) {
        x = Eigen::VectorXcd::Zero(sys.dim());
        report.residual = 0.0;
    } else {
        x = lu.solve(sys.rhs);
        report.residual = (*sys.dense * x - sys.rhs).norm() / rhs_norm;
    }
    if (report.residual > 1e-8) {
        std::ostringstream msg;
        msg << "degenerate data: direct solve residual " << report.residual << " exceeds 1e-8";
        throw DegenerateDataError(msg.str());
    }
    SpectralVelocity v = finish_solution(sys, x, report);
    report.wall_time = seconds_since(t0);
    return {std::move(v), report};
}

std::pair<SpectralVelocity, SolveReport> solve_iterative(const NormalSystem& sys, double tol,
                                                         int max_iter) {
    if (!(tol > 0.0 && tol < 1.0)) throw ArgumentError("iterative tol must be in (0, 1)");
    if (max_iter < 1) throw ArgumentError("max_iter must be >= 1");
    check_not_textureless(sys);
    const auto t0 = Clock::now();

    const int nb = sys.block();
    const int dim = 2 * nb;
    StructuredOperator op(sys);

    // Real, flip-symmetric, positive Jacobi-style scaling built from the DC
    // gradient power plus the per-mode table entry; on the conjugate-symmetric
    // subspace the operator is self-adjoint PSD under Re<.,.>, so standard
    // PCG applies with this preconditioner.
    Eigen::VectorXd diag(dim);
    const double pxx0 = sys.pxx(2 * sys.n_y, 2 * sys.n_x).real();
    const double pyy0 = sys.pyy(2 * sys.n_y, 2 * sys.n_x).real();
    for (int j = -sys.n_y; j <= sys.n_y; ++j)
        for (int i = -sys.n_x; i <= sys.n_x; ++i) {
            const int idx = sys.amp_index(i, j);
            const double dxx = pxx0 + sys.pxx(2 * j + 2 * sys.n_y, 2 * i + 2 * sys.n_x).real();
            const double dyy = pyy0 + sys.pyy(2 * j + 2 * sys.n_y, 2 * i + 2 * sys.n_x).real();
            diag(idx) = std::max(dxx, 0.05 * pxx0);
            diag(nb + idx) = std::max(dyy, 0.05 * pyy0);
        }

    SolveReport report;
    report.method = SolverMethod::iterative;

    const double rhs_norm = sys.rhs.norm();
    if (rhs_norm == 0.0) {
        Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(dim);
        report.residual = 0.0;
        SpectralVelocity v = finish_solution(sys, zero, report);
        report.wall_time = seconds_since(t0);
        return {std::move(v), report};
    }

    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(dim);
    Eigen::VectorXcd r = sys.rhs;
    Eigen::VectorXcd z = r.cwiseQuotient(diag.cast<std::complex<double>>());
    Eigen::VectorXcd p = z;
    double rz = r.dot(z).real();

    Eigen::VectorXcd best_x = x;
    double best_res = 1.0;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        const Eigen::VectorXcd q = op.apply(p);
        const double pq = p.dot(q).real();
        if (!(pq > 0.0)) break;  // lost positivity: singular or noise floor
        const double alpha = rz / pq;
        x += alpha * p;
        r -= alpha * q;
        const double res = r.norm() / rhs_norm;
        if (res < best_res) {
            best_res = res;
            best_x = x;
        }
        if (res <= tol) {
            ++iter;
            break;
        }
        z = r.cwiseQuotient(diag.cast<std::complex<double>>());
        const double rz_new = r.dot(z).real();
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }

    report.iterations = iter;
    report.residual = best_res;
    if (best_res > tol) {
        SpectralVelocity best = unpack_amplitudes(best_x, sys.n_x, sys.n_y, sys.X, sys.Y);
        symmetrize(best);
        std::ostringstream msg;
        msg << "iterative solver did not reach tol " << tol << " in " << iter
            << " iterations (best residual " << best_res << ")";
        throw ConvergenceError(msg.str(), std::move(best), best_res, iter);
    }
    SpectralVelocity v = finish_solution(sys, best_x, report);
    report.wall_time = seconds_since(t0);
    return {std::move(v), report};
}

std::pair<SpectralVelocity, SolveReport> estimate(const ImageCube& cube, int n_x, int n_y,
                                                  const EstimateOptions& options) {
    if (cube.t < 2 || cube.h < 8 || cube.w < 8)
        throw ArgumentError("estimate: cube must be at least 2 x 8 x 8");
    if (n_x < 0 || n_y < 0) throw ArgumentError("estimate: mode counts must be >= 0");
    if (4 * n_x >= cube.w || 4 * n_y >= cube.h)
        throw ArgumentError("estimate: mode count too large for the image (need 4n < size)");
    for (double v : cube.data)
        if (!std::isfinite(v)) throw ArgumentError("estimate: cube contains non-finite values");

    DerivativeProducts products = accumulate_products(cube, options.include_invalid_frames);
    if (options.solver == SolverMethod::direct) {
        NormalSystem sys = assemble_dense(products, n_x, n_y);
        return solve_direct(sys);
    }
    NormalSystem sys = assemble_implicit(products, n_x, n_y);
    return solve_iterative(sys, options.tol, options.max_iter);
}

}  // namespace specflow
