#pragma once

#include <utility>

#include "specflow/assemble.hpp"
#include "specflow/cube.hpp"
#include "specflow/errors.hpp"
#include "specflow/spectral.hpp"

namespace specflow {

enum class SolverMethod { direct, iterative };

struct SolveReport {
    SolverMethod method = SolverMethod::direct;
    int iterations = 0;          // 0 for direct
    double residual = 0.0;       // relative |A x - b| / |b|
    double wall_time = 0.0;      // seconds, solver only
    double symmetry_deviation = 0.0;  // conjugate-symmetry deviation before projection
    double condition_estimate = 0.0;  // 1/rcond, direct path only
};

/// Iterative solver gave up; carries the best iterate found.
class ConvergenceError : public Error {
public:
    ConvergenceError(std::string what, SpectralVelocity best_iterate, double residual,
                     int iterations)
        : Error(std::move(what)), best(std::move(best_iterate)), residual(residual),
          iterations(iterations) {}
    SpectralVelocity best;
    double residual;
    int iterations;
};

struct EstimateOptions {
    SolverMethod solver = SolverMethod::direct;
    double tol = 1e-8;       // iterative relative residual
    int max_iter = 2000;
    bool include_invalid_frames = false;  // use flagged frames in the sums
};

/// Direct dense solve (LU with a condition guard at 1e12).
std::pair<SpectralVelocity, SolveReport> solve_direct(const NormalSystem& sys);

/// Conjugate-gradient on the structured operator, restricted to the
/// conjugate-symmetric subspace where the operator is self-adjoint positive
/// semi-definite; diagonal preconditioning.
std::pair<SpectralVelocity, SolveReport> solve_iterative(const NormalSystem& sys, double tol,
                                                         int max_iter);

/// The one-call pipeline: accumulate_products -> assemble -> solve.
std::pair<SpectralVelocity, SolveReport> estimate(const ImageCube& cube, int n_x, int n_y,
                                                  const EstimateOptions& options = {});

}  // namespace specflow
