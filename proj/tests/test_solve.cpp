#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "specflow/assemble.hpp"
#include "specflow/metrics.hpp"
#include "specflow/solve.hpp"

using namespace specflow;
using testutil::make_advected_case;
using testutil::relative_error;

TEST_CASE("solve_direct: constant images are degenerate") {
    std::vector<Grid> frames(4, Grid(16, 16, 3.0));
    CHECK_THROWS_AS(estimate(cube_from_frames(frames), 1, 1), DegenerateDataError);
}

TEST_CASE("estimate: recovers an in-span field from noiseless data") {
    auto s = make_advected_case(64, 2, 0.15, 6, 12.0, 42, Interp::spectral, 4);
    auto [v, rep] = estimate(s.cube, 2, 2);
    CHECK(rep.residual <= 1e-8);
    CHECK(rep.symmetry_deviation < 1e-8);
    const int border = default_border(2, 2, 64, 64);
    CHECK(relative_error(v, s.truth_x, s.truth_y, border) < 0.01);
}

TEST_CASE("estimate: single-mode case equals the closed-form least squares") {
    auto s = make_advected_case(48, 0, 0.0, 2, 10.0, 7);
    // uniform translation of the texture
    SpectralVelocity shift(0, 0, 48, 48);
    shift.a(0, 0) = 0.23;
    shift.b(0, 0) = -0.11;
    auto [ux, uy] = evaluate(shift);
    AdvectionConfig cfg;
    cfg.n_frames = 2;
    cfg.substeps = 2;
    cfg.interpolation = Interp::spectral;
    ImageCube cube = advect(make_texture(48, 48, 10.0, 7), ux, uy, cfg);

    DerivativeProducts p = accumulate_products(cube);
    double sxx = 0, sxy = 0, syy = 0, stx = 0, sty = 0;
    for (size_t k = 0; k < p.sxx.v.size(); ++k) {
        sxx += p.sxx.v[k];
        sxy += p.sxy.v[k];
        syy += p.syy.v[k];
        stx += p.stx.v[k];
        sty += p.sty.v[k];
    }
    const double det = sxx * syy - sxy * sxy;
    const double ux_expect = (-stx * syy + sty * sxy) / det;
    const double uy_expect = (-sty * sxx + stx * sxy) / det;

    auto [v, rep] = estimate(cube, 0, 0);
    const auto mean = mean_flow(v);
    CHECK(mean.first == doctest::Approx(ux_expect).epsilon(1e-10));
    CHECK(mean.second == doctest::Approx(uy_expect).epsilon(1e-10));
    // and the closed form sits near the constructed shift
    CHECK(mean.first == doctest::Approx(0.23).epsilon(0.05));
    CHECK(mean.second == doctest::Approx(-0.11).epsilon(0.05));
}

TEST_CASE("estimate: pure translation is recovered by mean_flow") {
    SpectralVelocity shift(0, 0, 64, 64);
    shift.a(0, 0) = 0.2;
    shift.b(0, 0) = 0.1;
    auto [ux, uy] = evaluate(shift);
    AdvectionConfig cfg;
    cfg.n_frames = 2;
    cfg.substeps = 1;
    cfg.interpolation = Interp::spectral;
    ImageCube cube = advect(make_texture(64, 64, 12.0, 3), ux, uy, cfg);

    auto [v, rep] = estimate(cube, 4, 4);
    const auto mean = mean_flow(v);
    CHECK(std::fabs(mean.first - 0.2) < 0.05 * 0.2);
    CHECK(std::fabs(mean.second - 0.1) < 0.05 * 0.1);
}

TEST_CASE("estimate: static cube gives the zero field") {
    std::vector<Grid> frames(5, make_texture(32, 32, 8.0, 21));
    auto [v, rep] = estimate(cube_from_frames(frames), 2, 2);
    auto [vx, vy] = evaluate(v);
    CHECK(field_rms(vx, vy) < 1e-10);
    CHECK(rep.residual == 0.0);
}

TEST_CASE("estimate: time reversal negates the field") {
    auto s = make_advected_case(48, 2, 0.12, 5, 10.0, 88, Interp::spectral, 2);
    auto [v_fwd, r1] = estimate(s.cube, 2, 2);
    auto [v_rev, r2] = estimate(reverse_time(s.cube), 2, 2);
    auto [fx, fy] = evaluate(v_fwd);
    auto [rx, ry] = evaluate(v_rev);
    const double scale = field_rms(fx, fy);
    double max_dev = 0.0;
    for (size_t k = 0; k < fx.v.size(); ++k) {
        max_dev = std::max(max_dev, std::fabs(fx.v[k] + rx.v[k]));
        max_dev = std::max(max_dev, std::fabs(fy.v[k] + ry.v[k]));
    }
    CHECK(max_dev / scale < 1e-8);
}

TEST_CASE("estimate: invariant under intensity scaling") {
    auto s = make_advected_case(48, 2, 0.14, 4, 10.0, 55);
    auto [v1, r1] = estimate(s.cube, 2, 2);
    auto [v2, r2] = estimate(scale_intensity(s.cube, 37.5), 2, 2);
    double max_dev = 0.0, scale = 0.0;
    for (size_t k = 0; k < v1.alpha.size(); ++k) {
        max_dev = std::max(max_dev, std::abs(v1.alpha[k] - v2.alpha[k]));
        max_dev = std::max(max_dev, std::abs(v1.beta[k] - v2.beta[k]));
        scale = std::max(scale, std::abs(v1.alpha[k]));
    }
    CHECK(max_dev <= 1e-10 * scale);
}

TEST_CASE("solve_iterative: matches direct, work scales with tolerance") {
    auto s = make_advected_case(64, 3, 0.15, 5, 12.0, 101);
    DerivativeProducts p = accumulate_products(s.cube);
    NormalSystem dense_sys = assemble_dense(p, 3, 3);
    NormalSystem impl_sys = assemble_implicit(p, 3, 3);

    auto [vd, rd] = solve_direct(dense_sys);
    auto [vi, ri] = solve_iterative(impl_sys, 1e-8, 2000);
    CHECK(ri.residual <= 1e-8);

    auto [dx, dy] = evaluate(vd);
    auto [ix, iy] = evaluate(vi);
    Grid ex(64, 64), ey(64, 64);
    for (size_t k = 0; k < ex.v.size(); ++k) {
        ex.v[k] = dx.v[k] - ix.v[k];
        ey.v[k] = dy.v[k] - iy.v[k];
    }
    CHECK(field_rms(ex, ey) / field_rms(dx, dy) < 1e-6);

    auto [vc, rc] = solve_iterative(impl_sys, 1e-2, 2000);
    CHECK(rc.iterations <= ri.iterations);

    CHECK_THROWS_AS(solve_iterative(impl_sys, 1e-10, 1), ConvergenceError);
    try {
        solve_iterative(impl_sys, 1e-10, 1);
    } catch (const ConvergenceError& e) {
        CHECK(e.residual > 1e-10);
        CHECK(e.iterations == 1);
        CHECK(e.best.n_x == 3);
    }
}

TEST_CASE("solve_direct requires the dense form") {
    auto s = make_advected_case(32, 1, 0.1, 3, 8.0, 5);
    NormalSystem sys = assemble_implicit(accumulate_products(s.cube), 1, 1);
    CHECK_THROWS_AS(solve_direct(sys), ArgumentError);
}

TEST_CASE("estimate: input validation") {
    auto s = make_advected_case(32, 1, 0.1, 3, 8.0, 5);
    CHECK_THROWS_AS(estimate(s.cube, 8, 8), ArgumentError);   // 4n == 32
    CHECK_THROWS_AS(estimate(s.cube, -1, 0), ArgumentError);
    EstimateOptions bad;
    bad.solver = SolverMethod::iterative;
    bad.tol = 2.0;
    CHECK_THROWS_AS(estimate(s.cube, 1, 1, bad), ArgumentError);
}

TEST_CASE("merit gradient vanishes at the solution") {
    auto s = make_advected_case(48, 2, 0.12, 5, 10.0, 303);
    auto [v, rep] = estimate(s.cube, 2, 2);
    const MeritValue base = merit(s.cube, v);

    double amp_rms = 0.0;
    for (auto c : v.alpha) amp_rms += std::norm(c);
    for (auto c : v.beta) amp_rms += std::norm(c);
    amp_rms = std::sqrt(amp_rms / (2.0 * v.mode_count()));
    const double h = 1e-5 * std::max(amp_rms, 1e-8);

    // Perturbing one complex entry and evaluating the real part is exactly a
    // perturbation of the underlying real degree of freedom.
    double worst = 0.0;
    for (int part = 0; part < 2; ++part)
        for (size_t k = 0; k < v.alpha.size(); ++k)
            for (int comp = 0; comp < 2; ++comp) {
                SpectralVelocity plus = v, minus = v;
                auto& pc = comp == 0 ? plus.alpha[k] : plus.beta[k];
                auto& mc = comp == 0 ? minus.alpha[k] : minus.beta[k];
                const std::complex<double> delta =
                    part == 0 ? std::complex<double>(h, 0.0) : std::complex<double>(0.0, h);
                pc += delta;
                mc -= delta;
                const double g =
                    (merit(s.cube, plus).chi2 - merit(s.cube, minus).chi2) / (2.0 * h);
                worst = std::max(worst, std::fabs(g) * amp_rms);
            }
    CHECK(worst / std::max(base.chi0, 1e-30) < 1e-6);
}
