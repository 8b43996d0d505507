// specflow command-line front end: synthetic data generation, velocity
// estimation, experiment recipes and benchmarks over the cube/velocity file
// formats.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "specflow/cube.hpp"
#include "specflow/deriv.hpp"
#include "specflow/errors.hpp"
#include "specflow/metrics.hpp"
#include "specflow/solve.hpp"
#include "specflow/spectral.hpp"
#include "specflow/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace specflow;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitNoConvergence = 4;
constexpr int kExitIo = 5;

struct Clock {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::pair<int, int> parse_size(const std::string& s) {
    const auto x = s.find('x');
    try {
        if (x == std::string::npos) {
            const int n = std::stoi(s);
            return {n, n};
        }
        return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
    } catch (const std::exception&) {
        throw ArgumentError("bad --size value: " + s);
    }
}

template <typename T>
std::vector<T> parse_list(const std::string& s) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            if constexpr (std::is_same_v<T, int>)
                out.push_back(std::stoi(item));
            else
                out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ArgumentError("bad list entry: " + item);
        }
    }
    if (out.empty()) throw ArgumentError("empty list: " + s);
    return out;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    f << j.dump(2) << '\n';
}

double chi0_rms(const ImageCube& cube) {
    Grid zero(cube.h, cube.w);
    return merit_fields(cube, zero, zero).rms0;
}

double relative_field_error(const SpectralVelocity& fit, const Grid& tx, const Grid& ty,
                            int border) {
    auto [fx, fy] = evaluate(fit);
    const FlowMetrics m = compare_fields(fx, fy, tx, ty, border);
    double ref = 0.0;
    {
        // RMS of the truth over the same interior region
        const FlowMetrics t = compare_fields(tx, ty, tx, ty, border);
        ref = t.rms_speed;
    }
    if (ref <= 0.0) throw ArgumentError("truth field is zero on the comparison region");
    return m.field_distance / ref;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateConfig {
    std::string out;
    std::string flow = "random";
    int frames = 10;
    std::string size = "256";
    double texture_scale = 12.0;
    uint64_t seed = 1;
    double rms = 0.2;
    int modes = 4;
    double ux = 0.0, uy = 0.0;
    double hex_wavelength = 96.0;
    double hex_amplitude = 1.0;
    double hex_max_speed = 0.0;  // overrides hex_amplitude when > 0
    std::string interp = "bicubic";
    std::string boundary = "periodic";
    int substeps = 2;
    double noise = 0.0;
    double waves = 0.0;
    double scale_chi0 = 0.0;
    std::string missing;
    double pixel_scale = 0.0;
    double cadence = 0.0;
};

int run_generate(const GenerateConfig& cfg) {
    const auto [w, h] = parse_size(cfg.size);
    AdvectionConfig adv;
    adv.n_frames = cfg.frames;
    adv.substeps = cfg.substeps;
    if (cfg.interp == "bicubic")
        adv.interpolation = Interp::bicubic;
    else if (cfg.interp == "spectral")
        adv.interpolation = Interp::spectral;
    else
        throw ArgumentError("unknown --interp: " + cfg.interp);
    if (cfg.boundary == "periodic")
        adv.boundary = Boundary::periodic;
    else if (cfg.boundary == "clamp")
        adv.boundary = Boundary::clamp;
    else
        throw ArgumentError("unknown --boundary: " + cfg.boundary);

    Grid seed_img = make_texture(w, h, cfg.texture_scale, cfg.seed);

    Grid vx, vy;
    SpectralVelocity truth;
    double hex_amplitude_used = 0.0;
    if (cfg.flow == "zero") {
        vx = Grid(h, w);
        vy = Grid(h, w);
        truth = SpectralVelocity(0, 0, w, h);
    } else if (cfg.flow == "uniform") {
        truth = SpectralVelocity(0, 0, w, h);
        truth.a(0, 0) = cfg.ux;
        truth.b(0, 0) = cfg.uy;
        std::tie(vx, vy) = evaluate(truth);
    } else if (cfg.flow == "random") {
        truth = random_field(cfg.modes, cfg.modes, cfg.rms, cfg.seed + 1, w, h);
        std::tie(vx, vy) = evaluate(truth);
    } else if (cfg.flow == "hexagonal") {
        hex_amplitude_used = cfg.hex_amplitude;
        std::tie(vx, vy) = hexagonal_field(hex_amplitude_used, cfg.hex_wavelength, w, h);
        if (cfg.hex_max_speed > 0.0) {
            double m = 0.0;
            for (size_t k = 0; k < vx.v.size(); ++k)
                m = std::max(m, std::hypot(vx.v[k], vy.v[k]));
            hex_amplitude_used *= cfg.hex_max_speed / m;
            std::tie(vx, vy) = hexagonal_field(hex_amplitude_used, cfg.hex_wavelength, w, h);
        }
        // The cellular field is generally outside any truncated span; the
        // stored truth is its projection on a generous mode grid.
        const int n_proj = std::min(24, (std::min(w, h) - 1) / 4);
        truth = project_field(vx, vy, n_proj, n_proj);
    } else {
        throw ArgumentError("unknown --flow: " + cfg.flow);
    }

    ImageCube cube = advect(seed_img, vx, vy, adv);
    cube.pixel_scale = cfg.pixel_scale;
    cube.cadence = cfg.cadence;

    double chi0_scale_factor = 1.0;
    if (cfg.scale_chi0 > 0.0) {
        chi0_scale_factor = cfg.scale_chi0 / chi0_rms(cube);
        cube = scale_intensity(cube, chi0_scale_factor);
    }
    if (cfg.waves > 0.0) {
        const double frame_rms = grid_rms(cube.frame_grid(0));
        cube = add_traveling_waves(cube, cfg.waves * frame_rms, cfg.seed + 3);
    }
    if (cfg.noise > 0.0) cube = add_gaussian_noise(cube, cfg.noise, cfg.seed + 2);
    if (!cfg.missing.empty()) {
        // Blank the frames: data zeroed, flags follow via load-time detection.
        const auto idx = parse_list<int>(cfg.missing);
        cube = mark_missing(cube, idx);
        for (int i : idx) std::fill_n(cube.frame(i), size_t(cube.h) * cube.w, 0.0);
    }

    const fs::path base(cfg.out);
    const fs::path cube_path = fs::path(cfg.out + ".ofc");
    const fs::path truth_path = fs::path(cfg.out + ".ofv");
    save_cube(cube, cube_path);
    save_velocity(truth, truth_path);

    json manifest = {
        {"command", "generate"},
        {"flow", cfg.flow},
        {"frames", cfg.frames},
        {"width", w},
        {"height", h},
        {"texture_scale", cfg.texture_scale},
        {"seed", cfg.seed},
        {"rms", cfg.rms},
        {"modes", cfg.modes},
        {"ux", cfg.ux},
        {"uy", cfg.uy},
        {"hex_wavelength", cfg.hex_wavelength},
        {"hex_amplitude", hex_amplitude_used},
        {"interp", cfg.interp},
        {"boundary", cfg.boundary},
        {"substeps", cfg.substeps},
        {"noise_sigma", cfg.noise},
        {"waves", cfg.waves},
        {"scale_chi0", cfg.scale_chi0},
        {"chi0_scale_factor", chi0_scale_factor},
        {"missing", cfg.missing},
        {"pixel_scale", cfg.pixel_scale},
        {"cadence", cfg.cadence},
        {"cube", cube_path.string()},
        {"truth", truth_path.string()},
    };
    write_json(cfg.out + ".manifest.json", manifest);
    std::cout << "wrote " << cube_path.string() << " (" << cube.t << "x" << cube.h << "x"
              << cube.w << "), " << truth_path.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateConfig {
    std::string cube;
    std::string out;
    std::string report;
    std::string csv;
    int nx = -1, ny = -1, modes = 8;
    std::string solver = "direct";
    double tol = 1e-8;
    int max_iter = 2000;
    std::string missing = "skip";
    bool units = false;
};

int run_estimate(const EstimateConfig& cfg) {
    const ImageCube cube = load_cube(cfg.cube);
    EstimateOptions opt;
    if (cfg.solver == "direct")
        opt.solver = SolverMethod::direct;
    else if (cfg.solver == "iterative")
        opt.solver = SolverMethod::iterative;
    else
        throw ArgumentError("unknown --solver: " + cfg.solver);
    opt.tol = cfg.tol;
    opt.max_iter = cfg.max_iter;
    if (cfg.missing == "include")
        opt.include_invalid_frames = true;
    else if (cfg.missing != "skip")
        throw ArgumentError("--missing must be skip or include");

    const int n_x = cfg.nx >= 0 ? cfg.nx : cfg.modes;
    const int n_y = cfg.ny >= 0 ? cfg.ny : cfg.modes;

    double unit_scale = 0.0;
    if (cfg.units) {
        if (cube.pixel_scale <= 0.0 || cube.cadence <= 0.0)
            throw ArgumentError("--units requires pixel_scale and cadence in the cube header");
        unit_scale = cube.pixel_scale / cube.cadence;
    }

    SpectralVelocity v;
    SolveReport rep;
    bool converged = true;
    std::string failure;
    try {
        std::tie(v, rep) = estimate(cube, n_x, n_y, opt);
    } catch (const ConvergenceError& e) {
        v = e.best;
        rep.method = SolverMethod::iterative;
        rep.iterations = e.iterations;
        rep.residual = e.residual;
        converged = false;
        failure = e.what();
    }

    save_velocity(v, cfg.out);
    auto [vx, vy] = evaluate(v);
    const auto mean = mean_flow(v);
    const MeritValue mv = merit(cube, v, opt.include_invalid_frames);

    json report = {
        {"command", "estimate"},
        {"cube", cfg.cube},
        {"solution", cfg.out},
        {"n_x", n_x},
        {"n_y", n_y},
        {"solver", cfg.solver},
        {"tol", cfg.tol},
        {"max_iter", cfg.max_iter},
        {"missing", cfg.missing},
        {"converged", converged},
        {"iterations", rep.iterations},
        {"residual", rep.residual},
        {"wall_time", rep.wall_time},
        {"symmetry_deviation", rep.symmetry_deviation},
        {"condition_estimate", rep.condition_estimate},
        {"mean_flow_x_ppf", mean.first},
        {"mean_flow_y_ppf", mean.second},
        {"rms_speed_ppf", field_rms(vx, vy)},
        {"chi2", mv.chi2},
        {"chi0", mv.chi0},
        {"chi_rms", mv.rms},
        {"chi0_rms", mv.rms0},
    };
    if (!failure.empty()) report["error"] = failure;
    if (cfg.units) {
        report["unit_scale_km_s_per_ppf"] = unit_scale;
        report["rms_speed_km_s"] = field_rms(vx, vy) * unit_scale;
    }
    if (!cfg.report.empty()) write_json(cfg.report, report);
    if (!cfg.csv.empty()) write_field_csv(cfg.csv, vx, vy, cfg.units ? unit_scale : 1.0);

    std::cout << report.dump(2) << "\n";
    if (!converged) {
        std::cerr << "estimate: " << failure << "\n";
        return kExitNoConvergence;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate recipes

struct EvaluateConfig {
    std::string recipe;
    std::string out_dir = ".";
    std::string cube;
    std::string truth;
    std::string solution;
    uint64_t seed = 1;
    std::string size = "256";
    int frames = 10;
    double texture_scale = 12.0;
    int modes = 4;
    double rms = 0.2;
    std::string solver = "direct";
    double tol = 1e-8;
};

struct RecoverSetup {
    ImageCube cube;
    Grid truth_x, truth_y;
    SpectralVelocity truth;
};

// Shared synthetic setup: in-span random flow advected over a band-limited
// texture with trigonometric sampling.
RecoverSetup synth_setup(const EvaluateConfig& cfg, int w, int h, double texture_scale,
                         double rms) {
    RecoverSetup s;
    Grid seed_img = make_texture(w, h, texture_scale, cfg.seed);
    s.truth = random_field(cfg.modes, cfg.modes, rms, cfg.seed + 1, w, h);
    std::tie(s.truth_x, s.truth_y) = evaluate(s.truth);
    AdvectionConfig adv;
    adv.n_frames = cfg.frames;
    adv.substeps = 2;
    adv.interpolation = Interp::spectral;
    adv.boundary = Boundary::periodic;
    s.cube = advect(seed_img, s.truth_x, s.truth_y, adv);
    return s;
}

EstimateOptions solver_options(const EvaluateConfig& cfg) {
    EstimateOptions opt;
    opt.solver = cfg.solver == "iterative" ? SolverMethod::iterative : SolverMethod::direct;
    opt.tol = cfg.tol;
    return opt;
}

int recipe_recover(const EvaluateConfig& cfg) {
    if (cfg.solution.empty() || cfg.truth.empty())
        throw ArgumentError("recipe recover needs --solution and --truth");
    const SpectralVelocity fit = load_velocity(cfg.solution);
    const SpectralVelocity truth = load_velocity(cfg.truth);
    if (fit.X != truth.X || fit.Y != truth.Y)
        throw ArgumentError("solution and truth domains differ");

    auto [fx, fy] = evaluate(fit);
    auto [tx, ty] = evaluate(truth);
    const int border = default_border(fit.n_x, fit.n_y, fit.X, fit.Y);
    const FlowMetrics m = compare_fields(fx, fy, tx, ty, border);
    const double truth_rms = compare_fields(tx, ty, tx, ty, border).rms_speed;

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    const SpeedHistogram hist =
        speed_histogram(fx, fy, std::max(m.max_speed, 1e-12) / 50.0);
    write_histogram_csv(dir / "histogram.csv", hist);
    write_profile_csv(dir / "zonal_profile.csv", zonal_profile(fx));
    write_profile_csv(dir / "boundary_profile.csv",
                      boundary_residual_profile(tx, ty, fx, fy));

    json out = {
        {"recipe", "recover"},
        {"border", border},
        {"field_distance", m.field_distance},
        {"relative_rms_error", truth_rms > 0 ? m.field_distance / truth_rms : 0.0},
        {"correlation", m.correlation},
        {"rms_speed", m.rms_speed},
        {"median_speed", m.median_speed},
        {"max_speed", m.max_speed},
    };
    if (!cfg.cube.empty()) {
        const MeritValue mv = merit(load_cube(cfg.cube), fit);
        out["chi2"] = mv.chi2;
        out["chi0"] = mv.chi0;
        out["chi_rms"] = mv.rms;
        out["chi0_rms"] = mv.rms0;
    }
    write_json(dir / "metrics.json", out);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int recipe_breakdown(const EvaluateConfig& cfg) {
    const auto [w, h] = parse_size(cfg.size);
    const std::vector<double> rms_list = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8};
    const double texture_scale = 6.0;  // fine-grained pattern
    const int border = default_border(cfg.modes, cfg.modes, w, h);

    std::vector<double> errors;
    for (double rms : rms_list) {
        RecoverSetup s = synth_setup(cfg, w, h, texture_scale, rms);
        auto [v, rep] = estimate(s.cube, cfg.modes, cfg.modes, solver_options(cfg));
        errors.push_back(relative_field_error(v, s.truth_x, s.truth_y, border));
    }

    double knee = 0.0;
    for (size_t k = 0; k < rms_list.size(); ++k)
        if (errors[k] <= 0.05) knee = rms_list[k];

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    std::ofstream csv(dir / "breakdown.csv");
    csv << "rms,relative_error\n";
    csv.precision(10);
    for (size_t k = 0; k < rms_list.size(); ++k) csv << rms_list[k] << ',' << errors[k] << '\n';

    json out = {{"recipe", "breakdown-sweep"},
                {"rms", rms_list},
                {"relative_error", errors},
                {"knee", knee}};
    write_json(dir / "metrics.json", out);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int recipe_noise(const EvaluateConfig& cfg) {
    const auto [w, h] = parse_size(cfg.size);
    const std::vector<double> sigmas = {0.0, 100.0, 200.0, 400.0};
    const int border = default_border(cfg.modes, cfg.modes, w, h);

    RecoverSetup s = synth_setup(cfg, w, h, cfg.texture_scale, cfg.rms);
    s.cube = scale_intensity(s.cube, 700.0 / chi0_rms(s.cube));

    std::vector<double> errors;
    for (size_t k = 0; k < sigmas.size(); ++k) {
        ImageCube noisy = add_gaussian_noise(s.cube, sigmas[k], cfg.seed + 100 + k);
        auto [v, rep] = estimate(noisy, cfg.modes, cfg.modes, solver_options(cfg));
        errors.push_back(relative_field_error(v, s.truth_x, s.truth_y, border));
    }

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    std::ofstream csv(dir / "noise.csv");
    csv << "sigma,relative_error\n";
    csv.precision(10);
    for (size_t k = 0; k < sigmas.size(); ++k) csv << sigmas[k] << ',' << errors[k] << '\n';

    json out = {{"recipe", "noise-sweep"},
                {"chi0_rms", 700.0},
                {"sigma", sigmas},
                {"relative_error", errors}};
    write_json(dir / "metrics.json", out);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int recipe_truncation(const EvaluateConfig& cfg) {
    const auto [w, h] = parse_size(cfg.size);
    const std::vector<int> mode_list = {4, 8, 16};

    RecoverSetup s = synth_setup(cfg, w, h, cfg.texture_scale, cfg.rms);
    s.cube = scale_intensity(s.cube, 700.0 / chi0_rms(s.cube));
    ImageCube noisy = add_gaussian_noise(s.cube, 200.0, cfg.seed + 100);

    // Common interior for a fair comparison: border of the coarsest run.
    const int border = default_border(8, 8, w, h);
    std::vector<double> errors;
    for (int n : mode_list) {
        auto [v, rep] = estimate(noisy, n, n, solver_options(cfg));
        errors.push_back(relative_field_error(v, s.truth_x, s.truth_y, border));
    }

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    std::ofstream csv(dir / "truncation.csv");
    csv << "modes,relative_error\n";
    csv.precision(10);
    for (size_t k = 0; k < mode_list.size(); ++k) csv << mode_list[k] << ',' << errors[k] << '\n';

    json out = {{"recipe", "truncation-sweep"},
                {"modes", mode_list},
                {"relative_error", errors}};
    write_json(dir / "metrics.json", out);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int recipe_gibbs(const EvaluateConfig& cfg) {
    const auto [w, h] = parse_size(cfg.size);
    const int n = 8;
    const double wavelength = 96.0;

    // Hexagonal cells are incompatible with the periodic representation;
    // clamped advection keeps the data itself boundary-honest.
    auto [vx1, vy1] = hexagonal_field(1.0, wavelength, w, h);
    double vmax = 0.0;
    for (size_t k = 0; k < vx1.v.size(); ++k)
        vmax = std::max(vmax, std::hypot(vx1.v[k], vy1.v[k]));
    auto [tx, ty] = hexagonal_field(0.4 / vmax, wavelength, w, h);

    Grid seed_img = make_texture(w, h, cfg.texture_scale, cfg.seed);
    AdvectionConfig adv;
    adv.n_frames = cfg.frames;
    adv.substeps = 2;
    adv.interpolation = Interp::bicubic;
    adv.boundary = Boundary::clamp;
    ImageCube cube = advect(seed_img, tx, ty, adv);

    auto [v, rep] = estimate(cube, n, n, solver_options(cfg));
    auto [fx, fy] = evaluate(v);
    const std::vector<double> profile = boundary_residual_profile(tx, ty, fx, fy);

    const int margin = w / (2 * n);  // half a wavelength of the truncated mode
    double edge_peak = 0.0, interior_max = 0.0;
    for (int x = 0; x < w; ++x) {
        if (x < margin || x >= w - margin)
            edge_peak = std::max(edge_peak, profile[x]);
        else
            interior_max = std::max(interior_max, profile[x]);
    }
    const bool pass = interior_max < edge_peak / 3.0;

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_profile_csv(dir / "boundary_profile.csv", profile);
    json out = {{"recipe", "gibbs"},         {"modes", n},
                {"margin", margin},          {"edge_peak", edge_peak},
                {"interior_max", interior_max}, {"pass", pass}};
    write_json(dir / "metrics.json", out);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int recipe_convergence(const EvaluateConfig& cfg) {
    const std::vector<int> windows = {2, 5, 10, 20, 40};
    ImageCube cube;
    if (!cfg.cube.empty()) {
        cube = load_cube(cfg.cube);
    } else {
        EvaluateConfig synth_cfg = cfg;
        synth_cfg.frames = 80;
        const auto [w, h] = parse_size(cfg.size);
        RecoverSetup s = synth_setup(synth_cfg, w, h, cfg.texture_scale, cfg.rms);
        const double frame_rms = grid_rms(s.cube.frame_grid(0));
        cube = add_traveling_waves(s.cube, 0.1 * frame_rms, cfg.seed + 5);
    }

    const auto table =
        convergence_study(cube, cfg.modes, cfg.modes, windows, solver_options(cfg));
    std::vector<double> ns, ds;
    for (const auto& e : table) {
        ns.push_back(e.window);
        ds.push_back(e.distance);
    }
    const double slope = loglog_slope(ns, ds);

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_convergence_csv(dir / "convergence.csv", table);
    json out = {{"recipe", "convergence"},
                {"windows", ns},
                {"distance", ds},
                {"loglog_slope", slope}};
    write_json(dir / "metrics.json", out);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int recipe_gradient_ramp(const EvaluateConfig& cfg) {
    const auto [w, h] = parse_size(cfg.size);
    const int border = default_border(cfg.modes, cfg.modes, w, h);

    RecoverSetup s = synth_setup(cfg, w, h, cfg.texture_scale, cfg.rms);
    Grid ramp(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            ramp(y, x) = 0.5 + static_cast<double>(x) / (w - 1);  // 0.5 .. 1.5
    ImageCube ramped = apply_gradient(s.cube, ramp);

    auto [v0, r0] = estimate(s.cube, cfg.modes, cfg.modes, solver_options(cfg));
    auto [v1, r1] = estimate(ramped, cfg.modes, cfg.modes, solver_options(cfg));
    const double e0 = relative_field_error(v0, s.truth_x, s.truth_y, border);
    const double e1 = relative_field_error(v1, s.truth_x, s.truth_y, border);

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    json out = {{"recipe", "gradient-ramp"},
                {"error_flat", e0},
                {"error_ramped", e1},
                {"error_change", std::fabs(e1 - e0)}};
    write_json(dir / "metrics.json", out);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int recipe_missing_frames(const EvaluateConfig& cfg) {
    EvaluateConfig synth_cfg = cfg;
    synth_cfg.frames = 40;
    const auto [w, h] = parse_size(cfg.size);
    RecoverSetup s = synth_setup(synth_cfg, w, h, cfg.texture_scale, cfg.rms);
    s.cube = scale_intensity(s.cube, 700.0 / chi0_rms(s.cube));
    ImageCube noisy = add_gaussian_noise(s.cube, 150.0, cfg.seed + 100);

    const std::vector<int> dropped = {10, 20, 30};
    ImageCube holey = mark_missing(noisy, dropped);

    auto [v_full, r0] = estimate(noisy, cfg.modes, cfg.modes, solver_options(cfg));
    auto [v_drop, r1] = estimate(holey, cfg.modes, cfg.modes, solver_options(cfg));

    auto [ax, ay] = evaluate(v_full);
    auto [bx, by] = evaluate(v_drop);
    const int border = default_border(cfg.modes, cfg.modes, w, h);
    const FlowMetrics m = compare_fields(ax, ay, bx, by, border);
    const double full_rms = compare_fields(ax, ay, ax, ay, border).rms_speed;
    const double rel_change = m.field_distance / full_rms;

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    json out = {{"recipe", "missing-frames"},
                {"dropped", dropped},
                {"relative_change", rel_change}};
    write_json(dir / "metrics.json", out);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_evaluate(const EvaluateConfig& cfg) {
    if (cfg.recipe == "recover") return recipe_recover(cfg);
    if (cfg.recipe == "breakdown-sweep") return recipe_breakdown(cfg);
    if (cfg.recipe == "noise-sweep") return recipe_noise(cfg);
    if (cfg.recipe == "truncation-sweep") return recipe_truncation(cfg);
    if (cfg.recipe == "gibbs") return recipe_gibbs(cfg);
    if (cfg.recipe == "convergence") return recipe_convergence(cfg);
    if (cfg.recipe == "gradient-ramp") return recipe_gradient_ramp(cfg);
    if (cfg.recipe == "missing-frames") return recipe_missing_frames(cfg);
    throw ArgumentError("unknown recipe: " + cfg.recipe);
}

// ---------------------------------------------------------------------------
// bench

struct BenchConfig {
    std::string out;
    std::string modes_list = "4,8,12,16";
    std::string size = "256";
    int frames = 4;
    uint64_t seed = 1;
};

int run_bench(const BenchConfig& cfg) {
    const auto [w, h] = parse_size(cfg.size);
    const std::vector<int> modes = parse_list<int>(cfg.modes_list);

    Grid seed_img = make_texture(w, h, 12.0, cfg.seed);
    SpectralVelocity truth = random_field(4, 4, 0.2, cfg.seed + 1, w, h);
    auto [vx, vy] = evaluate(truth);
    AdvectionConfig adv;
    adv.n_frames = cfg.frames;
    adv.substeps = 1;
    ImageCube cube = advect(seed_img, vx, vy, adv);
    DerivativeProducts products = accumulate_products(cube);

    json runs = json::array();
    std::vector<double> sizes, times;
    for (int n : modes) {
        NormalSystem sys = assemble_implicit(products, n, n);
        Clock asm_clock;
        densify(sys);
        const double t_assemble = asm_clock.seconds();

        // Direct factor+solve, best of a few repetitions for small systems.
        double t_solve = 1e300;
        const int reps = sys.dim() <= 700 ? 5 : (sys.dim() <= 1500 ? 2 : 1);
        for (int r = 0; r < reps; ++r) {
            Clock c;
            auto [v, rep] = solve_direct(sys);
            t_solve = std::min(t_solve, c.seconds());
        }
        sizes.push_back(static_cast<double>(n) * n);
        times.push_back(t_solve);
        runs.push_back({{"modes", n},
                        {"dim", sys.dim()},
                        {"t_assemble_dense", t_assemble},
                        {"t_solve_direct", t_solve}});
    }
    const double exponent = loglog_slope(sizes, times);

    // Structured vs dense matvec at the largest size.
    const int n_big = modes.back();
    NormalSystem sys = assemble_dense(products, n_big, n_big);
    StructuredOperator op(sys);
    Eigen::VectorXcd x = Eigen::VectorXcd::Random(sys.dim());
    Clock c1;
    for (int r = 0; r < 10; ++r) x = op.apply(x) / sys.dim();
    const double t_structured = c1.seconds() / 10;
    Clock c2;
    for (int r = 0; r < 10; ++r) x = (*sys.dense * x) / sys.dim();
    const double t_dense = c2.seconds() / 10;

    json out = {{"command", "bench"},
                {"width", w},
                {"height", h},
                {"frames", cfg.frames},
                {"runs", runs},
                {"solve_exponent_vs_nxny", exponent},
                {"matvec_structured_s", t_structured},
                {"matvec_dense_s", t_dense}};
    if (!cfg.out.empty()) write_json(cfg.out, out);
    std::cout << out.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// import

struct ImportConfig {
    std::string out;
    std::vector<std::string> frames;
    double pixel_scale = 0.0;
    double cadence = 0.0;
};

int run_import(const ImportConfig& cfg) {
    std::vector<Grid> frames;
    frames.reserve(cfg.frames.size());
    for (const auto& p : cfg.frames) frames.push_back(load_pgm(p));
    ImageCube cube = cube_from_frames(frames, cfg.pixel_scale, cfg.cadence);
    save_cube(cube, cfg.out);
    std::cout << "wrote " << cfg.out << " (" << cube.t << "x" << cube.h << "x" << cube.w
              << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral optical flow: estimate smooth velocity fields from image sequences"};
    app.require_subcommand(1);

    GenerateConfig gen;
    auto* cgen = app.add_subcommand("generate", "synthesize a cube with known ground truth");
    cgen->add_option("--out", gen.out, "output basename (.ofc/.ofv/.manifest.json)")->required();
    cgen->add_option("--flow", gen.flow, "zero|uniform|random|hexagonal");
    cgen->add_option("--frames", gen.frames);
    cgen->add_option("--size", gen.size, "W or WxH");
    cgen->add_option("--texture-scale", gen.texture_scale, "feature wavelength, px");
    cgen->add_option("--seed", gen.seed);
    cgen->add_option("--rms", gen.rms, "target flow RMS, px/frame");
    cgen->add_option("--modes", gen.modes, "random-flow modes per axis");
    cgen->add_option("--ux", gen.ux);
    cgen->add_option("--uy", gen.uy);
    cgen->add_option("--hex-wavelength", gen.hex_wavelength);
    cgen->add_option("--hex-amplitude", gen.hex_amplitude);
    cgen->add_option("--hex-max-speed", gen.hex_max_speed);
    cgen->add_option("--interp", gen.interp, "bicubic|spectral");
    cgen->add_option("--boundary", gen.boundary, "periodic|clamp");
    cgen->add_option("--substeps", gen.substeps);
    cgen->add_option("--noise", gen.noise, "Gaussian sigma, counts");
    cgen->add_option("--waves", gen.waves, "traveling-wave RMS as fraction of image RMS");
    cgen->add_option("--scale-chi0", gen.scale_chi0, "rescale intensities to this chi0 RMS");
    cgen->add_option("--missing", gen.missing, "frame indices to blank, e.g. 3,5");
    cgen->add_option("--pixel-scale", gen.pixel_scale, "km per pixel");
    cgen->add_option("--cadence", gen.cadence, "seconds per frame");

    EstimateConfig est;
    auto* cest = app.add_subcommand("estimate", "fit a velocity field to a cube");
    cest->add_option("--cube", est.cube)->required();
    cest->add_option("--out", est.out, "solution velocity file (.ofv)")->required();
    cest->add_option("--report", est.report, "JSON report path");
    cest->add_option("--csv", est.csv, "evaluated-grid CSV path");
    cest->add_option("--modes", est.modes, "modes per axis (both)");
    cest->add_option("--nx", est.nx);
    cest->add_option("--ny", est.ny);
    cest->add_option("--solver", est.solver, "direct|iterative");
    cest->add_option("--tol", est.tol);
    cest->add_option("--max-iter", est.max_iter);
    cest->add_option("--missing", est.missing, "skip|include");
    cest->add_flag("--units", est.units, "report km/s using cube pixel_scale/cadence");

    EvaluateConfig ev;
    auto* cev = app.add_subcommand("evaluate", "run a validation recipe");
    cev->add_option("recipe", ev.recipe,
                    "recover|breakdown-sweep|noise-sweep|truncation-sweep|gibbs|convergence|"
                    "gradient-ramp|missing-frames")
        ->required();
    cev->add_option("--out-dir", ev.out_dir);
    cev->add_option("--cube", ev.cube);
    cev->add_option("--truth", ev.truth);
    cev->add_option("--solution", ev.solution);
    cev->add_option("--seed", ev.seed);
    cev->add_option("--size", ev.size);
    cev->add_option("--frames", ev.frames);
    cev->add_option("--texture-scale", ev.texture_scale);
    cev->add_option("--modes", ev.modes);
    cev->add_option("--rms", ev.rms);
    cev->add_option("--solver", ev.solver);
    cev->add_option("--tol", ev.tol);

    BenchConfig bench;
    auto* cbench = app.add_subcommand("bench", "time assembly and solvers over a mode sweep");
    cbench->add_option("--out", bench.out, "JSON report path");
    cbench->add_option("--modes-list", bench.modes_list);
    cbench->add_option("--size", bench.size);
    cbench->add_option("--frames", bench.frames);
    cbench->add_option("--seed", bench.seed);

    ImportConfig imp;
    auto* cimp = app.add_subcommand("import", "build a cube from PGM frames");
    cimp->add_option("--out", imp.out)->required();
    cimp->add_option("frames", imp.frames, "P5 PGM files, in time order")->required();
    cimp->add_option("--pixel-scale", imp.pixel_scale);
    cimp->add_option("--cadence", imp.cadence);

    try {
        app.parse(argc, argv);
        if (cgen->parsed()) return run_generate(gen);
        if (cest->parsed()) return run_estimate(est);
        if (cev->parsed()) return run_evaluate(ev);
        if (cbench->parsed()) return run_bench(bench);
        if (cimp->parsed()) return run_import(imp);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const DegenerateDataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
