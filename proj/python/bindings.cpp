#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <complex>
#include <cstring>

#include "specflow/cube.hpp"
#include "specflow/errors.hpp"
#include "specflow/metrics.hpp"
#include "specflow/solve.hpp"
#include "specflow/spectral.hpp"
#include "specflow/synth.hpp"

namespace py = pybind11;
using namespace specflow;

namespace {

Grid grid_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
    if (arr.ndim() != 2) throw ArgumentError("expected a 2-D array");
    Grid g(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
    std::memcpy(g.v.data(), arr.data(), sizeof(double) * g.size());
    return g;
}

py::array_t<double> array_from_grid(const Grid& g) {
    py::array_t<double> arr({g.ny, g.nx});
    std::memcpy(arr.mutable_data(), g.v.data(), sizeof(double) * g.size());
    return arr;
}

ImageCube cube_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> arr,
                          double pixel_scale, double cadence) {
    if (arr.ndim() != 3) throw ArgumentError("expected a (t, h, w) array");
    ImageCube c;
    c.t = static_cast<int>(arr.shape(0));
    c.h = static_cast<int>(arr.shape(1));
    c.w = static_cast<int>(arr.shape(2));
    c.pixel_scale = pixel_scale;
    c.cadence = cadence;
    c.data.resize(static_cast<size_t>(c.t) * c.h * c.w);
    c.valid.assign(c.t, 1);
    std::memcpy(c.data.data(), arr.data(), sizeof(double) * c.data.size());
    return c;
}

py::array_t<double> array_from_cube(const ImageCube& c) {
    py::array_t<double> arr({c.t, c.h, c.w});
    std::memcpy(arr.mutable_data(), c.data.data(), sizeof(double) * c.data.size());
    return arr;
}

py::array_t<std::complex<double>> amplitudes_array(const std::vector<std::complex<double>>& amp,
                                                   int n_x, int n_y) {
    py::array_t<std::complex<double>> arr({2 * n_y + 1, 2 * n_x + 1});
    std::memcpy(arr.mutable_data(), amp.data(), sizeof(std::complex<double>) * amp.size());
    return arr;
}

py::dict report_dict(const SolveReport& r) {
    py::dict d;
    d["method"] = r.method == SolverMethod::direct ? "direct" : "iterative";
    d["iterations"] = r.iterations;
    d["residual"] = r.residual;
    d["wall_time"] = r.wall_time;
    d["symmetry_deviation"] = r.symmetry_deviation;
    d["condition_estimate"] = r.condition_estimate;
    return d;
}

EstimateOptions make_options(const std::string& solver, double tol, int max_iter,
                             bool include_invalid) {
    EstimateOptions opt;
    if (solver == "direct")
        opt.solver = SolverMethod::direct;
    else if (solver == "iterative")
        opt.solver = SolverMethod::iterative;
    else
        throw ArgumentError("solver must be 'direct' or 'iterative'");
    opt.tol = tol;
    opt.max_iter = max_iter;
    opt.include_invalid_frames = include_invalid;
    return opt;
}

Interp parse_interp(const std::string& s) {
    if (s == "bicubic") return Interp::bicubic;
    if (s == "spectral") return Interp::spectral;
    throw ArgumentError("interpolation must be 'bicubic' or 'spectral'");
}

Boundary parse_boundary(const std::string& s) {
    if (s == "periodic") return Boundary::periodic;
    if (s == "clamp") return Boundary::clamp;
    throw ArgumentError("boundary must be 'periodic' or 'clamp'");
}

}  // namespace

PYBIND11_MODULE(_specflow, m) {
    m.doc() = "Spectral optical flow: global least-squares velocity fields from image sequences";

    py::register_exception<ArgumentError>(m, "SpecflowArgumentError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "SpecflowFormatError", PyExc_ValueError);
    py::register_exception<IoError>(m, "SpecflowIoError", PyExc_IOError);
    py::register_exception<DegenerateDataError>(m, "DegenerateDataError", PyExc_RuntimeError);
    py::register_exception<ConvergenceError>(m, "SolverConvergenceError", PyExc_RuntimeError);

    py::class_<ImageCube>(m, "ImageCube")
        .def(py::init([](py::array_t<double, py::array::c_style | py::array::forcecast> a,
                         double pixel_scale, double cadence) {
                 return cube_from_array(a, pixel_scale, cadence);
             }),
             py::arg("frames"), py::arg("pixel_scale") = 0.0, py::arg("cadence") = 0.0)
        .def_readonly("t", &ImageCube::t)
        .def_readonly("h", &ImageCube::h)
        .def_readonly("w", &ImageCube::w)
        .def_readwrite("pixel_scale", &ImageCube::pixel_scale)
        .def_readwrite("cadence", &ImageCube::cadence)
        .def_property_readonly("data", &array_from_cube)
        .def_property_readonly("valid",
                               [](const ImageCube& c) {
                                   py::array_t<bool> arr(c.t);
                                   auto* p = arr.mutable_data();
                                   for (int k = 0; k < c.t; ++k) p[k] = c.valid[k] != 0;
                                   return arr;
                               })
        .def("__repr__", [](const ImageCube& c) {
            return "<ImageCube " + std::to_string(c.t) + "x" + std::to_string(c.h) + "x" +
                   std::to_string(c.w) + ">";
        });

    py::class_<SpectralVelocity>(m, "SpectralVelocity")
        .def_readonly("n_x", &SpectralVelocity::n_x)
        .def_readonly("n_y", &SpectralVelocity::n_y)
        .def_readonly("X", &SpectralVelocity::X)
        .def_readonly("Y", &SpectralVelocity::Y)
        .def_property_readonly(
            "alpha",
            [](const SpectralVelocity& v) { return amplitudes_array(v.alpha, v.n_x, v.n_y); })
        .def_property_readonly(
            "beta",
            [](const SpectralVelocity& v) { return amplitudes_array(v.beta, v.n_x, v.n_y); })
        .def("evaluate",
             [](const SpectralVelocity& v) {
                 auto [vx, vy] = evaluate(v);
                 return py::make_tuple(array_from_grid(vx), array_from_grid(vy));
             })
        .def("mean_flow", [](const SpectralVelocity& v) { return mean_flow(v); })
        .def("subtract_mean_flow",
             [](const SpectralVelocity& v) { return subtract_mean_flow(v); })
        .def("symmetry_deviation", [](const SpectralVelocity& v) { return symmetry_deviation(v); })
        .def("__repr__", [](const SpectralVelocity& v) {
            return "<SpectralVelocity n=(" + std::to_string(v.n_x) + "," + std::to_string(v.n_y) +
                   ") domain=" + std::to_string(v.X) + "x" + std::to_string(v.Y) + ">";
        });

    m.def("load_cube", &load_cube, py::arg("path"));
    m.def("save_cube", &save_cube, py::arg("cube"), py::arg("path"), py::arg("as_f32") = false);
    m.def("load_velocity", &load_velocity, py::arg("path"));
    m.def("save_velocity", &save_velocity, py::arg("velocity"), py::arg("path"));

    m.def(
        "add_gaussian_noise",
        [](const ImageCube& c, double sigma, uint64_t seed) {
            return add_gaussian_noise(c, sigma, seed);
        },
        py::arg("cube"), py::arg("sigma"), py::arg("seed"));
    m.def(
        "apply_gradient",
        [](const ImageCube& c,
           py::array_t<double, py::array::c_style | py::array::forcecast> profile) {
            return apply_gradient(c, grid_from_array(profile));
        },
        py::arg("cube"), py::arg("profile"));
    m.def(
        "mark_missing",
        [](const ImageCube& c, const std::vector<int>& indices) {
            return mark_missing(c, indices);
        },
        py::arg("cube"), py::arg("indices"));

    m.def(
        "make_texture",
        [](int width, int height, double feature_scale, uint64_t seed) {
            return array_from_grid(make_texture(width, height, feature_scale, seed));
        },
        py::arg("width"), py::arg("height"), py::arg("feature_scale"), py::arg("seed"));
    m.def("random_field", &random_field, py::arg("n_x"), py::arg("n_y"), py::arg("target_rms"),
          py::arg("seed"), py::arg("X"), py::arg("Y"));
    m.def(
        "hexagonal_field",
        [](double amplitude, double wavelength, int X, int Y) {
            auto [vx, vy] = hexagonal_field(amplitude, wavelength, X, Y);
            return py::make_tuple(array_from_grid(vx), array_from_grid(vy));
        },
        py::arg("amplitude"), py::arg("wavelength"), py::arg("X"), py::arg("Y"));

    m.def(
        "advect",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> seed,
           py::array_t<double, py::array::c_style | py::array::forcecast> vx,
           py::array_t<double, py::array::c_style | py::array::forcecast> vy, int n_frames,
           int substeps, const std::string& interpolation, const std::string& boundary) {
            AdvectionConfig cfg;
            cfg.n_frames = n_frames;
            cfg.substeps = substeps;
            cfg.interpolation = parse_interp(interpolation);
            cfg.boundary = parse_boundary(boundary);
            return advect(grid_from_array(seed), grid_from_array(vx), grid_from_array(vy), cfg);
        },
        py::arg("seed"), py::arg("vx"), py::arg("vy"), py::arg("n_frames"),
        py::arg("substeps") = 1, py::arg("interpolation") = "bicubic",
        py::arg("boundary") = "periodic");

    m.def(
        "estimate",
        [](const ImageCube& cube, int n_x, int n_y, const std::string& solver, double tol,
           int max_iter, bool include_invalid) {
            auto [v, rep] =
                estimate(cube, n_x, n_y, make_options(solver, tol, max_iter, include_invalid));
            return py::make_tuple(v, report_dict(rep));
        },
        py::arg("cube"), py::arg("n_x"), py::arg("n_y"), py::arg("solver") = "direct",
        py::arg("tol") = 1e-8, py::arg("max_iter") = 2000, py::arg("include_invalid") = false);

    m.def(
        "merit",
        [](const ImageCube& cube, const SpectralVelocity& v, bool include_invalid) {
            const MeritValue mv = merit(cube, v, include_invalid);
            py::dict d;
            d["chi2"] = mv.chi2;
            d["chi0"] = mv.chi0;
            d["chi_rms"] = mv.rms;
            d["chi0_rms"] = mv.rms0;
            d["terms"] = mv.terms;
            return d;
        },
        py::arg("cube"), py::arg("velocity"), py::arg("include_invalid") = false);

    m.def(
        "compare_fields",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> v1x,
           py::array_t<double, py::array::c_style | py::array::forcecast> v1y,
           py::array_t<double, py::array::c_style | py::array::forcecast> v2x,
           py::array_t<double, py::array::c_style | py::array::forcecast> v2y,
           int exclude_border) {
            const FlowMetrics fm =
                compare_fields(grid_from_array(v1x), grid_from_array(v1y), grid_from_array(v2x),
                               grid_from_array(v2y), exclude_border);
            py::dict d;
            d["field_distance"] = fm.field_distance;
            d["correlation"] = fm.correlation;
            d["rms_speed"] = fm.rms_speed;
            d["median_speed"] = fm.median_speed;
            d["max_speed"] = fm.max_speed;
            return d;
        },
        py::arg("v1x"), py::arg("v1y"), py::arg("v2x"), py::arg("v2y"),
        py::arg("exclude_border") = 0);

    m.def("default_border", &default_border, py::arg("n_x"), py::arg("n_y"), py::arg("X"),
          py::arg("Y"));

    m.def(
        "speed_histogram",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> vx,
           py::array_t<double, py::array::c_style | py::array::forcecast> vy, double bin_width,
           double unit_scale) {
            const SpeedHistogram h =
                speed_histogram(grid_from_array(vx), grid_from_array(vy), bin_width, unit_scale);
            py::dict d;
            d["bin_width"] = h.bin_width;
            d["centers"] = h.centers;
            d["density"] = h.density;
            d["rms"] = h.rms;
            d["median"] = h.median;
            d["max"] = h.max;
            return d;
        },
        py::arg("vx"), py::arg("vy"), py::arg("bin_width"), py::arg("unit_scale") = 1.0);
}
