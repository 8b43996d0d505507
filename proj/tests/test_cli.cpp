#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>

#include "helpers.hpp"
#include "specflow/cube.hpp"
#include "specflow/metrics.hpp"
#include "specflow/spectral.hpp"

using namespace specflow;
using testutil::TempDir;
using testutil::run_cli;
using json = nlohmann::json;

namespace {
bool cli_available() { return std::getenv("SPECFLOW_CLI") != nullptr; }
}  // namespace

TEST_CASE("cli: generate is deterministic per seed") {
    if (!cli_available()) return;
    TempDir dir;
    const std::string common =
        " --flow random --size 64 --frames 3 --modes 2 --rms 0.15 --seed 9 --interp spectral";
    CHECK(run_cli(dir, "generate --out " + (dir / "a").string() + common) == 0);
    CHECK(run_cli(dir, "generate --out " + (dir / "b").string() + common) == 0);
    CHECK(testutil::read_bytes(dir / "a.ofc") == testutil::read_bytes(dir / "b.ofc"));
    CHECK(testutil::read_bytes(dir / "a.ofv") == testutil::read_bytes(dir / "b.ofv"));

    // manifest records the run parameters
    std::ifstream mf(dir / "a.manifest.json");
    const json manifest = json::parse(mf);
    CHECK(manifest["rms"] == 0.15);
    CHECK(manifest["seed"] == 9);
}

TEST_CASE("cli: zero flow produces a static cube") {
    if (!cli_available()) return;
    TempDir dir;
    CHECK(run_cli(dir, "generate --out " + (dir / "z").string() +
                           " --flow zero --size 32 --frames 3 --seed 4") == 0);
    ImageCube cube = load_cube(dir / "z.ofc");
    REQUIRE(cube.t == 3);
    for (int f = 1; f < 3; ++f)
        for (int k = 0; k < 32 * 32; ++k) CHECK(cube.frame(f)[k] == cube.frame(0)[k]);
    SpectralVelocity truth = load_velocity(dir / "z.ofv");
    CHECK(truth.n_x == 0);
    CHECK(mean_flow(truth) == std::pair<double, double>{0.0, 0.0});
}

TEST_CASE("cli: estimate round trip with recover recipe") {
    if (!cli_available()) return;
    TempDir dir;
    REQUIRE(run_cli(dir, "generate --out " + (dir / "d").string() +
                             " --flow random --size 64 --frames 6 --modes 2 --rms 0.15 "
                             "--seed 12 --interp spectral") == 0);
    REQUIRE(run_cli(dir, "estimate --cube " + (dir / "d.ofc").string() + " --out " +
                             (dir / "fit.ofv").string() + " --modes 2 --report " +
                             (dir / "rep.json").string()) == 0);

    std::ifstream rf(dir / "rep.json");
    const json rep = json::parse(rf);
    CHECK(rep["converged"] == true);
    CHECK(rep["residual"].get<double>() <= 1e-8);
    CHECK(rep["chi2"].get<double>() < rep["chi0"].get<double>());

    std::string out;
    CHECK(run_cli(dir,
                  "evaluate recover --solution " + (dir / "fit.ofv").string() + " --truth " +
                      (dir / "d.ofv").string() + " --cube " + (dir / "d.ofc").string() +
                      " --out-dir " + dir.path.string(),
                  &out) == 0);
    std::ifstream mf(dir / "metrics.json");
    const json metrics = json::parse(mf);
    CHECK(metrics["relative_rms_error"].get<double>() < 0.05);
    CHECK(metrics["correlation"].get<double>() > 0.99);
    CHECK(std::filesystem::exists(dir / "histogram.csv"));
    CHECK(std::filesystem::exists(dir / "zonal_profile.csv"));
}

TEST_CASE("cli: solvers agree") {
    if (!cli_available()) return;
    TempDir dir;
    REQUIRE(run_cli(dir, "generate --out " + (dir / "d").string() +
                             " --flow random --size 64 --frames 5 --modes 3 --rms 0.12 "
                             "--seed 5 --interp spectral") == 0);
    REQUIRE(run_cli(dir, "estimate --cube " + (dir / "d.ofc").string() + " --out " +
                             (dir / "dir.ofv").string() + " --modes 3 --solver direct") == 0);
    REQUIRE(run_cli(dir, "estimate --cube " + (dir / "d.ofc").string() + " --out " +
                             (dir / "it.ofv").string() +
                             " --modes 3 --solver iterative --tol 1e-8") == 0);
    auto [ax, ay] = evaluate(load_velocity(dir / "dir.ofv"));
    auto [bx, by] = evaluate(load_velocity(dir / "it.ofv"));
    Grid dx(64, 64), dy(64, 64);
    for (size_t k = 0; k < dx.v.size(); ++k) {
        dx.v[k] = ax.v[k] - bx.v[k];
        dy.v[k] = ay.v[k] - by.v[k];
    }
    CHECK(field_rms(dx, dy) < 1e-6 * field_rms(ax, ay));
}

TEST_CASE("cli: exit codes") {
    if (!cli_available()) return;
    TempDir dir;

    // degenerate data: constant cube
    std::vector<Grid> frames(3, Grid(32, 32, 5.0));
    save_cube(cube_from_frames(frames), dir / "flat.ofc");
    CHECK(run_cli(dir, "estimate --cube " + (dir / "flat.ofc").string() + " --out " +
                           (dir / "x.ofv").string() + " --modes 2") == 3);

    // usage errors
    CHECK(run_cli(dir, "estimate --cube nope.ofc") == 2);           // missing --out
    CHECK(run_cli(dir, "evaluate no-such-recipe") == 2);
    CHECK(run_cli(dir, "generate --out x --flow nope") == 2);

    // I/O errors
    CHECK(run_cli(dir, "estimate --cube " + (dir / "absent.ofc").string() + " --out " +
                           (dir / "x.ofv").string()) == 5);

    // forced non-convergence
    REQUIRE(run_cli(dir, "generate --out " + (dir / "g").string() +
                             " --flow random --size 64 --frames 4 --modes 3 --rms 0.1 --seed 3 "
                             "--interp spectral") == 0);
    CHECK(run_cli(dir, "estimate --cube " + (dir / "g.ofc").string() + " --out " +
                           (dir / "y.ofv").string() +
                           " --modes 3 --solver iterative --tol 1e-12 --max-iter 1") == 4);
}

TEST_CASE("cli: import PGM frames") {
    if (!cli_available()) return;
    TempDir dir;
    for (int k = 0; k < 2; ++k) {
        std::ofstream f(dir / ("f" + std::to_string(k) + ".pgm"), std::ios::binary);
        f << "P5\n4 3\n255\n";
        for (int i = 0; i < 12; ++i) f.put(static_cast<char>(10 * k + i));
    }
    CHECK(run_cli(dir, "import --out " + (dir / "c.ofc").string() + " " +
                           (dir / "f0.pgm").string() + " " + (dir / "f1.pgm").string()) == 0);
    ImageCube cube = load_cube(dir / "c.ofc");
    CHECK(cube.t == 2);
    CHECK(cube.h == 3);
    CHECK(cube.w == 4);
    CHECK(cube.frame(1)[0] == 10.0);
}

TEST_CASE("cli: missing-frame generation and include mode") {
    if (!cli_available()) return;
    TempDir dir;
    REQUIRE(run_cli(dir, "generate --out " + (dir / "m").string() +
                             " --flow random --size 64 --frames 8 --modes 2 --rms 0.1 --seed 6 "
                             "--interp spectral --missing 3,5") == 0);
    ImageCube cube = load_cube(dir / "m.ofc");
    CHECK(cube.valid[3] == 0);
    CHECK(cube.valid[5] == 0);
    CHECK(cube.valid[0] == 1);

    // skip and include modes both run; the blanks make them differ
    REQUIRE(run_cli(dir, "estimate --cube " + (dir / "m.ofc").string() + " --out " +
                             (dir / "skip.ofv").string() + " --modes 2") == 0);
    REQUIRE(run_cli(dir, "estimate --cube " + (dir / "m.ofc").string() + " --out " +
                             (dir / "incl.ofv").string() + " --modes 2 --missing include") == 0);
    auto [ax, ay] = evaluate(load_velocity(dir / "skip.ofv"));
    auto [bx, by] = evaluate(load_velocity(dir / "incl.ofv"));
    Grid dx(64, 64), dy(64, 64);
    for (size_t k = 0; k < dx.v.size(); ++k) {
        dx.v[k] = ax.v[k] - bx.v[k];
        dy.v[k] = ay.v[k] - by.v[k];
    }
    CHECK(field_rms(dx, dy) > 1e-6);
}
