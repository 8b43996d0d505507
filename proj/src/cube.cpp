#include "specflow/cube.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "specflow/errors.hpp"
#include "specflow/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "cube/velocity file I/O assumes a little-endian host");

namespace specflow {

namespace {

constexpr char kMagic[4] = {'O', 'F', 'C', '1'};
constexpr size_t kMaxElements = size_t(1) << 31;

template <typename T>
void write_raw(std::ofstream& f, T v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw FormatError("cube file truncated");
    return v;
}

bool frame_all_zero(const ImageCube& c, int k) {
    const double* p = c.frame(k);
    const size_t n = static_cast<size_t>(c.h) * c.w;
    for (size_t i = 0; i < n; ++i)
        if (p[i] != 0.0) return false;
    return true;
}

}  // namespace

Grid ImageCube::frame_grid(int k) const {
    if (k < 0 || k >= t) throw ArgumentError("frame index out of range");
    Grid g(h, w);
    std::memcpy(g.v.data(), frame(k), sizeof(double) * g.size());
    return g;
}

int ImageCube::valid_count() const {
    int n = 0;
    for (uint8_t f : valid) n += (f != 0);
    return n;
}

ImageCube cube_from_frames(const std::vector<Grid>& frames, double pixel_scale, double cadence) {
    if (frames.empty()) throw ArgumentError("cube_from_frames: no frames");
    ImageCube c;
    c.t = static_cast<int>(frames.size());
    c.h = frames[0].ny;
    c.w = frames[0].nx;
    c.pixel_scale = pixel_scale;
    c.cadence = cadence;
    c.data.resize(static_cast<size_t>(c.t) * c.h * c.w);
    c.valid.assign(c.t, 1);
    for (int k = 0; k < c.t; ++k) {
        if (frames[k].ny != c.h || frames[k].nx != c.w)
            throw ArgumentError("cube_from_frames: frame shapes differ");
        std::memcpy(c.frame(k), frames[k].v.data(), sizeof(double) * frames[k].size());
    }
    return c;
}

ImageCube load_cube(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open cube file: " + path.string());

    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("not a cube file (bad magic): " + path.string());

    const auto t = read_raw<uint32_t>(f);
    const auto h = read_raw<uint32_t>(f);
    const auto w = read_raw<uint32_t>(f);
    const auto dtype = read_raw<uint32_t>(f);
    if (t == 0 || h == 0 || w == 0) throw FormatError("cube with zero dimension");
    if (dtype > 1) throw FormatError("unknown cube dtype " + std::to_string(dtype));
    const size_t total = size_t(t) * size_t(h) * size_t(w);
    if (size_t(t) > kMaxElements / h / w || total > kMaxElements)
        throw FormatError("cube dimensions overflow");

    ImageCube c;
    c.t = static_cast<int>(t);
    c.h = static_cast<int>(h);
    c.w = static_cast<int>(w);
    c.pixel_scale = read_raw<double>(f);
    c.cadence = read_raw<double>(f);
    c.valid.resize(t);
    f.read(reinterpret_cast<char*>(c.valid.data()), t);
    if (!f) throw FormatError("cube file truncated");
    for (auto& v : c.valid) v = (v != 0);

    c.data.resize(total);
    if (dtype == 1) {
        f.read(reinterpret_cast<char*>(c.data.data()), std::streamsize(total * sizeof(double)));
        if (!f) throw FormatError("cube file truncated");
    } else {
        std::vector<float> buf(total);
        f.read(reinterpret_cast<char*>(buf.data()), std::streamsize(total * sizeof(float)));
        if (!f) throw FormatError("cube file truncated");
        for (size_t i = 0; i < total; ++i) c.data[i] = buf[i];
    }
    for (double v : c.data)
        if (!std::isfinite(v)) throw FormatError("cube contains non-finite intensity");

    // Blank frames count as missing data, but only relative to frames that
    // carry data: a uniformly zero cube has no dropouts to single out.
    bool any_nonzero = false;
    for (int k = 0; k < c.t && !any_nonzero; ++k) any_nonzero = !frame_all_zero(c, k);
    if (any_nonzero)
        for (int k = 0; k < c.t; ++k)
            if (frame_all_zero(c, k)) c.valid[k] = 0;
    return c;
}

void save_cube(const ImageCube& c, const std::filesystem::path& path, bool as_f32) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write cube file: " + path.string());
    f.write(kMagic, 4);
    write_raw<uint32_t>(f, static_cast<uint32_t>(c.t));
    write_raw<uint32_t>(f, static_cast<uint32_t>(c.h));
    write_raw<uint32_t>(f, static_cast<uint32_t>(c.w));
    write_raw<uint32_t>(f, as_f32 ? 0u : 1u);
    write_raw<double>(f, c.pixel_scale);
    write_raw<double>(f, c.cadence);
    f.write(reinterpret_cast<const char*>(c.valid.data()), c.t);
    if (as_f32) {
        std::vector<float> buf(c.data.size());
        for (size_t i = 0; i < c.data.size(); ++i) buf[i] = static_cast<float>(c.data[i]);
        f.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size() * 4));
    } else {
        f.write(reinterpret_cast<const char*>(c.data.data()),
                std::streamsize(c.data.size() * sizeof(double)));
    }
    if (!f) throw IoError("short write: " + path.string());
}

ImageCube add_gaussian_noise(const ImageCube& cube, double sigma, uint64_t seed) {
    if (sigma < 0.0) throw ArgumentError("noise sigma must be >= 0");
    ImageCube out = cube;
    if (sigma == 0.0) return out;
    Rng rng(seed);
    const size_t n = static_cast<size_t>(cube.h) * cube.w;
    for (int k = 0; k < cube.t; ++k) {
        if (!cube.valid[k]) continue;
        double* p = out.frame(k);
        for (size_t i = 0; i < n; ++i) p[i] += sigma * rng.gaussian();
    }
    return out;
}

ImageCube apply_gradient(const ImageCube& cube, const Grid& profile) {
    if (profile.ny != cube.h || profile.nx != cube.w)
        throw ArgumentError("gradient profile shape must match frames");
    for (double v : profile.v)
        if (!(v > 0.0)) throw ArgumentError("gradient profile must be strictly positive");
    ImageCube out = cube;
    const size_t n = profile.size();
    for (int k = 0; k < cube.t; ++k) {
        double* p = out.frame(k);
        for (size_t i = 0; i < n; ++i) p[i] *= profile.v[i];
    }
    return out;
}

ImageCube scale_intensity(const ImageCube& cube, double factor) {
    if (!(factor > 0.0)) throw ArgumentError("intensity scale must be positive");
    ImageCube out = cube;
    for (auto& v : out.data) v *= factor;
    return out;
}

ImageCube mark_missing(const ImageCube& cube, std::span<const int> indices) {
    ImageCube out = cube;
    for (int i : indices) {
        if (i < 0 || i >= cube.t)
            throw ArgumentError("missing-frame index out of range: " + std::to_string(i));
        out.valid[i] = 0;
    }
    return out;
}

ImageCube reverse_time(const ImageCube& cube) {
    ImageCube out = cube;
    const size_t n = static_cast<size_t>(cube.h) * cube.w;
    for (int k = 0; k < cube.t; ++k) {
        std::memcpy(out.frame(k), cube.frame(cube.t - 1 - k), sizeof(double) * n);
        out.valid[k] = cube.valid[cube.t - 1 - k];
    }
    return out;
}

ImageCube slice_frames(const ImageCube& cube, int first, int count) {
    if (first < 0 || count < 1 || first + count > cube.t)
        throw ArgumentError("frame slice out of range");
    ImageCube out;
    out.t = count;
    out.h = cube.h;
    out.w = cube.w;
    out.pixel_scale = cube.pixel_scale;
    out.cadence = cube.cadence;
    const size_t n = static_cast<size_t>(cube.h) * cube.w;
    out.data.resize(n * count);
    out.valid.assign(cube.valid.begin() + first, cube.valid.begin() + first + count);
    std::memcpy(out.data.data(), cube.frame(first), sizeof(double) * n * count);
    return out;
}

Grid load_pgm(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open PGM file: " + path.string());

    auto next_token = [&f]() -> std::string {
        std::string tok;
        int ch;
        while ((ch = f.get()) != EOF) {
            if (ch == '#') {  // comment to end of line
                while ((ch = f.get()) != EOF && ch != '\n') {}
                continue;
            }
            if (std::isspace(ch)) {
                if (!tok.empty()) break;
                continue;
            }
            tok.push_back(static_cast<char>(ch));
        }
        return tok;
    };

    if (next_token() != "P5") throw FormatError("not a binary PGM (P5): " + path.string());
    int w = 0, h = 0;
    long maxval = 0;
    try {
        w = std::stoi(next_token());
        h = std::stoi(next_token());
        maxval = std::stol(next_token());
    } catch (const std::exception&) {
        throw FormatError("bad PGM header: " + path.string());
    }
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
        throw FormatError("bad PGM header: " + path.string());

    Grid g(h, w);
    const size_t n = g.size();
    if (maxval < 256) {
        std::vector<uint8_t> buf(n);
        f.read(reinterpret_cast<char*>(buf.data()), std::streamsize(n));
        if (!f) throw FormatError("PGM truncated: " + path.string());
        for (size_t i = 0; i < n; ++i) g.v[i] = buf[i];
    } else {
        // 16-bit PGM samples are big-endian.
        std::vector<uint8_t> buf(n * 2);
        f.read(reinterpret_cast<char*>(buf.data()), std::streamsize(n * 2));
        if (!f) throw FormatError("PGM truncated: " + path.string());
        for (size_t i = 0; i < n; ++i)
            g.v[i] = static_cast<double>((buf[2 * i] << 8) | buf[2 * i + 1]);
    }
    return g;
}

}  // namespace specflow
