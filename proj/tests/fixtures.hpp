#pragma once

// Test-only scene rendering and dataset writing. Independent of the
// library's flow, pose and warp code so it can serve as their oracle.

#include "tofdepth/core.hpp"
#include "tofdepth/dataset.hpp"
#include "tofdepth/png_io.hpp"
#include "tofdepth/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace tofdepth::fixture {

/// Smooth value noise in [0, 1]: two octaves of bilinearly interpolated
/// lattice values with smoothstep weights.
class ValueNoise {
public:
    explicit ValueNoise(std::uint64_t seed) : seed_(seed) {}

    [[nodiscard]] double operator()(double x, double y) const {
        return 0.7 * octave(x, y, 0) + 0.3 * octave(2.7 * x + 11.3, 2.7 * y - 5.1, 1);
    }

private:
    [[nodiscard]] double lattice(long long i, long long j, int oct) const {
        std::uint64_t h = seed_ ^ (static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ULL) ^
                          (static_cast<std::uint64_t>(j) * 0xC2B2AE3D27D4EB4FULL) ^
                          (static_cast<std::uint64_t>(oct) * 0x165667B19E3779F9ULL);
        SplitMix64 m(h);
        return m.uniform();
    }
    [[nodiscard]] double octave(double x, double y, int oct) const {
        const double fx = std::floor(x);
        const double fy = std::floor(y);
        const auto i = static_cast<long long>(fx);
        const auto j = static_cast<long long>(fy);
        auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
        const double tx = smooth(x - fx);
        const double ty = smooth(y - fy);
        const double a = lattice(i, j, oct) * (1 - tx) + lattice(i + 1, j, oct) * tx;
        const double b = lattice(i, j + 1, oct) * (1 - tx) + lattice(i + 1, j + 1, oct) * tx;
        return a * (1 - ty) + b * ty;
    }
    std::uint64_t seed_;
};

/// Smooth texture image, features roughly `cell` pixels across.
inline GrayImage smooth_texture(int w, int h, std::uint64_t seed, double cell = 12.0) {
    ValueNoise noise(seed);
    GrayImage img(w, h);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
            img.at(u, v) = static_cast<std::uint8_t>(std::lround(20.0 + 215.0 * noise(u / cell, v / cell)));
    return img;
}

/// out(u, v) = in(u - dx, v - dy); pixels shifted in from outside are
/// generated from the same noise so there is no wrap-around.
inline GrayImage shifted_texture(int w, int h, std::uint64_t seed, int dx, int dy, double cell = 12.0) {
    ValueNoise noise(seed);
    GrayImage img(w, h);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
            img.at(u, v) = static_cast<std::uint8_t>(std::lround(20.0 + 215.0 * noise((u - dx) / cell, (v - dy) / cell)));
    return img;
}

inline GrayImage noise_image(int w, int h, std::uint64_t seed) {
    SplitMix64 rng(seed);
    GrayImage img(w, h);
    for (auto& p : img.data) p = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

/// Textured planar patch: points origin + a*e1 + b*e2 with |a| <= half_a,
/// |b| <= half_b (infinite when the half extent is <= 0).
struct Patch {
    Eigen::Vector3d origin;
    Eigen::Vector3d e1;
    Eigen::Vector3d e2;
    double half_a = 0.0;
    double half_b = 0.0;
    std::uint64_t texture_seed = 1;
    double texture_cell_m = 0.05;
};

/// Camera extrinsics: world point X maps to camera point R X + t.
struct Camera {
    Matrix3 r = Matrix3::Identity();
    Eigen::Vector3d t = Eigen::Vector3d::Zero();
};

/// Pose taking camera-a coordinates to camera-b coordinates.
inline Pose relative_pose(const Camera& a, const Camera& b) {
    const Matrix3 r = b.r * a.r.transpose();
    return Pose::from_rotation(r, b.t - r * a.t);
}

struct Rendered {
    GrayImage image;
    DepthMap depth;
};

/// A room (back wall, floor, ceiling, side walls) with a box face in front.
inline std::vector<Patch> default_room() {
    using V = Eigen::Vector3d;
    return {
        {V(0, 0, 4.0), V(1, 0, 0), V(0, 1, 0), 0, 0, 11, 0.06},
        {V(0, 1.2, 0), V(1, 0, 0), V(0, 0, 1), 0, 0, 12, 0.06},
        {V(0, -1.5, 0), V(1, 0, 0), V(0, 0, 1), 0, 0, 13, 0.06},
        {V(-2.2, 0, 0), V(0, 0, 1), V(0, 1, 0), 0, 0, 14, 0.06},
        {V(2.2, 0, 0), V(0, 0, 1), V(0, 1, 0), 0, 0, 15, 0.06},
        {V(-0.3, 0.1, 2.0), V(1, 0, 0), V(0, 1, 0), 0.45, 0.4, 16, 0.04},
        {V(0.9, -0.3, 2.8), V(0.8, 0, 0.6), V(0, 1, 0), 0.3, 0.3, 17, 0.03},
    };
}

/// Ray-cast render. Depth is the camera z of the nearest surface; pixels
/// farther than max_range are left invalid.
inline Rendered render(const std::vector<Patch>& scene, const Camera& cam, const Intrinsics& k,
                       double max_range = 10.0) {
    Rendered out{GrayImage(k.width, k.height), DepthMap(k.width, k.height)};
    const Matrix3 rt = cam.r.transpose();
    const Eigen::Vector3d center = -rt * cam.t;
    std::vector<ValueNoise> noises;
    for (const auto& p : scene) noises.emplace_back(p.texture_seed);
    for (int v = 0; v < k.height; ++v) {
        for (int u = 0; u < k.width; ++u) {
            const Eigen::Vector3d dc((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
            const Eigen::Vector3d dw = rt * dc;
            double best = std::numeric_limits<double>::infinity();
            double shade = 0.0;
            for (std::size_t i = 0; i < scene.size(); ++i) {
                const Patch& p = scene[i];
                const Eigen::Vector3d n = p.e1.cross(p.e2);
                const double denom = n.dot(dw);
                if (std::abs(denom) < 1e-12) continue;
                const double s = n.dot(p.origin - center) / denom;
                if (!(s > 1e-6) || s >= best) continue;
                const Eigen::Vector3d hit = center + s * dw - p.origin;
                const double a = hit.dot(p.e1);
                const double b = hit.dot(p.e2);
                if (p.half_a > 0 && std::abs(a) > p.half_a) continue;
                if (p.half_b > 0 && std::abs(b) > p.half_b) continue;
                best = s;
                shade = noises[i](a / p.texture_cell_m + 1000.0, b / p.texture_cell_m + 1000.0);
            }
            if (!std::isfinite(best)) continue;
            out.image.at(u, v) = static_cast<std::uint8_t>(std::lround(15.0 + 225.0 * shade));
            if (best <= max_range) out.depth.at(u, v) = best;  // s equals camera z since dc.z == 1
        }
    }
    return out;
}

/// Camera rotated by small Euler angles (radians) then placed at `position`
/// (world coordinates of the camera center).
inline Camera camera_at(const Eigen::Vector3d& position, double yaw, double pitch, double roll) {
    Camera c;
    c.r = (Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()) *
           Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()))
              .toRotationMatrix();
    c.t = -c.r * position;
    return c;
}

/// Slow camera path through the default room.
inline std::vector<Camera> camera_path(std::size_t n, double step_m = 0.004, double step_rad = 0.002) {
    std::vector<Camera> cams;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(i);
        cams.push_back(camera_at(Eigen::Vector3d(step_m * s, 0.3 * step_m * s, 0.5 * step_m * s), step_rad * s,
                                 0.5 * step_rad * s, 0.2 * step_rad * s));
    }
    return cams;
}

inline std::vector<AssociatedFrame> render_sequence(const std::vector<Camera>& cams, const Intrinsics& k,
                                                    const std::vector<Patch>& scene = default_room()) {
    std::vector<AssociatedFrame> frames;
    for (std::size_t i = 0; i < cams.size(); ++i) {
        Rendered r = render(scene, cams[i], k);
        AssociatedFrame f;
        f.rgb_timestamp = 0.033 * static_cast<double>(i);
        f.depth_timestamp = f.rgb_timestamp + 0.001;
        f.image = std::move(r.image);
        f.depth = std::move(r.depth);
        frames.push_back(std::move(f));
    }
    return frames;
}

/// Quantizes depth to the dataset encoding (raw = round(z * scale)).
inline DepthMap quantize_depth(const DepthMap& d, double scale) {
    DepthMap q = d;
    for (auto& z : q.data)
        if (z > 0) z = std::round(z * scale) / scale;
    return q;
}

/// Writes a TUM-style directory: rgb/ and depth/ PNGs, index files and a
/// camera.cfg.
inline void write_dataset(const std::filesystem::path& root, const std::vector<AssociatedFrame>& frames,
                          const Intrinsics& k) {
    namespace fs = std::filesystem;
    fs::create_directories(root / "rgb");
    fs::create_directories(root / "depth");
    std::ofstream rgb_idx(root / "rgb.txt");
    std::ofstream depth_idx(root / "depth.txt");
    rgb_idx << "# color images\n# timestamp filename\n";
    depth_idx << "# depth maps\n# timestamp filename\n";
    for (const auto& f : frames) {
        char name[64];
        std::snprintf(name, sizeof name, "%.6f.png", f.rgb_timestamp);
        std::vector<std::uint8_t> rgb(f.image.data.size() * 3);
        for (std::size_t i = 0; i < f.image.data.size(); ++i) rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = f.image.data[i];
        write_file_bytes(root / "rgb" / name, encode_png(f.image.width, f.image.height, 3, 8, rgb.data()));
        rgb_idx << std::fixed << f.rgb_timestamp << " rgb/" << name << '\n';
        char dname[64];
        std::snprintf(dname, sizeof dname, "%.6f.png", f.depth_timestamp);
        write_file_bytes(root / "depth" / dname, encode_depth_png(*f.depth, k.depth_scale));
        depth_idx << std::fixed << f.depth_timestamp << " depth/" << dname << '\n';
    }
    std::ofstream cfg(root / "camera.cfg");
    cfg << "fx = " << k.fx << "\nfy = " << k.fy << "\ncx = " << k.cx << "\ncy = " << k.cy
        << "\ndepth_scale = " << k.depth_scale << "\nwidth = " << k.width << "\nheight = " << k.height
        << "\nmax_time_diff = 0.02\n";
}

}  // namespace tofdepth::fixture
