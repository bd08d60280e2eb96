#pragma once

#include "tofdepth/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace tofdepth {

// compose() lives in core.hpp next to the other pose algebra.

/// Transformed points closer than this to the camera plane are dropped.
inline constexpr double kMinWarpDepth = 1e-6;

struct ReprojectStats {
    std::size_t source_valid = 0;
    std::size_t written = 0;  ///< distinct target pixels that received depth
    std::size_t behind_camera = 0;
    std::size_t out_of_bounds = 0;
    std::size_t collisions = 0;
};

struct Reprojection {
    DepthMap depth;
    ReprojectStats stats;
};

/// Forward warp: every valid source pixel is lifted, moved by `pose` and
/// splatted to the nearest target pixel, keeping the smallest depth on
/// collisions. Unwritten pixels stay 0.
[[nodiscard]] inline Reprojection reproject_with_stats(const DepthMap& source, const Pose& pose, const Intrinsics& k) {
    if (!source.same_size(k.width, k.height)) throw std::invalid_argument("reproject: depth size does not match intrinsics");
    const Matrix3 r = rotation_matrix(pose);
    const Eigen::Vector3d& t = pose.translation;
    Reprojection out{DepthMap(source.width, source.height), {}};
    auto& st = out.stats;
    for (int v = 0; v < source.height; ++v) {
        for (int u = 0; u < source.width; ++u) {
            const double z = source.at(u, v);
            if (!is_valid_depth(z)) continue;
            ++st.source_valid;
            const Point3 x{(u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z};
            const Point3 y = r * x + t;
            if (!(y.z() > kMinWarpDepth)) {
                ++st.behind_camera;
                continue;
            }
            const double pu = std::floor(k.fx * y.x() / y.z() + k.cx + 0.5);
            const double pv = std::floor(k.fy * y.y() / y.z() + k.cy + 0.5);
            if (!(pu >= 0.0 && pv >= 0.0 && pu < source.width && pv < source.height)) {
                ++st.out_of_bounds;
                continue;
            }
            double& dst = out.depth.at(static_cast<int>(pu), static_cast<int>(pv));
            if (dst == 0.0) {
                dst = y.z();
                ++st.written;
            } else {
                ++st.collisions;
                dst = std::min(dst, y.z());
            }
        }
    }
    return out;
}

[[nodiscard]] inline DepthMap reproject(const DepthMap& source, const Pose& pose, const Intrinsics& k) {
    return reproject_with_stats(source, pose, k).depth;
}

/// Fills each invalid pixel that has valid pixels in its kernel window with
/// their median (lower median for even counts). Valid pixels are untouched.
[[nodiscard]] inline DepthMap median_infill(const DepthMap& depth, int kernel) {
    if (kernel < 3 || kernel % 2 == 0) throw std::invalid_argument("median_infill: kernel must be odd and >= 3");
    const int h = kernel / 2;
    DepthMap out = depth;
    std::vector<double> window;
    window.reserve(static_cast<std::size_t>(kernel) * static_cast<std::size_t>(kernel));
    for (int v = 0; v < depth.height; ++v) {
        for (int u = 0; u < depth.width; ++u) {
            if (is_valid_depth(depth.at(u, v))) continue;
            window.clear();
            for (int y = std::max(0, v - h); y <= std::min(depth.height - 1, v + h); ++y)
                for (int x = std::max(0, u - h); x <= std::min(depth.width - 1, u + h); ++x)
                    if (is_valid_depth(depth.at(x, y))) window.push_back(depth.at(x, y));
            if (window.empty()) continue;
            const auto mid = window.begin() + static_cast<std::ptrdiff_t>((window.size() - 1) / 2);
            std::nth_element(window.begin(), mid, window.end());
            out.at(u, v) = *mid;
        }
    }
    return out;
}

/// Share of the estimated region made of holes: invalid pixels with a valid
/// 8-neighbor, over those holes plus all valid pixels. These are the pixels
/// a 3x3 median infill would fill.
[[nodiscard]] inline double hole_fraction(const DepthMap& depth) {
    std::size_t valid = 0;
    std::size_t holes = 0;
    for (int v = 0; v < depth.height; ++v) {
        for (int u = 0; u < depth.width; ++u) {
            if (is_valid_depth(depth.at(u, v))) {
                ++valid;
                continue;
            }
            bool near_valid = false;
            for (int y = std::max(0, v - 1); y <= std::min(depth.height - 1, v + 1) && !near_valid; ++y)
                for (int x = std::max(0, u - 1); x <= std::min(depth.width - 1, u + 1); ++x)
                    if (is_valid_depth(depth.at(x, y))) {
                        near_valid = true;
                        break;
                    }
            holes += near_valid ? 1 : 0;
        }
    }
    const std::size_t total = valid + holes;
    return total == 0 ? 0.0 : static_cast<double>(holes) / static_cast<double>(total);
}

}  // namespace tofdepth
