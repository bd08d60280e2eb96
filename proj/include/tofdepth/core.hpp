#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace tofdepth {

using Point3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

/// Pinhole camera with per-axis focal lengths. Pixel centers sit on integer
/// coordinates; (cx, cy) is the principal point in the same frame.
struct Intrinsics {
    double fx = 525.0;
    double fy = 525.0;
    double cx = 319.5;
    double cy = 239.5;
    int width = 640;
    int height = 480;
    /// Raw depth units per meter in encoded depth files.
    double depth_scale = 5000.0;

    void validate() const {
        if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
            throw std::invalid_argument("intrinsics: focal lengths must be positive");
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("intrinsics: image size must be positive");
        if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
            throw std::invalid_argument("intrinsics: principal point outside the image");
        if (!(depth_scale > 0.0) || !std::isfinite(depth_scale))
            throw std::invalid_argument("intrinsics: depth_scale must be positive");
    }
};

/// Row-major single-channel raster.
template <typename T>
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Raster() = default;
    Raster(int w, int h, T fill = T{}) : width(w), height(h) {
        if (w < 0 || h < 0) throw std::invalid_argument("raster: negative size");
        data.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
    }

    [[nodiscard]] std::size_t size() const noexcept { return data.size(); }
    [[nodiscard]] bool in_bounds(int u, int v) const noexcept {
        return u >= 0 && v >= 0 && u < width && v < height;
    }
    [[nodiscard]] T& at(int u, int v) noexcept {
        return data[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u)];
    }
    [[nodiscard]] const T& at(int u, int v) const noexcept {
        return data[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u)];
    }
    [[nodiscard]] bool same_size(int w, int h) const noexcept { return width == w && height == h; }
    template <typename U>
    [[nodiscard]] bool same_size(const Raster<U>& other) const noexcept {
        return width == other.width && height == other.height;
    }

    bool operator==(const Raster&) const = default;
};

/// 8-bit luma frame.
using GrayImage = Raster<std::uint8_t>;

/// Depth in meters along the optical axis. Zero marks a missing measurement.
using DepthMap = Raster<double>;

[[nodiscard]] inline bool is_valid_depth(double z) noexcept { return z > 0.0; }

/// Throws unless every depth is finite and non-negative.
inline void validate_depth(const DepthMap& depth) {
    if (depth.data.size() != static_cast<std::size_t>(depth.width) * static_cast<std::size_t>(depth.height))
        throw std::invalid_argument("depth map: buffer size does not match dimensions");
    for (double z : depth.data)
        if (!std::isfinite(z) || z < 0.0) throw std::invalid_argument("depth map: negative or non-finite depth");
}

[[nodiscard]] inline std::size_t count_valid(const DepthMap& depth) noexcept {
    std::size_t n = 0;
    for (double z : depth.data) n += is_valid_depth(z) ? 1 : 0;
    return n;
}

struct PixelCoord {
    double u = 0.0;
    double v = 0.0;
};

[[nodiscard]] inline Matrix3 skew(const Eigen::Vector3d& k) {
    Matrix3 m;
    m << 0.0, -k.z(), k.y(),
         k.z(), 0.0, -k.x(),
         -k.y(), k.x(), 0.0;
    return m;
}

/// Rigid motion: rotation of `angle` radians about the unit `axis`, then
/// `translation` (meters). Maps points of the source camera frame into the
/// target camera frame.
struct Pose {
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
    double angle = 0.0;
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    [[nodiscard]] static Pose identity() { return {}; }

    /// Normalizes the axis, folds negative angles, and canonicalizes the
    /// axis to +z when the rotation vanishes.
    [[nodiscard]] static Pose from_axis_angle(const Eigen::Vector3d& axis, double angle,
                                              const Eigen::Vector3d& translation) {
        if (!std::isfinite(angle) || !axis.allFinite() || !translation.allFinite())
            throw std::invalid_argument("pose: non-finite component");
        Pose p;
        p.translation = translation;
        const double n = axis.norm();
        if (angle == 0.0) return p;
        if (n == 0.0) throw std::invalid_argument("pose: zero rotation axis");
        Eigen::Vector3d k = axis / n;
        double a = std::remainder(angle, 2.0 * std::numbers::pi);  // (-pi, pi]
        if (a < 0.0) {
            a = -a;
            k = -k;
        }
        if (a == 0.0) return p;
        p.axis = k;
        p.angle = a;
        return p;
    }

    /// Rotation vector (axis scaled by angle).
    [[nodiscard]] static Pose from_rotation_vector(const Eigen::Vector3d& omega,
                                                   const Eigen::Vector3d& translation) {
        const double theta = omega.norm();
        if (theta == 0.0) return from_axis_angle(Eigen::Vector3d::UnitZ(), 0.0, translation);
        return from_axis_angle(omega / theta, theta, translation);
    }

    /// Log map of a rotation matrix. Near zero the axis comes from the
    /// antisymmetric part directly; near pi from the symmetric part.
    [[nodiscard]] static Pose from_rotation(const Matrix3& r, const Eigen::Vector3d& translation) {
        const Eigen::Vector3d w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
        const double s = 0.5 * w.norm();                    // sin(theta)
        const double c = 0.5 * (r.trace() - 1.0);           // cos(theta)
        const double theta = std::atan2(s, c);
        if (s == 0.0 && c > 0.0) return from_axis_angle(Eigen::Vector3d::UnitZ(), 0.0, translation);
        if (c > -0.9) return from_axis_angle(w / (2.0 * s), theta, translation);
        // (R + R^T)/2 - cI = (1 - c) k k^T
        const Matrix3 b = 0.5 * (r + r.transpose()) - c * Matrix3::Identity();
        int col = 0;
        b.diagonal().maxCoeff(&col);
        Eigen::Vector3d k = b.col(col);
        k.normalize();
        if (k.dot(w) < 0.0) k = -k;
        return from_axis_angle(k, theta, translation);
    }

    [[nodiscard]] Eigen::Vector3d rotation_vector() const { return axis * angle; }

    [[nodiscard]] Eigen::Quaterniond quaternion() const {
        return Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis));
    }
};

/// Rodrigues: R = I + sin(theta) K + (1 - cos(theta)) K^2.
[[nodiscard]] inline Matrix3 rotation_matrix(const Pose& p) {
    const Matrix3 k = skew(p.axis);
    return Matrix3::Identity() + std::sin(p.angle) * k + (1.0 - std::cos(p.angle)) * (k * k);
}

[[nodiscard]] inline Point3 apply_pose(const Pose& p, const Point3& x) {
    return rotation_matrix(p) * x + p.translation;
}

[[nodiscard]] inline Pose inverse(const Pose& p) {
    const Matrix3 r = rotation_matrix(p);
    return Pose::from_axis_angle(p.axis, -p.angle, -(r.transpose() * p.translation));
}

/// Pose chaining: the result applies `previous` first, then `current`
/// (R = Rc Rp, T = Tc + Rc Tp).
[[nodiscard]] inline Pose compose(const Pose& current, const Pose& previous) {
    const Matrix3 rc = rotation_matrix(current);
    return Pose::from_rotation(rc * rotation_matrix(previous), current.translation + rc * previous.translation);
}

[[nodiscard]] inline Point3 back_project(double u, double v, double z, const Intrinsics& k) {
    if (!std::isfinite(u) || !std::isfinite(v) || !std::isfinite(z))
        throw std::invalid_argument("back_project: non-finite input");
    if (!(z > 0.0)) throw std::invalid_argument("back_project: depth must be positive");
    return {(u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z};
}

[[nodiscard]] inline PixelCoord project(const Point3& p, const Intrinsics& k) {
    if (!p.allFinite()) throw std::invalid_argument("project: non-finite point");
    if (!(p.z() > 0.0)) throw std::invalid_argument("project: point is not in front of the camera");
    return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

}  // namespace tofdepth
