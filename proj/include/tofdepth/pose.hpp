#pragma once

#include "tofdepth/core.hpp"
#include "tofdepth/flow.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace tofdepth {

class PoseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fewer than three usable flow samples.
class InsufficientSamples : public PoseError {
public:
    using PoseError::PoseError;
};

/// The normal matrix is singular or too badly conditioned to trust.
class DegenerateGeometry : public PoseError {
public:
    using PoseError::PoseError;
};

inline constexpr double kMaxNormalCondition = 1e12;

struct PoseSolution {
    Pose pose;
    /// Squared pixel error per input sample; NaN for invalid samples.
    std::vector<double> residuals;
    /// Mean over the valid samples.
    double mean_residual = 0.0;
    int iterations = 0;
};

/// Flow predicted by the rigid motion model for a source pixel with depth z
/// whose observed target is (u + du, v + dv). Exact for any pose, since the
/// observed target enters the model directly.
[[nodiscard]] inline Eigen::Vector2d predicted_flow(const FlowSample& s, const Pose& pose, const Intrinsics& k) {
    const Point3 x = back_project(s.u, s.v, s.z, k);
    const Matrix3 kx = skew(pose.axis);
    const Matrix3 w = std::sin(pose.angle) * kx + (1.0 - std::cos(pose.angle)) * (kx * kx);
    const Eigen::Vector3d d = w * x + pose.translation;
    const double uj = s.u + s.du - k.cx;
    const double vj = s.v + s.dv - k.cy;
    return {k.fx / s.z * d.x() - uj / s.z * d.z(), k.fy / s.z * d.y() - vj / s.z * d.z()};
}

/// r = (du - du_hat)^2 + (dv - dv_hat)^2, in squared pixels.
[[nodiscard]] inline double residual(const FlowSample& s, const Pose& pose, const Intrinsics& k) {
    if (!s.valid || !(s.z > 0.0)) throw std::invalid_argument("residual: sample has no valid depth");
    const Eigen::Vector2d p = predicted_flow(s, pose, k);
    const double eu = s.du - p.x();
    const double ev = s.dv - p.y();
    return eu * eu + ev * ev;
}

/// Two rows per valid sample, unknowns (omega, t) of an increment applied
/// after `current`. The rhs is the flow still unexplained by `current`.
struct LinearizedSystem {
    Eigen::Matrix<double, Eigen::Dynamic, 6> jacobian;
    Eigen::VectorXd rhs;
};

[[nodiscard]] inline LinearizedSystem linearize(std::span<const FlowSample> samples, const Intrinsics& k,
                                                const Pose& current) {
    const Matrix3 r = rotation_matrix(current);
    std::size_t n = 0;
    for (const auto& s : samples) n += s.valid ? 1 : 0;
    LinearizedSystem sys;
    sys.jacobian.setZero(static_cast<Eigen::Index>(2 * n), 6);
    sys.rhs.setZero(static_cast<Eigen::Index>(2 * n));
    Eigen::Index row = 0;
    for (const auto& s : samples) {
        if (!s.valid) continue;
        const Point3 y = r * back_project(s.u, s.v, s.z, k) + current.translation;
        const double uj = s.u + s.du - k.cx;
        const double vj = s.v + s.dv - k.cy;
        if (y.z() > 1e-9) {
            const double a = k.fx / y.z();
            const double b = uj / y.z();
            const double c = k.fy / y.z();
            const double e = vj / y.z();
            // Remaining flow = (f/z) x.d - (u_j/z) z.d with d = omega x Y + t.
            sys.jacobian.row(row) << -b * y.y(), a * y.z() + b * y.x(), -a * y.y(), a, 0.0, -b;
            sys.jacobian.row(row + 1) << -c * y.z() - e * y.y(), e * y.x(), c * y.x(), 0.0, c, -e;
            const PixelCoord p = project(y, k);
            sys.rhs(row) = (s.u + s.du) - p.u;
            sys.rhs(row + 1) = (s.v + s.dv) - p.v;
        }
        row += 2;
    }
    return sys;
}

/// Solves the 6x6 normal equations of `sys`. Throws DegenerateGeometry when
/// the condition number exceeds kMaxNormalCondition.
[[nodiscard]] inline Eigen::Matrix<double, 6, 1> solve_normal_equations(const LinearizedSystem& sys) {
    const Eigen::Matrix<double, 6, 6> a = sys.jacobian.transpose() * sys.jacobian;
    const Eigen::Matrix<double, 6, 1> b = sys.jacobian.transpose() * sys.rhs;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(a, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues()(0);
    const double hi = eig.eigenvalues()(5);
    if (!(lo > 0.0) || !(hi / lo <= kMaxNormalCondition)) throw DegenerateGeometry("pose: degenerate sample geometry");
    return a.ldlt().solve(b);
}

/// Gauss-Newton on the rigid flow model, re-linearized at theta = 0 around
/// the accumulated pose each iteration. Increments compose after the
/// accumulated pose.
[[nodiscard]] inline PoseSolution solve_pose(std::span<const FlowSample> samples, const Intrinsics& k,
                                             int gn_iterations) {
    if (gn_iterations < 1) throw std::invalid_argument("solve_pose: need at least one iteration");
    std::size_t valid = 0;
    for (const auto& s : samples) valid += s.valid ? 1 : 0;
    if (valid < 3) throw InsufficientSamples("pose: need at least 3 valid flow samples");

    Matrix3 r = Matrix3::Identity();
    Eigen::Vector3d t = Eigen::Vector3d::Zero();
    for (int it = 0; it < gn_iterations; ++it) {
        const auto sys = linearize(samples, k, Pose::from_rotation(r, t));
        const Eigen::Matrix<double, 6, 1> x = solve_normal_equations(sys);
        const Matrix3 r_inc = rotation_matrix(Pose::from_rotation_vector(x.head<3>(), Eigen::Vector3d::Zero()));
        r = r_inc * r;
        t = r_inc * t + x.tail<3>();
    }

    PoseSolution sol;
    sol.pose = Pose::from_rotation(r, t);
    sol.iterations = gn_iterations;
    sol.residuals.resize(samples.size(), std::numeric_limits<double>::quiet_NaN());
    double sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!samples[i].valid) continue;
        sol.residuals[i] = residual(samples[i], sol.pose, k);
        sum += sol.residuals[i];
    }
    sol.mean_residual = sum / static_cast<double>(valid);
    return sol;
}

}  // namespace tofdepth
