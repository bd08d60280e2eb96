#include "tofdepth/core.hpp"
#include "tofdepth/random.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace tofdepth;

namespace {

Intrinsics tum() { return Intrinsics{525.0, 525.0, 319.5, 239.5, 640, 480, 5000.0}; }

Pose random_pose(SplitMix64& rng, double max_angle) {
    const Eigen::Vector3d axis(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Eigen::Vector3d t(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    return Pose::from_axis_angle(axis, rng.uniform(0.0, max_angle), t);
}

}  // namespace

TEST(BackProject, PrincipalRayLiesOnAxis) {
    const auto k = tum();
    const Point3 p = back_project(k.cx, k.cy, 2.0, k);
    EXPECT_DOUBLE_EQ(p.x(), 0.0);
    EXPECT_DOUBLE_EQ(p.y(), 0.0);
    EXPECT_DOUBLE_EQ(p.z(), 2.0);
}

TEST(BackProject, FortyFiveDegreeRay) {
    const auto k = tum();
    const Point3 p = back_project(k.cx + k.fx, k.cy, 1.0, k);
    EXPECT_DOUBLE_EQ(p.x(), 1.0);
    EXPECT_DOUBLE_EQ(p.y(), 0.0);
}

TEST(BackProject, HandComputedValue) {
    // (400 - 319.5) * 1.5 / 525 = 0.23, (300 - 239.5) * 1.5 / 525 = 0.172857...
    const Point3 p = back_project(400, 300, 1.5, tum());
    EXPECT_NEAR(p.x(), 0.23, 1e-15);
    EXPECT_NEAR(p.y(), 0.17285714285714285, 1e-15);
    EXPECT_DOUBLE_EQ(p.z(), 1.5);
}

TEST(BackProject, RejectsNonPositiveOrNonFiniteDepth) {
    const auto k = tum();
    EXPECT_THROW((void)back_project(1, 1, 0.0, k), std::invalid_argument);
    EXPECT_THROW((void)back_project(1, 1, -1.0, k), std::invalid_argument);
    EXPECT_THROW((void)back_project(1, 1, std::numeric_limits<double>::quiet_NaN(), k), std::invalid_argument);
    EXPECT_THROW((void)back_project(std::numeric_limits<double>::infinity(), 1, 1.0, k), std::invalid_argument);
}

TEST(Project, OpticalAxisAndHandValue) {
    const auto k = tum();
    const auto c = project({0, 0, 3}, k);
    EXPECT_DOUBLE_EQ(c.u, k.cx);
    EXPECT_DOUBLE_EQ(c.v, k.cy);
    const auto p = project({1, 0, 1}, k);
    EXPECT_DOUBLE_EQ(p.u, 844.5);
    EXPECT_DOUBLE_EQ(p.v, 239.5);
    EXPECT_THROW((void)project({0, 0, 0}, k), std::invalid_argument);
    EXPECT_THROW((void)project({0, 0, -1}, k), std::invalid_argument);
}

TEST(Project, RoundTripProperty) {
    const auto k = tum();
    const auto p = project(back_project(100.25, 77.5, 0.8, k), k);
    EXPECT_NEAR(p.u, 100.25, 1e-12);
    EXPECT_NEAR(p.v, 77.5, 1e-12);
    SplitMix64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(0, 640), v = rng.uniform(0, 480), z = rng.uniform(0.1, 10);
        const auto q = project(back_project(u, v, z, k), k);
        ASSERT_NEAR(q.u, u, 1e-9);
        ASSERT_NEAR(q.v, v, 1e-9);
    }
}

TEST(RotationMatrix, IdentityAndQuarterTurn) {
    EXPECT_TRUE(rotation_matrix(Pose::identity()).isApprox(Matrix3::Identity(), 0.0));
    const Matrix3 r = rotation_matrix(Pose::from_axis_angle({0, 0, 1}, std::numbers::pi / 2, {0, 0, 0}));
    Matrix3 expected;
    expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    EXPECT_LT((r - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RotationMatrix, OrthonormalForRandomPoses) {
    SplitMix64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        const Pose p = random_pose(rng, std::numbers::pi);
        ASSERT_NEAR(p.axis.norm(), 1.0, 1e-9);
        const Matrix3 r = rotation_matrix(p);
        ASSERT_LT((r.transpose() * r - Matrix3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
        ASSERT_LT((r * r.transpose() - Matrix3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
        ASSERT_NEAR(r.determinant(), 1.0, 1e-9);
    }
}

TEST(Pose, ZeroAngleUsesCanonicalAxis) {
    const Pose p = Pose::from_axis_angle({1, 2, 3}, 0.0, {0, 0, 0});
    EXPECT_EQ(p.axis, Eigen::Vector3d::UnitZ());
    const Pose q = Pose::from_rotation(Matrix3::Identity(), {1, 0, 0});
    EXPECT_EQ(q.axis, Eigen::Vector3d::UnitZ());
    EXPECT_EQ(q.angle, 0.0);
}

TEST(Pose, NegativeAngleFoldsIntoAxis) {
    const Pose p = Pose::from_axis_angle({0, 0, 2}, -0.3, {0, 0, 0});
    EXPECT_NEAR(p.angle, 0.3, 1e-15);
    EXPECT_NEAR(p.axis.z(), -1.0, 1e-15);
}

TEST(Pose, LogMapInvertsRodrigues) {
    SplitMix64 rng(3);
    for (int i = 0; i < 1000; ++i) {
        Pose p = random_pose(rng, std::numbers::pi - 1e-6);
        if (i % 10 == 0) p.angle = std::numbers::pi - rng.uniform(0, 1e-3);  // near-pi branch
        if (i % 10 == 1) p.angle = rng.uniform(0, 1e-9);                    // near-zero branch
        const Pose q = Pose::from_rotation(rotation_matrix(p), p.translation);
        ASSERT_LT((rotation_matrix(q) - rotation_matrix(p)).cwiseAbs().maxCoeff(), 1e-9) << i;
        ASSERT_NEAR(q.angle, p.angle, 1e-7) << i;
    }
}

TEST(ApplyPose, IdentityAndTranslation) {
    const Point3 x(0.3, -0.2, 1.7);
    EXPECT_EQ(apply_pose(Pose::identity(), x), x);
    const Pose p = Pose::from_axis_angle({0, 0, 1}, 0.0, {0, 0, 0.5});
    EXPECT_EQ(apply_pose(p, {0, 0, 1}), Point3(0, 0, 1.5));
}

TEST(ApplyPose, PreservesDistances) {
    SplitMix64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const Pose p = random_pose(rng, std::numbers::pi);
        const Point3 a(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
        const Point3 b(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
        ASSERT_NEAR((apply_pose(p, a) - apply_pose(p, b)).norm(), (a - b).norm(), 1e-9);
    }
}

TEST(Compose, MatchesTwoStepApplication) {
    SplitMix64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        const Pose a = random_pose(rng, std::numbers::pi);
        const Pose b = random_pose(rng, std::numbers::pi);
        const Point3 x(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
        ASSERT_LT((apply_pose(compose(b, a), x) - apply_pose(b, apply_pose(a, x))).norm(), 1e-12);
    }
}

TEST(Compose, IdentityIsNeutral) {
    SplitMix64 rng(9);
    const Pose p = random_pose(rng, 1.0);
    for (const Pose& q : {compose(Pose::identity(), p), compose(p, Pose::identity())}) {
        EXPECT_LT((rotation_matrix(q) - rotation_matrix(p)).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_LT((q.translation - p.translation).norm(), 1e-15);
    }
}

TEST(Intrinsics, Validation) {
    EXPECT_NO_THROW(tum().validate());
    auto k = tum();
    k.fx = 0;
    EXPECT_THROW(k.validate(), std::invalid_argument);
    k = tum();
    k.cx = 640;
    EXPECT_THROW(k.validate(), std::invalid_argument);
    k = tum();
    k.depth_scale = -1;
    EXPECT_THROW(k.validate(), std::invalid_argument);
}

TEST(DepthMap, Validation) {
    DepthMap d(2, 2, 1.0);
    EXPECT_NO_THROW(validate_depth(d));
    d.at(1, 1) = -0.5;
    EXPECT_THROW(validate_depth(d), std::invalid_argument);
    d.at(1, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(validate_depth(d), std::invalid_argument);
}
