#pragma once

#include "tofdepth/core.hpp"
#include "tofdepth/flow.hpp"
#include "tofdepth/pose.hpp"
#include "tofdepth/random.hpp"
#include "tofdepth/ransac.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tofdepth {

/// Rigid point set seen from two cameras related by `pose_true`. Every point
/// is the back-projection of an integer source pixel.
struct SynthScene {
    std::vector<Point3> points;
    Pose pose_true;
    Intrinsics intrinsics;
    std::uint64_t seed = 0;
};

struct SceneOptions {
    std::size_t count = 144;
    double min_depth = 0.5;
    double max_depth = 5.0;
    /// Distance kept from the image border, in pixels, in both views.
    int border = 1;
};

/// Random scene whose points project inside both views.
[[nodiscard]] inline SynthScene make_scene(const Intrinsics& k, const Pose& pose, std::uint64_t seed,
                                           const SceneOptions& opt = {}) {
    k.validate();
    if (!(opt.min_depth > 0.0 && opt.max_depth >= opt.min_depth))
        throw std::invalid_argument("synth: invalid depth range");
    if (opt.border < 0 || 2 * opt.border >= k.width || 2 * opt.border >= k.height)
        throw std::invalid_argument("synth: border too large");
    SynthScene scene{{}, pose, k, seed};
    scene.points.reserve(opt.count);
    SplitMix64 rng(seed);
    const Matrix3 r = rotation_matrix(pose);
    const auto wu = static_cast<std::uint64_t>(k.width - 2 * opt.border);
    const auto wv = static_cast<std::uint64_t>(k.height - 2 * opt.border);
    std::size_t attempts = 0;
    while (scene.points.size() < opt.count) {
        if (++attempts > 1000 * (opt.count + 1)) throw std::runtime_error("synth: pose moves the scene out of view");
        const int u = opt.border + static_cast<int>(rng.below(wu));
        const int v = opt.border + static_cast<int>(rng.below(wv));
        const double z = rng.uniform(opt.min_depth, opt.max_depth);
        const Point3 x = back_project(u, v, z, k);
        const Point3 y = r * x + pose.translation;
        if (!(y.z() > opt.min_depth * 0.1)) continue;
        const PixelCoord p = project(y, k);
        if (p.u < opt.border || p.v < opt.border || p.u > k.width - 1 - opt.border || p.v > k.height - 1 - opt.border)
            continue;
        scene.points.push_back(x);
    }
    return scene;
}

/// Exact correspondences: flow = project(pose(X)) - project(X).
[[nodiscard]] inline std::vector<FlowSample> generate(const SynthScene& scene) {
    const auto& k = scene.intrinsics;
    const Matrix3 r = rotation_matrix(scene.pose_true);
    std::vector<FlowSample> out;
    out.reserve(scene.points.size());
    for (const Point3& x : scene.points) {
        const PixelCoord src = project(x, k);
        const Point3 y = r * x + scene.pose_true.translation;
        const PixelCoord dst = project(y, k);
        if (dst.u < 0.0 || dst.v < 0.0 || dst.u > k.width - 1 || dst.v > k.height - 1)
            throw std::invalid_argument("synth: point leaves the second view");
        FlowSample s;
        s.u = static_cast<int>(std::lround(src.u));
        s.v = static_cast<int>(std::lround(src.v));
        if (std::abs(src.u - s.u) > 1e-6 || std::abs(src.v - s.v) > 1e-6)
            throw std::invalid_argument("synth: scene point is not on an integer pixel");
        s.du = dst.u - src.u;
        s.dv = dst.v - src.v;
        s.z = x.z();
        s.valid = true;
        out.push_back(s);
    }
    return out;
}

enum class DepthNoise { multiplicative, additive };

/// Noise applied to a seeded subset of samples. Magnitudes bound uniform
/// noise: relative (multiplicative) or meters (additive) for depth, pixels
/// per axis for flow.
struct CorruptionSpec {
    bool depth_noise = false;
    DepthNoise depth_model = DepthNoise::multiplicative;
    double depth_magnitude = 0.10;
    bool flow_noise = false;
    double flow_magnitude = 10.0;
    double corrupt_fraction = 0.3;
    /// Round every flow vector to integers, as block matching would.
    bool quantize_flow = false;
};

[[nodiscard]] inline std::vector<FlowSample> corrupt(std::vector<FlowSample> samples, const CorruptionSpec& spec,
                                                     std::uint64_t seed) {
    if (!(spec.corrupt_fraction >= 0.0 && spec.corrupt_fraction <= 1.0))
        throw std::invalid_argument("corrupt: fraction must be within [0, 1]");
    SplitMix64 rng(seed);
    const std::size_t n = samples.size();
    const auto count = static_cast<std::size_t>(std::llround(spec.corrupt_fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t r = j + static_cast<std::size_t>(rng.below(n - j));
        std::swap(order[j], order[r]);
        FlowSample& s = samples[order[j]];
        if (spec.depth_noise) {
            const double e = rng.uniform(-spec.depth_magnitude, spec.depth_magnitude);
            const double z = spec.depth_model == DepthNoise::multiplicative ? s.z * (1.0 + e) : s.z + e;
            s.z = z > 1e-3 ? z : 1e-3;
        }
        if (spec.flow_noise) {
            s.du += rng.uniform(-spec.flow_magnitude, spec.flow_magnitude);
            s.dv += rng.uniform(-spec.flow_magnitude, spec.flow_magnitude);
        }
    }
    if (spec.quantize_flow)
        for (auto& s : samples) {
            s.du = std::round(s.du);
            s.dv = std::round(s.dv);
        }
    return samples;
}

/// Random pose with angle uniform in [0, max_angle] about a uniform axis and
/// translation uniform in the ball of radius max_translation.
[[nodiscard]] inline Pose random_pose(SplitMix64& rng, double max_angle, double max_translation) {
    auto unit = [&rng] {
        const double zc = rng.uniform(-1.0, 1.0);
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double s = std::sqrt(1.0 - zc * zc);
        return Eigen::Vector3d(s * std::cos(phi), s * std::sin(phi), zc);
    };
    const Eigen::Vector3d axis = unit();
    const double angle = rng.uniform(0.0, max_angle);
    const Eigen::Vector3d t = unit() * max_translation * std::cbrt(rng.uniform());
    return Pose::from_axis_angle(axis, angle, t);
}

[[nodiscard]] inline double reduction_percent(double error_without, double error_with) {
    if (!(error_without > 0.0)) throw std::invalid_argument("reduction: baseline error must be positive");
    return 100.0 * (1.0 - error_with / error_without);
}

struct RegimeResult {
    std::string name;
    double mean_error_without_m = 0.0;  ///< plain least squares on all samples
    double mean_error_with_m = 0.0;     ///< adaptive estimation
    double reduction_percent = 0.0;
    std::size_t trials = 0;
    /// Trials where the adaptive estimator asked for a measurement; they
    /// are left out of both means.
    std::size_t signals = 0;
};

struct Table2Options {
    std::size_t trials = 100;
    double max_angle = 2.0 * std::numbers::pi / 180.0;
    double max_translation = 0.05;
    CorruptionSpec depth_only{true, DepthNoise::multiplicative, 0.10, false, 10.0, 0.3, true};
    CorruptionSpec flow_only{false, DepthNoise::multiplicative, 0.10, true, 10.0, 0.3, true};
    CorruptionSpec both{true, DepthNoise::multiplicative, 0.10, true, 10.0, 0.3, true};
    RansacParams ransac;
    SceneOptions scene;
    Intrinsics intrinsics;
};

/// Translation error with and without robust estimation under the three
/// corruption regimes (depth only, flow only, both).
[[nodiscard]] inline std::array<RegimeResult, 3> table2_experiment(std::uint64_t seed, const Table2Options& opt = {}) {
    if (opt.trials < 30) throw std::invalid_argument("table2: need at least 30 trials");
    const std::array<std::pair<const char*, const CorruptionSpec*>, 3> regimes{
        {{"depth", &opt.depth_only}, {"flow", &opt.flow_only}, {"depth+flow", &opt.both}}};
    std::array<RegimeResult, 3> out;
    for (std::size_t g = 0; g < regimes.size(); ++g) {
        RegimeResult& res = out[g];
        res.name = regimes[g].first;
        double sum_without = 0.0;
        double sum_with = 0.0;
        for (std::size_t t = 0; t < opt.trials; ++t) {
            SplitMix64 rng = SplitMix64::stream(seed, g * 1'000'003ULL + t);
            const Pose truth = random_pose(rng, opt.max_angle, opt.max_translation);
            const SynthScene scene = make_scene(opt.intrinsics, truth, rng.next(), opt.scene);
            const auto noisy = corrupt(generate(scene), *regimes[g].second, rng.next());

            RansacParams rp = opt.ransac;
            rp.seed = rng.next();
            const PoseOrSignal robust = estimate(noisy, opt.intrinsics, rp);
            const auto* rpose = std::get_if<RansacPose>(&robust);
            if (!rpose) {
                ++res.signals;
                continue;
            }
            const PoseSolution plain = solve_pose(noisy, opt.intrinsics, opt.ransac.refit_gn_iterations);
            sum_without += (plain.pose.translation - truth.translation).norm();
            sum_with += (rpose->pose.translation - truth.translation).norm();
            ++res.trials;
        }
        if (res.trials == 0) throw std::runtime_error("table2: every trial signalled for a measurement");
        res.mean_error_without_m = sum_without / static_cast<double>(res.trials);
        res.mean_error_with_m = sum_with / static_cast<double>(res.trials);
        res.reduction_percent = reduction_percent(res.mean_error_without_m, res.mean_error_with_m);
    }
    return out;
}

}  // namespace tofdepth
