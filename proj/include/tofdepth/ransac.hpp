#pragma once

#include "tofdepth/core.hpp"
#include "tofdepth/flow.hpp"
#include "tofdepth/pose.hpp"
#include "tofdepth/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace tofdepth {

struct RansacParams {
    int iterations = 30;
    /// Inlier gate on the combined squared flow error, in px^2.
    double threshold = 4.0;
    /// Minimum inlier set, as a fraction of the valid samples.
    double min_inlier_fraction = 0.10;
    std::uint64_t seed = 0;
    /// Gauss-Newton iterations for hypotheses and for the inlier refit.
    int hypothesis_gn_iterations = 1;
    int refit_gn_iterations = 3;

    void validate() const {
        if (iterations < 1) throw std::invalid_argument("ransac: iterations must be >= 1");
        if (!(threshold > 0.0)) throw std::invalid_argument("ransac: threshold must be positive");
        if (!(min_inlier_fraction > 0.0 && min_inlier_fraction <= 1.0))
            throw std::invalid_argument("ransac: min_inlier_fraction must be in (0, 1]");
        if (hypothesis_gn_iterations < 1 || refit_gn_iterations < 1)
            throw std::invalid_argument("ransac: Gauss-Newton iterations must be >= 1");
    }
};

struct RansacPose {
    Pose pose;
    /// Indices into the input sample list.
    std::vector<std::size_t> inliers;
    /// Mean residual of the refit pose over the inliers.
    double mean_residual = 0.0;
    /// Refit residual per inlier, same order as `inliers`.
    std::vector<double> inlier_residuals;
    /// Iteration whose hypothesis selected the inlier set.
    int hypothesis_index = -1;
};

/// No trustworthy pose: acquire a measured depth map instead.
struct TofSignal {
    std::size_t valid_samples = 0;
};

using PoseOrSignal = std::variant<RansacPose, TofSignal>;

[[nodiscard]] inline std::size_t min_inlier_count(std::size_t valid_samples, double fraction) {
    const auto scaled = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(valid_samples) - 1e-12));
    return std::max<std::size_t>(3, scaled);
}

/// Adaptive pose estimation. Each iteration draws three distinct valid
/// samples from its own SplitMix64 stream (seed, iteration), fits them with
/// one Gauss-Newton step and gates every valid sample on the residual. The
/// qualifying inlier set with the lowest mean residual (earliest iteration
/// on ties) is refit. Degenerate draws use up their iteration.
[[nodiscard]] inline PoseOrSignal estimate(std::span<const FlowSample> samples, const Intrinsics& k,
                                           const RansacParams& params) {
    params.validate();
    std::vector<std::size_t> valid;
    valid.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (samples[i].valid) valid.push_back(i);
    if (valid.size() < 3) return TofSignal{valid.size()};

    const std::size_t min_size = min_inlier_count(valid.size(), params.min_inlier_fraction);
    if (min_size > valid.size()) return TofSignal{valid.size()};

    std::vector<std::size_t> best_inliers;
    double best_mean = std::numeric_limits<double>::infinity();
    int best_iteration = -1;
    std::vector<std::size_t> inliers;
    inliers.reserve(valid.size());

    for (int it = 0; it < params.iterations; ++it) {
        SplitMix64 rng = SplitMix64::stream(params.seed, static_cast<std::uint64_t>(it));
        std::array<std::size_t, 3> pick{};
        // Partial Fisher-Yates over positions in `valid`.
        std::vector<std::size_t> pool(valid);
        for (std::size_t j = 0; j < 3; ++j) {
            const std::size_t r = j + static_cast<std::size_t>(rng.below(pool.size() - j));
            std::swap(pool[j], pool[r]);
            pick[j] = pool[j];
        }
        const std::array<FlowSample, 3> minimal{samples[pick[0]], samples[pick[1]], samples[pick[2]]};

        Pose hypothesis;
        try {
            hypothesis = solve_pose(minimal, k, params.hypothesis_gn_iterations).pose;
        } catch (const DegenerateGeometry&) {
            continue;
        }

        inliers.clear();
        double sum = 0.0;
        for (std::size_t idx : valid) {
            const double r = residual(samples[idx], hypothesis, k);
            if (r < params.threshold) {
                inliers.push_back(idx);
                sum += r;
            }
        }
        if (inliers.size() < min_size) continue;
        const double mean = sum / static_cast<double>(inliers.size());
        if (mean < best_mean) {
            best_mean = mean;
            best_inliers = inliers;
            best_iteration = it;
        }
    }
    if (best_iteration < 0) return TofSignal{valid.size()};

    std::vector<FlowSample> subset;
    subset.reserve(best_inliers.size());
    for (std::size_t idx : best_inliers) subset.push_back(samples[idx]);
    PoseSolution refit;
    try {
        refit = solve_pose(subset, k, params.refit_gn_iterations);
    } catch (const DegenerateGeometry&) {
        return TofSignal{valid.size()};
    }

    RansacPose out;
    out.pose = refit.pose;
    out.inliers = std::move(best_inliers);
    out.mean_residual = refit.mean_residual;
    out.inlier_residuals = std::move(refit.residuals);
    out.hypothesis_index = best_iteration;
    return out;
}

}  // namespace tofdepth
