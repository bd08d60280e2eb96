#pragma once

#include "tofdepth/core.hpp"
#include "tofdepth/flow.hpp"
#include "tofdepth/metrics.hpp"
#include "tofdepth/ransac.hpp"
#include "tofdepth/warp.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <variant>

namespace tofdepth {

/// No pose could be estimated between the reference and current views.
class InfillError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InfillResult {
    DepthMap depth_filled;
    std::size_t filled_pixel_count = 0;
    /// MRE between the measured and warped depth where both are valid;
    /// absent without overlap.
    std::optional<double> overlap_mre_percent;
    Pose pose;
};

/// Fills invalid pixels of `cur_depth` (out of range, saturated) with the
/// reference depth warped into the current view. Valid measurements are
/// never overwritten.
[[nodiscard]] inline InfillResult infill(const GrayImage& ref_image, const DepthMap& ref_depth,
                                         const GrayImage& cur_image, const DepthMap& cur_depth, const Intrinsics& k,
                                         const GridSpec& grid, const RansacParams& ransac, unsigned threads = 1) {
    if (!ref_image.same_size(k.width, k.height) || !ref_depth.same_size(ref_image) || !cur_image.same_size(ref_image) ||
        !cur_depth.same_size(ref_image))
        throw std::invalid_argument("infill: frames must share the intrinsics' size");
    const auto samples = compute_flow(ref_image, cur_image, ref_depth, grid, threads);
    const PoseOrSignal result = estimate(samples, k, ransac);
    const auto* rp = std::get_if<RansacPose>(&result);
    if (!rp) throw InfillError("cannot infill: no reliable pose between reference and current frame");

    const DepthMap warped = reproject(ref_depth, rp->pose, k);
    InfillResult out{cur_depth, 0, std::nullopt, rp->pose};
    for (std::size_t i = 0; i < out.depth_filled.data.size(); ++i) {
        if (is_valid_depth(cur_depth.data[i]) || !is_valid_depth(warped.data[i])) continue;
        out.depth_filled.data[i] = warped.data[i];
        ++out.filled_pixel_count;
    }
    if (const auto err = depth_errors(cur_depth, warped)) out.overlap_mre_percent = err->mre_percent;
    return out;
}

}  // namespace tofdepth
