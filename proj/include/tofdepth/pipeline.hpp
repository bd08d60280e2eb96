#pragma once

#include "tofdepth/core.hpp"
#include "tofdepth/dataset.hpp"
#include "tofdepth/flow.hpp"
#include "tofdepth/metrics.hpp"
#include "tofdepth/ransac.hpp"
#include "tofdepth/warp.hpp"

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tofdepth {

struct PipelineOptions {
    GridSpec grid;
    RansacParams ransac;
    /// Median infill kernel applied to estimated maps; 0 disables it.
    int median_fill_kernel = 0;
    /// Worker cap for flow estimation; 0 means hardware concurrency.
    unsigned threads = 1;
    std::size_t limit = 100;
};

struct FrameDiagnostics {
    std::size_t valid_samples = 0;
    std::size_t inliers = 0;
    double mean_residual = std::numeric_limits<double>::quiet_NaN();
    double hole_fraction = std::numeric_limits<double>::quiet_NaN();
};

/// Outcome for one frame. `used_tof` frames carry the measured depth and an
/// identity cumulative pose.
struct FrameDecision {
    std::size_t frame_index = 0;
    double timestamp = 0.0;
    bool used_tof = false;
    DepthMap depth_out;
    Pose pose_cumulative;
    FrameDiagnostics diagnostics;
};

struct FrameMetrics {
    std::size_t frame_index = 0;
    double timestamp = 0.0;
    bool used_tof = false;
    /// Absent for TOF frames and for estimates with no overlap with truth.
    std::optional<DepthErrors> errors;
    FrameDiagnostics diagnostics;
    Pose pose_cumulative;
};

struct SequenceReport {
    std::vector<FrameMetrics> frames;
    std::size_t tof_frames = 0;
    std::size_t estimated_frames = 0;
    double duty_cycle_percent = 0.0;
    /// Medians over estimated frames; NaN when nothing was estimated.
    double median_mre_percent = std::numeric_limits<double>::quiet_NaN();
    double median_mae_cm = std::numeric_limits<double>::quiet_NaN();
    double median_rmse_cm = std::numeric_limits<double>::quiet_NaN();
};

using FrameObserver = std::function<void(const FrameDecision&)>;

namespace detail {

inline SequenceReport summarize(std::vector<FrameMetrics> rows) {
    SequenceReport rep;
    std::vector<double> mre, mae, rmse;
    for (const auto& r : rows) {
        if (r.used_tof) {
            ++rep.tof_frames;
            continue;
        }
        ++rep.estimated_frames;
        if (r.errors) {
            mre.push_back(r.errors->mre_percent);
            mae.push_back(r.errors->mae_cm);
            rmse.push_back(r.errors->rmse_cm);
        }
    }
    rep.duty_cycle_percent =
        rows.empty() ? 0.0 : 100.0 * static_cast<double>(rep.tof_frames) / static_cast<double>(rows.size());
    rep.median_mre_percent = median(std::move(mre));
    rep.median_mae_cm = median(std::move(mae));
    rep.median_rmse_cm = median(std::move(rmse));
    rep.frames = std::move(rows);
    return rep;
}

}  // namespace detail

/// Frame-by-frame controller. Frame 0 always uses the TOF camera. Later
/// frames estimate a pose from flow against the previous depth state; on
/// success the last measured map is warped by the composed pose, otherwise
/// the measured depth is taken and the cumulative pose resets. Every frame
/// needs its measured depth, which doubles as ground truth.
[[nodiscard]] inline SequenceReport run_sequence(std::span<const AssociatedFrame> all_frames, const Intrinsics& k,
                                                 const PipelineOptions& opt, const FrameObserver& observer = {}) {
    k.validate();
    opt.ransac.validate();
    opt.grid.validate();
    if (opt.median_fill_kernel != 0 && (opt.median_fill_kernel < 3 || opt.median_fill_kernel % 2 == 0))
        throw std::invalid_argument("pipeline: median fill kernel must be odd and >= 3");
    const auto frames = all_frames.first(std::min(all_frames.size(), opt.limit));
    if (frames.empty()) throw std::invalid_argument("pipeline: empty sequence");
    for (const auto& f : frames) {
        if (!f.image.same_size(k.width, k.height)) throw std::invalid_argument("pipeline: image size does not match intrinsics");
        if (!f.depth) throw std::invalid_argument("pipeline: frame without measured depth");
        if (!f.depth->same_size(k.width, k.height)) throw std::invalid_argument("pipeline: depth size does not match intrinsics");
    }

    std::vector<FrameMetrics> rows;
    rows.reserve(frames.size());
    const DepthMap* last_measured = nullptr;
    DepthMap state;  // depth of the previous frame, measured or estimated
    Pose cumulative;

    for (std::size_t i = 0; i < frames.size(); ++i) {
        FrameDecision d;
        d.frame_index = i;
        d.timestamp = frames[i].rgb_timestamp;
        bool estimated = false;
        if (i > 0) {
            const auto samples = compute_flow(frames[i - 1].image, frames[i].image, state, opt.grid, opt.threads);
            const PoseOrSignal result = estimate(samples, k, opt.ransac);
            if (const auto* rp = std::get_if<RansacPose>(&result)) {
                cumulative = compose(rp->pose, cumulative);
                DepthMap warped = reproject(*last_measured, cumulative, k);
                d.diagnostics.hole_fraction = hole_fraction(warped);
                if (opt.median_fill_kernel) warped = median_infill(warped, opt.median_fill_kernel);
                d.depth_out = std::move(warped);
                d.pose_cumulative = cumulative;
                d.diagnostics.inliers = rp->inliers.size();
                d.diagnostics.mean_residual = rp->mean_residual;
                estimated = true;
            }
            std::size_t valid = 0;
            for (const auto& s : samples) valid += s.valid ? 1 : 0;
            d.diagnostics.valid_samples = valid;
        }
        if (!estimated) {
            d.used_tof = true;
            last_measured = &*frames[i].depth;
            cumulative = Pose::identity();
            d.depth_out = *last_measured;
            d.pose_cumulative = cumulative;
        }

        FrameMetrics m;
        m.frame_index = i;
        m.timestamp = d.timestamp;
        m.used_tof = d.used_tof;
        m.diagnostics = d.diagnostics;
        m.pose_cumulative = d.pose_cumulative;
        if (!d.used_tof) m.errors = depth_errors(*frames[i].depth, d.depth_out);
        rows.push_back(m);

        if (observer) observer(d);
        state = std::move(d.depth_out);
    }
    return detail::summarize(std::move(rows));
}

struct TradeoffRow {
    double threshold = 0.0;
    double duty_cycle_percent = 0.0;
    double median_mre_percent = std::numeric_limits<double>::quiet_NaN();
};

/// One pipeline run per threshold, everything else fixed.
[[nodiscard]] inline std::vector<TradeoffRow> sweep_threshold(std::span<const AssociatedFrame> frames,
                                                              const Intrinsics& k, const PipelineOptions& base,
                                                              std::span<const double> thresholds) {
    std::vector<TradeoffRow> rows;
    rows.reserve(thresholds.size());
    for (double t : thresholds) {
        PipelineOptions opt = base;
        opt.ransac.threshold = t;
        const auto rep = run_sequence(frames, k, opt);
        rows.push_back({t, rep.duty_cycle_percent, rep.median_mre_percent});
    }
    return rows;
}

namespace detail {

inline std::string fmt_double(double x, int precision = 6) {
    if (!std::isfinite(x)) return {};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, x);
    return buf;
}

}  // namespace detail

/// Per-frame CSV. Missing values are empty fields.
inline void write_metrics_csv(std::ostream& out, const SequenceReport& rep) {
    out << "frame_index,used_tof,mre,mae_cm,rmse_cm,inliers,mean_residual,hole_fraction\n";
    for (const auto& r : rep.frames) {
        out << r.frame_index << ',' << (r.used_tof ? 1 : 0) << ',';
        if (r.errors)
            out << detail::fmt_double(r.errors->mre_percent) << ',' << detail::fmt_double(r.errors->mae_cm) << ','
                << detail::fmt_double(r.errors->rmse_cm);
        else
            out << ",,";
        out << ',';
        if (!r.used_tof) out << r.diagnostics.inliers;
        out << ',' << detail::fmt_double(r.diagnostics.mean_residual) << ','
            << detail::fmt_double(r.diagnostics.hole_fraction) << '\n';
    }
}

/// `timestamp tx ty tz qx qy qz qw` per frame, the cumulative pose from the
/// last measured frame.
inline void write_trajectory(std::ostream& out, const SequenceReport& rep) {
    for (const auto& r : rep.frames) {
        const auto& t = r.pose_cumulative.translation;
        const auto q = r.pose_cumulative.quaternion();
        out << detail::fmt_double(r.timestamp) << ' ' << detail::fmt_double(t.x(), 9) << ' '
            << detail::fmt_double(t.y(), 9) << ' ' << detail::fmt_double(t.z(), 9) << ' '
            << detail::fmt_double(q.x(), 9) << ' ' << detail::fmt_double(q.y(), 9) << ' '
            << detail::fmt_double(q.z(), 9) << ' ' << detail::fmt_double(q.w(), 9) << '\n';
    }
}

inline void write_tradeoff_csv(std::ostream& out, std::span<const TradeoffRow> rows) {
    out << "threshold,duty_cycle,median_mre\n";
    for (const auto& r : rows)
        out << detail::fmt_double(r.threshold) << ',' << detail::fmt_double(r.duty_cycle_percent) << ','
            << detail::fmt_double(r.median_mre_percent) << '\n';
}

}  // namespace tofdepth
