#pragma once

#include "tofdepth/core.hpp"
#include "tofdepth/parallel.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tofdepth {

/// One grid point's motion. Block matching yields integer displacements;
/// synthetic correspondences may carry fractional ones.
struct FlowSample {
    int u = 0;
    int v = 0;
    double du = 0.0;
    double dv = 0.0;
    double z = 0.0;
    std::uint32_t sad = 0;
    bool valid = false;
};

struct GridSpec {
    int rows = 12;
    int cols = 12;
    int block = 15;
    int initial_step = 8;

    void validate() const {
        if (rows < 1 || cols < 1 || rows * cols < 3) throw std::invalid_argument("grid: need at least 3 points");
        if (block < 1 || block % 2 == 0) throw std::invalid_argument("grid: block size must be odd");
        if (initial_step < 1 || (initial_step & (initial_step - 1)) != 0)
            throw std::invalid_argument("grid: initial step must be a power of two");
    }

    /// Largest displacement per axis reachable by the halving schedule.
    [[nodiscard]] int search_range() const noexcept { return 2 * initial_step - 1; }
    [[nodiscard]] int margin() const noexcept { return block / 2 + search_range(); }
};

struct GridPoint {
    int u = 0;
    int v = 0;
    bool operator==(const GridPoint&) const = default;
};

namespace detail {

inline std::vector<int> grid_axis(int count, int extent, int margin) {
    const int span = extent - 1 - 2 * margin;
    if (span < 0 || span < count - 1)
        throw std::invalid_argument("grid: image too small for block and search margins");
    std::vector<int> pos(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double x = count == 1 ? margin + 0.5 * span
                                    : margin + static_cast<double>(i) * span / static_cast<double>(count - 1);
        pos[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(x));
    }
    return pos;
}

}  // namespace detail

/// Uniform rows x cols grid, inset so that every block reachable by the
/// search stays inside the image. Row-major order.
inline std::vector<GridPoint> grid_points(const GridSpec& spec, int width, int height) {
    spec.validate();
    const auto us = detail::grid_axis(spec.cols, width, spec.margin());
    const auto vs = detail::grid_axis(spec.rows, height, spec.margin());
    std::vector<GridPoint> pts;
    pts.reserve(us.size() * vs.size());
    for (int v : vs)
        for (int u : us) pts.push_back({u, v});
    return pts;
}

/// SAD between the block centered at (u, v) in `a` and at (u + du, v + dv)
/// in `b`. Returns UINT32_MAX if either block leaves its image.
inline std::uint32_t block_sad(const GrayImage& a, const GrayImage& b, int u, int v, int du, int dv, int block) {
    const int h = block / 2;
    const int u2 = u + du;
    const int v2 = v + dv;
    if (u - h < 0 || v - h < 0 || u + h >= a.width || v + h >= a.height) return std::numeric_limits<std::uint32_t>::max();
    if (u2 - h < 0 || v2 - h < 0 || u2 + h >= b.width || v2 + h >= b.height) return std::numeric_limits<std::uint32_t>::max();
    std::uint32_t sad = 0;
    for (int y = -h; y <= h; ++y) {
        const std::uint8_t* ra = &a.at(u - h, v + y);
        const std::uint8_t* rb = &b.at(u2 - h, v2 + y);
        for (int x = 0; x < block; ++x) sad += static_cast<std::uint32_t>(std::abs(int(ra[x]) - int(rb[x])));
    }
    return sad;
}

struct BlockMatch {
    int du = 0;
    int dv = 0;
    std::uint32_t sad = 0;
};

namespace detail {

/// Candidate ordering: lower SAD, then shorter displacement, then (du, dv)
/// lexicographically.
inline bool better_match(const BlockMatch& a, const BlockMatch& b) {
    if (a.sad != b.sad) return a.sad < b.sad;
    const int na = a.du * a.du + a.dv * a.dv;
    const int nb = b.du * b.du + b.dv * b.dv;
    if (na != nb) return na < nb;
    if (a.du != b.du) return a.du < b.du;
    return a.dv < b.dv;
}

}  // namespace detail

/// Three-step search: probe the 3x3 neighborhood at the current step,
/// move to the best candidate, halve the step, stop after step 1.
/// Candidates whose block would leave the image are skipped.
inline BlockMatch tss_match(const GrayImage& prev, const GrayImage& next, int u, int v, const GridSpec& spec) {
    if (!prev.same_size(next)) throw std::invalid_argument("tss_match: image size mismatch");
    BlockMatch best{0, 0, block_sad(prev, next, u, v, 0, 0, spec.block)};
    if (best.sad == std::numeric_limits<std::uint32_t>::max())
        throw std::invalid_argument("tss_match: block at the grid point leaves the image");
    for (int step = spec.initial_step; step >= 1; step /= 2) {
        const BlockMatch center = best;
        for (int j = -1; j <= 1; ++j) {
            for (int i = -1; i <= 1; ++i) {
                if (i == 0 && j == 0) continue;
                BlockMatch cand{center.du + i * step, center.dv + j * step, 0};
                cand.sad = block_sad(prev, next, u, v, cand.du, cand.dv, spec.block);
                if (cand.sad == std::numeric_limits<std::uint32_t>::max()) continue;
                if (detail::better_match(cand, best)) best = cand;
            }
        }
    }
    return best;
}

/// Block-matching flow on the grid. Each sample takes its depth from
/// `depth_prev`; samples without depth are kept but marked invalid.
inline std::vector<FlowSample> compute_flow(const GrayImage& prev, const GrayImage& next, const DepthMap& depth_prev,
                                            const GridSpec& spec, unsigned threads = 1) {
    if (!prev.same_size(next) || !prev.same_size(depth_prev))
        throw std::invalid_argument("compute_flow: image and depth sizes differ");
    const auto pts = grid_points(spec, prev.width, prev.height);
    std::vector<FlowSample> out(pts.size());
    parallel_for(pts.size(), threads, [&](std::size_t i) {
        const GridPoint p = pts[i];
        const BlockMatch m = tss_match(prev, next, p.u, p.v, spec);
        FlowSample& s = out[i];
        s.u = p.u;
        s.v = p.v;
        s.du = m.du;
        s.dv = m.dv;
        s.sad = m.sad;
        s.z = depth_prev.at(p.u, p.v);
        s.valid = is_valid_depth(s.z);
        if (!s.valid) s.z = 0.0;
    });
    return out;
}

}  // namespace tofdepth
