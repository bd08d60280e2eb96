#pragma once

#include "tofdepth/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace tofdepth {

/// Depth errors over pixels valid in both the estimate and the reference.
struct DepthErrors {
    double mre_percent = 0.0;
    double mae_cm = 0.0;
    double rmse_cm = 0.0;
    std::size_t pixels = 0;
};

/// Returns nullopt when no pixel is valid in both maps.
[[nodiscard]] inline std::optional<DepthErrors> depth_errors(const DepthMap& truth, const DepthMap& estimate) {
    if (!truth.same_size(estimate)) throw std::invalid_argument("depth_errors: size mismatch");
    double rel = 0.0;
    double abs_sum = 0.0;
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < truth.data.size(); ++i) {
        const double z = truth.data[i];
        const double zh = estimate.data[i];
        if (!is_valid_depth(z) || !is_valid_depth(zh)) continue;
        const double e = std::abs(z - zh);
        rel += e / z;
        abs_sum += e;
        sq += e * e;
        ++n;
    }
    if (n == 0) return std::nullopt;
    const double dn = static_cast<double>(n);
    return DepthErrors{100.0 * rel / dn, 100.0 * abs_sum / dn, 100.0 * std::sqrt(sq / dn), n};
}

/// Median of the finite values; NaN when there are none. Even counts
/// average the two middle values.
[[nodiscard]] inline double median(std::vector<double> values) {
    std::erase_if(values, [](double x) { return !std::isfinite(x); });
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace tofdepth
