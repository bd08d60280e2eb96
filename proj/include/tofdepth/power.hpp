#pragma once

#include <stdexcept>

namespace tofdepth {

/// Watts. Defaults are the measured embedded-platform figures: idle is
/// core + DRAM idle, active is the estimator's core and DRAM draw.
struct PowerParams {
    double p_tof = 1.0;
    double p_idle = 0.19;
    double p_core = 0.63;
    double p_mem = 0.06;

    void validate() const {
        if (!(p_idle >= 0.0) || !(p_core >= 0.0) || !(p_mem >= 0.0))
            throw std::invalid_argument("power: component powers must be non-negative");
        if (!(p_tof >= 0.1 && p_tof <= 50.0)) throw std::invalid_argument("power: p_tof outside [0.1, 50] W");
    }
};

/// Average system draw when the TOF camera runs for `duty_cycle_percent` of
/// the frames and the estimator runs for the rest.
[[nodiscard]] inline double system_power(double duty_cycle_percent, const PowerParams& p) {
    p.validate();
    if (!(duty_cycle_percent >= 0.0 && duty_cycle_percent <= 100.0))
        throw std::invalid_argument("power: duty cycle must be within [0, 100]");
    const double on = duty_cycle_percent / 100.0;
    return on * (p.p_tof + p.p_idle) + (1.0 - on) * (p.p_core + p.p_mem);
}

/// Percent saved against running the bare TOF camera continuously.
[[nodiscard]] inline double reduction_vs_tof(double duty_cycle_percent, const PowerParams& p) {
    if (!(p.p_tof > 0.0)) throw std::invalid_argument("power: p_tof must be positive");
    return 100.0 * (1.0 - system_power(duty_cycle_percent, p) / p.p_tof);
}

}  // namespace tofdepth
