#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dcmemu/errors.hpp"
#include "dcmemu/sim_engine.hpp"

namespace dcmemu {

/// Pointwise |im_real - im_emulator| over a shared recorder grid.
struct ResidualSeries {
    std::vector<std::int64_t> t_ns;
    std::vector<double> residual_a;
};

struct DetectionReport {
    bool detected = false;
    std::int64_t detection_time_ns = -1;  ///< first sample of the confirmed crossing
    std::int64_t latency_ns = -1;         ///< detection_time - fault onset, when onset is known
    double peak_residual_a = 0.0;
};

/// Compares the current channels of two traces sampled on the same grid.
/// Detection fires when the residual stays at or above `threshold_a` for
/// `debounce_samples` consecutive records; the single-sample default would
/// trip on switching-ripple coincidences.
std::pair<ResidualSeries, DetectionReport> compare_traces(
    const Trace& real, const Trace& emulator, double threshold_a, int debounce_samples = 3,
    std::optional<std::int64_t> fault_onset_ns = std::nullopt);

/// Residual threshold calibrated from the reference trace itself: multiplier
/// times the largest |im - mean(im)| excursion over [window_start, window_end).
double ripple_threshold(const Trace& nominal, std::int64_t window_start_ns,
                        std::int64_t window_end_ns, double multiplier = 0.25);

/// Clamp for a speed output that feeds equipment expecting a loaded machine;
/// an unloaded emulator can otherwise run away.
inline double limit_speed_output(double wm_rad_s, double cap_rad_s) {
    if (!(cap_rad_s > 0.0)) throw std::domain_error("limit_speed_output: cap must be > 0");
    if (wm_rad_s > cap_rad_s) return cap_rad_s;
    if (wm_rad_s < -cap_rad_s) return -cap_rad_s;
    return wm_rad_s;
}

} // namespace dcmemu
