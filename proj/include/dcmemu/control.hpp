#pragma once

#include <cstdint>

#include "dcmemu/errors.hpp"

namespace dcmemu {

/// Incremental (velocity-form) PI gain pair:
///   u(k) = u(k-1) + kp*e(k) + kpi*e(k-1)
/// kp applies to the fresh error, kpi to the previous one. A discretized PI
/// yields kpi = -kp + ki*ts, hence the negative second gain.
struct PiGains {
    double kp = 0.0;
    double kpi = 0.0;

    friend bool operator==(const PiGains&, const PiGains&) = default;
};

/// Per-controller memory. `output` always holds the clamped value, so a
/// saturated controller carries no windup into the next step.
struct PiState {
    double prev_error = 0.0;
    double output = 0.0;
};

struct LoopTiming {
    std::int64_t current_period_ns = 300'000;
    std::int64_t speed_period_ns = 20'000'000;
    double iref_limit_a = 13.0;
    double duty_min = 0.0;
    double duty_max = 1.0;

    void validate() const;

    friend bool operator==(const LoopTiming&, const LoopTiming&) = default;
};

/// Gains and timing of the cascade: the speed loop emits a limited current
/// reference, the current loop emits the chopper duty.
struct ControllerConfig {
    PiGains speed{0.142, -0.1111};
    PiGains current{1.1737, -1.0150};
    LoopTiming timing{};

    void validate() const;

    friend bool operator==(const ControllerConfig&, const ControllerConfig&) = default;
};

/// One incremental-PI update clamped to [lo, hi]. Returns the new output and
/// stores it (clamped) together with the error.
double pi_step(const PiGains& g, PiState& st, double error, double lo, double hi);

/// Outer loop: speed error -> current reference, limited to +/-iref_limit_a.
double speed_controller_tick(const ControllerConfig& c, PiState& st, double ref_rad_s,
                             double measured_wm_rad_s);

/// Inner loop: current error -> mean-voltage command clamped to the supply
/// rails, returned as the equivalent chopper duty in [duty_min, duty_max].
/// A zero controller state therefore commands the neutral duty 0.5 (0 V).
double current_controller_tick(const ControllerConfig& c, PiState& st, double iref_a,
                               double measured_im_a, double vin_v);

} // namespace dcmemu
