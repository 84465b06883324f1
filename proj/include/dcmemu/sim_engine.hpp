#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dcmemu/control.hpp"
#include "dcmemu/errors.hpp"
#include "dcmemu/motor_model.hpp"
#include "dcmemu/pwm.hpp"

namespace dcmemu {

/// Timed actuator-inactivation interval, half-open: t is faulted when
/// start_ns <= t < start_ns + duration_ns.
struct FaultWindow {
    std::int64_t start_ns = 0;
    std::int64_t duration_ns = 0;

    bool contains(std::int64_t t_ns) const {
        return t_ns >= start_ns && t_ns < start_ns + duration_ns;
    }

    friend bool operator==(const FaultWindow&, const FaultWindow&) = default;
};

void validate_fault_windows(std::span<const FaultWindow> windows);

/// Zeroes both switch commands while t lies inside any window; identity
/// everywhere else.
inline SwitchPair fault_gate(const SwitchPair& sw, std::int64_t t_ns,
                             std::span<const FaultWindow> windows) {
    for (const auto& w : windows) {
        if (w.contains(t_ns)) return SwitchPair{false, false};
    }
    return sw;
}

inline bool fault_active(std::int64_t t_ns, std::span<const FaultWindow> windows) {
    for (const auto& w : windows) {
        if (w.contains(t_ns)) return true;
    }
    return false;
}

struct TraceRecord {
    std::int64_t t_ns = 0;
    double duty = 0.0;
    double vh_v = 0.0;
    double im_a = 0.0;
    double wm_rad_s = 0.0;
    bool fault_active = false;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct Trace {
    std::int64_t period_ns = 0;  ///< recorder cadence
    std::vector<TraceRecord> records;

    friend bool operator==(const Trace&, const Trace&) = default;
};

/// Task-firing counters over one run; the determinism and grid-exactness
/// checks read these.
struct RateCounters {
    std::int64_t plant_steps = 0;
    std::int64_t pwm_latches = 0;
    std::int64_t speed_ticks = 0;
    std::int64_t current_ticks = 0;
    std::int64_t recorder_samples = 0;
};

struct RunStats {
    double max_abs_iref_a = 0.0;
    double duty_min = 1.0;
    double duty_max = 0.0;
};

struct RunResult {
    Trace trace;
    RateCounters counters;
    RunStats stats;
    PlantState final_state;
};

/// Deterministic multi-rate executor on an integer-nanosecond clock. Tasks
/// fire at phase + k*period for every such instant in [0, horizon); tasks
/// due at the same instant run in ascending priority order.
class Scheduler {
  public:
    using Task = std::function<void(std::int64_t t_ns)>;

    void add_task(std::string id, std::int64_t period_ns, std::int64_t phase_ns, int priority,
                  Task task);

    /// Runs the schedule to the horizon. The clock never advances past it.
    void run(std::int64_t horizon_ns);

    std::int64_t now() const { return now_ns_; }

  private:
    struct Entry {
        std::string id;
        std::int64_t period_ns;
        std::int64_t next_ns;
        int priority;
        Task task;
    };
    std::vector<Entry> entries_;
    std::int64_t now_ns_ = 0;
};

using DutyProfile = std::function<double(std::int64_t t_ns)>;
using SpeedRefProfile = std::function<double(std::int64_t t_ns)>;

/// Direct-drive run: the duty profile feeds the mean chopper law, no PWM and
/// no controllers in the path.
RunResult run_open_loop(const PlantCoefficients& coeffs, const DutyProfile& duty,
                        std::int64_t horizon_ns, std::int64_t recorder_period_ns);

struct ClosedLoopConfig {
    PlantCoefficients coeffs;
    PwmConfig pwm;
    ControllerConfig controller;
    std::vector<FaultWindow> faults;
    std::int64_t horizon_ns = 1'500'000'000;
    std::int64_t recorder_period_ns = 15'000;

    void validate() const;
};

/// Full cascade: speed PI -> current PI -> duty latch -> PWM -> fault gate ->
/// chopper decode -> plant step, with the recorder last at each instant.
RunResult run_closed_loop(const ClosedLoopConfig& cfg, const SpeedRefProfile& speed_ref);

/// Keeps every factor-th record, timestamps preserved.
Trace recorder_decimate(const Trace& full, std::int64_t factor);

} // namespace dcmemu
