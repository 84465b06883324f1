#include "dcmemu/sim_engine.hpp"

#include <algorithm>
#include <limits>
#include <utility>

namespace dcmemu {

void validate_fault_windows(std::span<const FaultWindow> windows) {
    std::vector<FaultWindow> sorted(windows.begin(), windows.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const FaultWindow& a, const FaultWindow& b) { return a.start_ns < b.start_ns; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i].duration_ns <= 0) {
            throw validation_error("FaultWindow: duration_ns must be > 0");
        }
        if (sorted[i].start_ns < 0) {
            throw validation_error("FaultWindow: start_ns must be >= 0");
        }
        if (i > 0 && sorted[i].start_ns < sorted[i - 1].start_ns + sorted[i - 1].duration_ns) {
            throw validation_error("FaultWindow: windows may not overlap");
        }
    }
}

void Scheduler::add_task(std::string id, std::int64_t period_ns, std::int64_t phase_ns,
                         int priority, Task task) {
    if (period_ns <= 0) throw validation_error("Scheduler: task period must be > 0");
    if (phase_ns < 0) throw validation_error("Scheduler: task phase must be >= 0");
    for (const auto& e : entries_) {
        if (e.priority == priority) {
            throw validation_error("Scheduler: duplicate task priority for '" + id + "'");
        }
    }
    entries_.push_back(Entry{std::move(id), period_ns, phase_ns, priority, std::move(task)});
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.priority < b.priority; });
}

void Scheduler::run(std::int64_t horizon_ns) {
    if (horizon_ns <= 0) throw validation_error("Scheduler: horizon must be > 0");
    while (true) {
        std::int64_t t_next = std::numeric_limits<std::int64_t>::max();
        for (const auto& e : entries_) {
            t_next = std::min(t_next, e.next_ns);
        }
        if (t_next >= horizon_ns) {
            now_ns_ = horizon_ns;
            return;
        }
        now_ns_ = t_next;
        // entries_ is priority-sorted, so coincident tasks fire in rank order.
        for (auto& e : entries_) {
            if (e.next_ns == t_next) {
                e.task(t_next);
                e.next_ns += e.period_ns;
            }
        }
    }
}

RunResult run_open_loop(const PlantCoefficients& coeffs, const DutyProfile& duty,
                        std::int64_t horizon_ns, std::int64_t recorder_period_ns) {
    coeffs.validate();
    if (recorder_period_ns <= 0) {
        throw validation_error("run_open_loop: recorder_period_ns must be > 0");
    }

    RunResult result;
    result.trace.period_ns = recorder_period_ns;
    result.trace.records.reserve(
        static_cast<std::size_t>(horizon_ns / recorder_period_ns) + 1);

    PlantState state;
    double current_duty = 0.0;
    double current_vh = 0.0;

    Scheduler sched;
    sched.add_task("plant", coeffs.step_ns, 0, 0, [&](std::int64_t t) {
        current_duty = duty(t);
        current_vh = chopper_voltage(current_duty, coeffs.vin_v);
        state = discrete_step(coeffs, state, current_vh);
        ++result.counters.plant_steps;
    });
    sched.add_task("recorder", recorder_period_ns, 0, 1, [&](std::int64_t t) {
        result.trace.records.push_back(
            TraceRecord{t, current_duty, current_vh, state.im_a, state.wm_rad_s, false});
        ++result.counters.recorder_samples;
    });
    sched.run(horizon_ns);

    result.final_state = state;
    return result;
}

void ClosedLoopConfig::validate() const {
    coeffs.validate();
    pwm.validate();
    controller.validate();
    validate_fault_windows(faults);
    if (horizon_ns <= 0) throw validation_error("ClosedLoopConfig: horizon_ns must be > 0");
    if (recorder_period_ns <= 0) {
        throw validation_error("ClosedLoopConfig: recorder_period_ns must be > 0");
    }
}

RunResult run_closed_loop(const ClosedLoopConfig& cfg, const SpeedRefProfile& speed_ref) {
    cfg.validate();

    RunResult result;
    result.trace.period_ns = cfg.recorder_period_ns;
    result.trace.records.reserve(
        static_cast<std::size_t>(cfg.horizon_ns / cfg.recorder_period_ns) + 1);

    PlantState state;
    PiState speed_pi;
    PiState current_pi;
    double iref = 0.0;
    double duty_cmd = 0.5;  // zero volts commanded until the first controller tick
    double latched_duty = quantize_duty(cfg.pwm, duty_cmd);
    double current_vh = 0.0;
    const std::span<const FaultWindow> faults(cfg.faults);

    Scheduler sched;
    sched.add_task("speed-pi", cfg.controller.timing.speed_period_ns, 0, 0, [&](std::int64_t t) {
        iref = speed_controller_tick(cfg.controller, speed_pi, speed_ref(t), state.wm_rad_s);
        result.stats.max_abs_iref_a = std::max(result.stats.max_abs_iref_a, std::abs(iref));
        ++result.counters.speed_ticks;
    });
    sched.add_task("current-pi", cfg.controller.timing.current_period_ns, 0, 1,
                   [&](std::int64_t) {
                       duty_cmd = current_controller_tick(cfg.controller, current_pi, iref,
                                                          state.im_a, cfg.coeffs.vin_v);
                       result.stats.duty_min = std::min(result.stats.duty_min, duty_cmd);
                       result.stats.duty_max = std::max(result.stats.duty_max, duty_cmd);
                       ++result.counters.current_ticks;
                   });
    sched.add_task("pwm-latch", cfg.pwm.period_ns(), 0, 2, [&](std::int64_t) {
        latched_duty = quantize_duty(cfg.pwm, duty_cmd);
        ++result.counters.pwm_latches;
    });
    sched.add_task("plant", cfg.coeffs.step_ns, 0, 3, [&](std::int64_t t) {
        SwitchPair sw = pwm_sample(cfg.pwm, latched_duty, t);
        sw = fault_gate(sw, t, faults);
        current_vh = decode_chopper(sw, cfg.coeffs.vin_v);
        state = discrete_step(cfg.coeffs, state, current_vh);
        ++result.counters.plant_steps;
    });
    sched.add_task("recorder", cfg.recorder_period_ns, 0, 4, [&](std::int64_t t) {
        result.trace.records.push_back(TraceRecord{t, latched_duty, current_vh, state.im_a,
                                                   state.wm_rad_s, fault_active(t, faults)});
        ++result.counters.recorder_samples;
    });
    sched.run(cfg.horizon_ns);

    result.final_state = state;
    return result;
}

Trace recorder_decimate(const Trace& full, std::int64_t factor) {
    if (factor < 1) throw validation_error("recorder_decimate: factor must be >= 1");
    Trace out;
    out.period_ns = full.period_ns * factor;
    out.records.reserve(full.records.size() / static_cast<std::size_t>(factor) + 1);
    for (std::size_t i = 0; i < full.records.size(); i += static_cast<std::size_t>(factor)) {
        out.records.push_back(full.records[i]);
    }
    return out;
}

} // namespace dcmemu
