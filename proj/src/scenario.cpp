#include "dcmemu/scenario.hpp"

#include <algorithm>

namespace dcmemu {

namespace {

ClosedLoopConfig closed_loop_config(const ScenarioConfig& cfg, bool with_faults) {
    ClosedLoopConfig loop;
    loop.coeffs = cfg.plant();
    loop.pwm = cfg.pwm;
    loop.controller = cfg.controller;
    if (with_faults) loop.faults = cfg.faults;
    loop.horizon_ns = cfg.horizon_ns;
    loop.recorder_period_ns = cfg.recorder_period_ns;
    return loop;
}

} // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
    switch (cfg.mode) {
        case ScenarioMode::open_loop: {
            const double duty = cfg.duty;
            return run_open_loop(cfg.plant(), [duty](std::int64_t) { return duty; },
                                 cfg.horizon_ns, cfg.recorder_period_ns);
        }
        case ScenarioMode::closed_loop:
        case ScenarioMode::fault: {
            const double ref = cfg.speed_ref_rad_s;
            return run_closed_loop(closed_loop_config(cfg, /*with_faults=*/true),
                                   [ref](std::int64_t) { return ref; });
        }
        case ScenarioMode::diagnose:
            throw validation_error("run_scenario: diagnose scenarios run through run_diagnosis");
    }
    throw validation_error("run_scenario: unknown mode");
}

DiagnosisOutcome run_diagnosis(const ScenarioConfig& cfg) {
    if (cfg.mode != ScenarioMode::diagnose) {
        throw validation_error("run_diagnosis: config mode must be diagnose");
    }
    const double ref = cfg.speed_ref_rad_s;
    const auto ref_profile = [ref](std::int64_t) { return ref; };

    DiagnosisOutcome out;
    out.real = run_closed_loop(closed_loop_config(cfg, /*with_faults=*/true), ref_profile);
    out.emulator = run_closed_loop(closed_loop_config(cfg, /*with_faults=*/false), ref_profile);

    // The reference twin is not torque-loaded by anything downstream, so its
    // published speed is clamped.
    for (auto& r : out.emulator.trace.records) {
        r.wm_rad_s = limit_speed_output(r.wm_rad_s, cfg.diagnosis.speed_cap_rad_s);
    }

    std::optional<std::int64_t> onset;
    if (!cfg.faults.empty()) {
        onset = std::min_element(cfg.faults.begin(), cfg.faults.end(),
                                 [](const FaultWindow& a, const FaultWindow& b) {
                                     return a.start_ns < b.start_ns;
                                 })
                    ->start_ns;
    }

    out.threshold_a = cfg.diagnosis.threshold_a;
    if (out.threshold_a == 0.0) {
        const std::int64_t window_end = onset.value_or(cfg.horizon_ns);
        const std::int64_t window_start =
            std::max<std::int64_t>(0, window_end - cfg.diagnosis.ripple_window_ns);
        out.threshold_a = ripple_threshold(out.emulator.trace, window_start, window_end,
                                           cfg.diagnosis.threshold_multiplier);
    }

    auto [series, report] = compare_traces(out.real.trace, out.emulator.trace, out.threshold_a,
                                           cfg.diagnosis.debounce_samples, onset);
    out.residual = std::move(series);
    out.report = report;
    return out;
}

} // namespace dcmemu
