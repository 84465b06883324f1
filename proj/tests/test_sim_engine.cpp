#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "dcmemu/sim_engine.hpp"

using namespace dcmemu;

TEST_CASE("scheduler fires coincident tasks in priority order") {
    Scheduler sched;
    std::vector<std::string> log;
    sched.add_task("b", 3, 0, 2, [&](std::int64_t t) { log.push_back("b@" + std::to_string(t)); });
    sched.add_task("a", 2, 0, 1, [&](std::int64_t t) { log.push_back("a@" + std::to_string(t)); });
    sched.run(7);
    const std::vector<std::string> expected = {"a@0", "b@0", "a@2", "b@3", "a@4", "a@6", "b@6"};
    CHECK(log == expected);
    CHECK(sched.now() == 7);
}

TEST_CASE("scheduler respects phase and excludes the horizon") {
    Scheduler sched;
    int fires = 0;
    sched.add_task("t", 5, 3, 0, [&](std::int64_t) { ++fires; });
    sched.run(13);  // fires at 3 and 8; 13 is past the horizon
    CHECK(fires == 2);

    Scheduler sched2;
    int fires2 = 0;
    sched2.add_task("t", 5, 0, 0, [&](std::int64_t) { ++fires2; });
    sched2.run(10);  // fires at 0 and 5; 10 is excluded
    CHECK(fires2 == 2);
}

TEST_CASE("scheduler rejects duplicate priorities and bad tasks") {
    Scheduler sched;
    sched.add_task("a", 10, 0, 0, [](std::int64_t) {});
    CHECK_THROWS_AS(sched.add_task("b", 20, 0, 0, [](std::int64_t) {}), validation_error);
    CHECK_THROWS_AS(sched.add_task("c", 0, 0, 1, [](std::int64_t) {}), validation_error);
    CHECK_THROWS_AS(sched.add_task("d", 5, -1, 2, [](std::int64_t) {}), validation_error);
    CHECK_THROWS_AS(sched.run(0), validation_error);
}

TEST_CASE("fault_gate") {
    const std::vector<FaultWindow> windows = {{100, 15'000}};
    const SwitchPair on{true, false};
    const SwitchPair off{false, true};

    CHECK(fault_gate(on, 50, windows) == on);
    CHECK(fault_gate(on, 5'000, windows) == SwitchPair{false, false});
    CHECK(fault_gate(off, 100, windows) == SwitchPair{false, false});
    // half-open boundary: the end instant is already clear
    CHECK(fault_gate(off, 15'100, windows) == off);
    CHECK(fault_gate(on, 15'099, windows) == SwitchPair{false, false});
    CHECK(fault_gate(on, 1'000'000, {}) == on);
}

TEST_CASE("fault window validation") {
    CHECK_NOTHROW(validate_fault_windows(std::vector<FaultWindow>{{0, 10}, {10, 5}}));
    CHECK_THROWS_AS(validate_fault_windows(std::vector<FaultWindow>{{0, 10}, {9, 5}}),
                    validation_error);
    CHECK_THROWS_AS(validate_fault_windows(std::vector<FaultWindow>{{0, 0}}), validation_error);
    CHECK_THROWS_AS(validate_fault_windows(std::vector<FaultWindow>{{-5, 10}}), validation_error);
}

TEST_CASE("open loop at neutral duty stays identically at rest") {
    const auto res = run_open_loop(default_coefficients(), [](std::int64_t) { return 0.5; },
                                   10'000'000, 15'000);
    for (const auto& r : res.trace.records) {
        CHECK(r.im_a == 0.0);
        CHECK(r.wm_rad_s == 0.0);
        CHECK(r.vh_v == 0.0);
    }
}

TEST_CASE("open loop 60 ms run: 4000 records, monotone speed rise") {
    const auto res = run_open_loop(default_coefficients(), [](std::int64_t) { return 0.7; },
                                   60'000'000, 15'000);
    REQUIRE(res.trace.records.size() == 4000);
    CHECK(res.counters.plant_steps == 60'000);
    CHECK(res.counters.recorder_samples == 4000);

    for (std::size_t i = 0; i < res.trace.records.size(); ++i) {
        const auto& r = res.trace.records[i];
        CHECK(r.t_ns == static_cast<std::int64_t>(i) * 15'000);
        CHECK(r.duty == 0.7);
        CHECK(r.fault_active == false);
        if (i > 0) {
            CHECK(r.wm_rad_s >= res.trace.records[i - 1].wm_rad_s);
        }
    }
    // still rising toward the fixed point, nowhere near overshoot
    CHECK(res.final_state.wm_rad_s > 100.0);
    CHECK(res.final_state.wm_rad_s < 130.433);
}

TEST_CASE("numeric overflow aborts the run") {
    // per-field-valid coefficients whose update matrix still has spectral
    // radius > 1 through the off-diagonal product
    PlantCoefficients c = default_coefficients();
    c.b_c = 0.5;
    c.l_c = 8.0;
    CHECK_THROWS_AS(run_open_loop(c, [](std::int64_t) { return 0.7; }, 10'000'000, 15'000),
                    numeric_overflow_error);
}

TEST_CASE("open loop propagates duty-profile domain errors") {
    CHECK_THROWS_AS(run_open_loop(default_coefficients(), [](std::int64_t) { return 1.4; },
                                  1'000'000, 15'000),
                    std::domain_error);
}

TEST_CASE("recorder_decimate") {
    Trace full;
    full.period_ns = 1000;
    for (int i = 0; i < 4500; ++i) {
        full.records.push_back(TraceRecord{i * 1000, 0.5, 0.0, 0.0, 0.0, false});
    }
    const auto thinned = recorder_decimate(full, 15);
    CHECK(thinned.records.size() == 300);
    CHECK(thinned.period_ns == 15'000);
    CHECK(thinned.records[1].t_ns == 15'000);

    const auto identity = recorder_decimate(full, 1);
    CHECK(identity == full);

    CHECK_THROWS_AS(recorder_decimate(full, 0), validation_error);
}

TEST_CASE("decimating a full-rate recording equals recording at the slow cadence") {
    const auto duty = [](std::int64_t) { return 0.7; };
    const auto full = run_open_loop(default_coefficients(), duty, 60'000'000, 1000);
    const auto slow = run_open_loop(default_coefficients(), duty, 60'000'000, 15'000);
    CHECK(recorder_decimate(full.trace, 15) == slow.trace);
    CHECK(slow.trace.records.size() == 4000);
}

TEST_CASE("closed loop is deterministic") {
    ClosedLoopConfig cfg;
    cfg.coeffs = default_coefficients();
    cfg.horizon_ns = 200'000'000;
    const auto ref = [](std::int64_t) { return 100.0; };
    const auto a = run_closed_loop(cfg, ref);
    const auto b = run_closed_loop(cfg, ref);
    CHECK(a.trace == b.trace);
    CHECK(a.final_state.im_a == b.final_state.im_a);
    CHECK(a.final_state.wm_rad_s == b.final_state.wm_rad_s);
}

TEST_CASE("task rates over a 1 s closed-loop run match the grids exactly") {
    ClosedLoopConfig cfg;
    cfg.coeffs = default_coefficients();
    cfg.horizon_ns = 1'000'000'000;
    const auto res = run_closed_loop(cfg, [](std::int64_t) { return 100.0; });
    CHECK(res.counters.plant_steps == 1'000'000);
    CHECK(res.counters.pwm_latches == 16'000);
    CHECK(res.counters.speed_ticks == 50);
    CHECK(res.counters.current_ticks == 3334);
    CHECK(res.counters.recorder_samples == 66'667);
}

TEST_CASE("closed loop at zero reference stays essentially at rest") {
    ClosedLoopConfig cfg;
    cfg.coeffs = default_coefficients();
    cfg.horizon_ns = 500'000'000;
    const auto res = run_closed_loop(cfg, [](std::int64_t) { return 0.0; });

    double max_abs_wm = 0.0, duty_sum = 0.0, final_abs_wm = 0.0;
    for (const auto& r : res.trace.records) {
        max_abs_wm = std::max(max_abs_wm, std::abs(r.wm_rad_s));
        duty_sum += r.duty;
        if (r.t_ns >= 400'000'000) final_abs_wm = std::max(final_abs_wm, std::abs(r.wm_rad_s));
    }
    const double mean_duty = duty_sum / static_cast<double>(res.trace.records.size());
    CHECK(max_abs_wm < 0.5);
    CHECK(final_abs_wm < 0.05);
    // the mean duty dithers around neutral, i.e. zero mean chopper voltage
    CHECK(mean_duty > 0.49);
    CHECK(mean_duty < 0.51);
}

TEST_CASE("closed loop reaches and holds the 100 rad/s reference") {
    ClosedLoopConfig cfg;
    cfg.coeffs = default_coefficients();
    const auto res = run_closed_loop(cfg, [](std::int64_t) { return 100.0; });

    for (const auto& r : res.trace.records) {
        if (r.t_ns >= 1'400'000'000) {
            CHECK(r.wm_rad_s > 98.0);
            CHECK(r.wm_rad_s < 102.0);
        }
    }
    CHECK(res.stats.max_abs_iref_a <= 13.0 + 1e-12);
    CHECK(res.stats.duty_min >= 0.0);
    CHECK(res.stats.duty_max <= 1.0);
}

namespace {

// Speed trajectory of the plant driven through the switching waveform at a
// pinned duty, sampled at the recorder cadence.
std::vector<double> pwm_fixed_duty_speeds(const PlantCoefficients& coeffs, const PwmConfig& pwm,
                                          double duty, std::int64_t horizon_ns) {
    PlantState state;
    std::vector<double> wm_samples;
    Scheduler sched;
    sched.add_task("plant", coeffs.step_ns, 0, 0, [&](std::int64_t t) {
        const double vh = decode_chopper(pwm_sample(pwm, duty, t), coeffs.vin_v);
        state = discrete_step(coeffs, state, vh);
    });
    sched.add_task("recorder", 15'000, 0, 1,
                   [&](std::int64_t) { wm_samples.push_back(state.wm_rad_s); });
    sched.run(horizon_ns);
    return wm_samples;
}

double max_speed_gap(const std::vector<double>& a, const Trace& b) {
    REQUIRE(a.size() == b.records.size());
    double max_diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        max_diff = std::max(max_diff, std::abs(a[i] - b.records[i].wm_rad_s));
    }
    return max_diff;
}

} // namespace

TEST_CASE("PWM path and direct chopper path agree within the ripple envelope") {
    const std::int64_t horizon = 300'000'000;
    const auto coeffs = default_coefficients();
    const PwmConfig pwm;

    // duty 0.704: the on-window spans a whole number of plant ticks, so the
    // plant-sampled mean voltage matches the direct chopper law exactly and
    // only the switching ripple separates the trajectories
    const double aligned = 0.704;
    const auto direct =
        run_open_loop(coeffs, [&](std::int64_t) { return aligned; }, horizon, 15'000);
    const auto pwm_wm = pwm_fixed_duty_speeds(coeffs, pwm, aligned, horizon);
    CHECK(max_speed_gap(pwm_wm, direct.trace) < 0.05);

    // at an arbitrary duty the plant's own 1 us tick resamples the 100 ns
    // waveform, shifting the effective duty by up to half a tick per period
    // (<= vin*h/period in the mean, about 0.5 V here) on top of quantization
    const double coarse = 0.7;
    const auto direct2 =
        run_open_loop(coeffs, [&](std::int64_t) { return coarse; }, horizon, 15'000);
    const auto pwm_wm2 =
        pwm_fixed_duty_speeds(coeffs, pwm, quantize_duty(pwm, coarse), horizon);
    CHECK(max_speed_gap(pwm_wm2, direct2.trace) < 3.5);
}

TEST_CASE("a fault window zeroes the switching law exactly inside it") {
    const PwmConfig pwm;
    const std::vector<FaultWindow> windows = {{100'000, 15'000}};
    const double duty = 437.0 / 625.0;
    for (std::int64_t t = 0; t < 300'000; t += 500) {
        const auto clean = pwm_sample(pwm, duty, t);
        const auto gated = fault_gate(clean, t, windows);
        if (t >= 100'000 && t < 115'000) {
            CHECK(decode_chopper(gated, 60.0) == 0.0);
        } else {
            CHECK(gated == clean);
        }
    }
}

TEST_CASE("a fault run matches the clean run exactly until onset, then diverges") {
    ClosedLoopConfig clean;
    clean.coeffs = default_coefficients();
    clean.horizon_ns = 700'000'000;

    ClosedLoopConfig faulted = clean;
    faulted.faults = {{500'000'000, 60'000}};

    const auto ref = [](std::int64_t) { return 100.0; };
    const auto a = run_closed_loop(clean, ref);
    const auto b = run_closed_loop(faulted, ref);

    REQUIRE(a.trace.records.size() == b.trace.records.size());
    bool diverged = false;
    for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
        const auto& ra = a.trace.records[i];
        const auto& rb = b.trace.records[i];
        if (ra.t_ns < 500'000'000) {
            CHECK(ra == rb);
        } else if (ra.im_a != rb.im_a) {
            diverged = true;
        }
    }
    CHECK(diverged);

    // regulation resumes after the fault clears
    for (const auto& r : b.trace.records) {
        if (r.t_ns >= 600'000'000) {
            CHECK(r.wm_rad_s > 98.0);
            CHECK(r.wm_rad_s < 102.0);
        }
    }

    // the fault flag marks exactly the in-window records
    for (const auto& r : b.trace.records) {
        CHECK(r.fault_active == (r.t_ns >= 500'000'000 && r.t_ns < 500'060'000));
    }
}

TEST_CASE("closed-loop config validation") {
    ClosedLoopConfig cfg;
    cfg.coeffs = default_coefficients();
    CHECK_NOTHROW(cfg.validate());
    cfg.horizon_ns = 0;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg = ClosedLoopConfig{};
    cfg.coeffs = default_coefficients();
    cfg.faults = {{0, 10}, {5, 10}};
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg = ClosedLoopConfig{};
    cfg.coeffs = default_coefficients();
    cfg.coeffs.vin_v = 0.0;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
}
