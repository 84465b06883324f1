#include "dcmemu/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcmemu {

void LoopTiming::validate() const {
    if (current_period_ns <= 0) throw validation_error("LoopTiming: current_period_ns must be > 0");
    if (speed_period_ns <= 0) throw validation_error("LoopTiming: speed_period_ns must be > 0");
    if (!(iref_limit_a > 0.0)) throw validation_error("LoopTiming: iref_limit_a must be > 0");
    if (!(duty_min < duty_max)) throw validation_error("LoopTiming: duty_min must be < duty_max");
    if (duty_min < 0.0 || duty_max > 1.0) {
        throw validation_error("LoopTiming: duty limits must stay within [0, 1]");
    }
}

void ControllerConfig::validate() const {
    timing.validate();
    for (double g : {speed.kp, speed.kpi, current.kp, current.kpi}) {
        if (!std::isfinite(g)) throw validation_error("ControllerConfig: non-finite gain");
    }
}

double pi_step(const PiGains& g, PiState& st, double error, double lo, double hi) {
    if (!std::isfinite(error)) throw std::domain_error("pi_step: non-finite error");
    if (!(lo < hi)) throw std::domain_error("pi_step: lo must be < hi");
    const double raw = st.output + g.kp * error + g.kpi * st.prev_error;
    st.output = std::clamp(raw, lo, hi);
    st.prev_error = error;
    return st.output;
}

double speed_controller_tick(const ControllerConfig& c, PiState& st, double ref_rad_s,
                             double measured_wm_rad_s) {
    const double limit = c.timing.iref_limit_a;
    return pi_step(c.speed, st, ref_rad_s - measured_wm_rad_s, -limit, limit);
}

double current_controller_tick(const ControllerConfig& c, PiState& st, double iref_a,
                               double measured_im_a, double vin_v) {
    if (!(vin_v > 0.0)) throw std::domain_error("current_controller_tick: vin must be > 0");
    // The PI acts in volts against the supply rails; the returned duty is the
    // chopper command whose mean output realizes that voltage.
    const double u_v = pi_step(c.current, st, iref_a - measured_im_a, -vin_v, vin_v);
    const double duty = 0.5 + 0.5 * u_v / vin_v;
    return std::clamp(duty, c.timing.duty_min, c.timing.duty_max);
}

} // namespace dcmemu
