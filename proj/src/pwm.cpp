#include "dcmemu/pwm.hpp"

namespace dcmemu {

std::int64_t PwmConfig::period_ns() const {
    return static_cast<std::int64_t>(1e9 / frequency_hz);
}

void PwmConfig::validate() const {
    if (!std::isfinite(frequency_hz) || frequency_hz <= 0.0) {
        throw validation_error("PwmConfig: frequency_hz must be > 0");
    }
    const double period = 1e9 / frequency_hz;
    if (period < 1.0 || period != std::floor(period)) {
        throw validation_error("PwmConfig: period must be a whole number of nanoseconds");
    }
    if (resolution < 2) {
        throw validation_error("PwmConfig: resolution must be >= 2");
    }
    if (static_cast<std::int64_t>(period) % resolution != 0) {
        throw validation_error("PwmConfig: resolution must divide the period evenly");
    }
}

double quantize_duty(const PwmConfig& cfg, double duty) {
    if (!std::isfinite(duty) || duty < 0.0 || duty > 1.0) {
        throw std::domain_error("quantize_duty: duty outside [0, 1]");
    }
    const auto level = static_cast<double>(std::llround(duty * cfg.resolution));
    return level / cfg.resolution;
}

SwitchPair pwm_sample(const PwmConfig& cfg, double duty, std::int64_t t_ns) {
    if (!std::isfinite(duty) || duty < 0.0 || duty > 1.0) {
        throw std::domain_error("pwm_sample: duty outside [0, 1]");
    }
    const std::int64_t period = cfg.period_ns();
    std::int64_t phase = t_ns % period;
    if (phase < 0) phase += period;

    const std::int64_t on_ns = std::llround(duty * static_cast<double>(period));
    bool on;
    if (cfg.carrier == CarrierShape::triangle) {
        const std::int64_t lo = (period - on_ns) / 2;
        on = phase >= lo && phase < lo + on_ns;
    } else {
        on = phase < on_ns;
    }
    return SwitchPair{on, !on};
}

} // namespace dcmemu
