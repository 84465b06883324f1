#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "dcmemu/errors.hpp"

namespace dcmemu {

/// Complementary chopper command pair. Fault-free operation keeps c1 == !c0;
/// (0,0) and (1,1) only appear under fault gating and decode to 0 V.
struct SwitchPair {
    bool c0 = false;
    bool c1 = false;

    friend bool operator==(const SwitchPair&, const SwitchPair&) = default;
};

enum class CarrierShape { triangle, sawtooth };

struct PwmConfig {
    double frequency_hz = 16000.0;
    CarrierShape carrier = CarrierShape::triangle;
    int resolution = 625;  ///< duty quantization levels per period

    std::int64_t period_ns() const;
    void validate() const;

    friend bool operator==(const PwmConfig&, const PwmConfig&) = default;
};

/// Snap a duty command to the nearest of the config's resolution levels, the
/// way a hardware compare register would.
double quantize_duty(const PwmConfig& cfg, double duty);

/// Switch state at absolute time t. Triangle carrier compares "c0 high while
/// carrier < duty" with the carrier peaking at period boundaries, which
/// centers the on-pulse; sawtooth puts it at the period start. Implemented as
/// an integer-nanosecond on-window so the waveform is exact and periodic.
SwitchPair pwm_sample(const PwmConfig& cfg, double duty, std::int64_t t_ns);

/// Chopper decode: (1,0) -> +vin, (0,1) -> -vin, both-off/both-on -> 0.
inline double decode_chopper(const SwitchPair& sw, double vin_v) {
    if (!std::isfinite(vin_v) || vin_v <= 0.0) {
        throw std::domain_error("decode_chopper: vin must be positive");
    }
    if (sw.c0 && !sw.c1) return vin_v;
    if (!sw.c0 && sw.c1) return -vin_v;
    return 0.0;
}

} // namespace dcmemu
