#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dcmemu/motor_model.hpp"
#include "dcmemu/pwm.hpp"

using namespace dcmemu;

namespace {

std::int64_t high_ns_per_period(const PwmConfig& cfg, double duty) {
    std::int64_t count = 0;
    for (std::int64_t t = 0; t < cfg.period_ns(); ++t) {
        if (pwm_sample(cfg, duty, t).c0) ++count;
    }
    return count;
}

double mean_decoded_voltage(const PwmConfig& cfg, double duty, double vin) {
    double sum = 0.0;
    for (std::int64_t t = 0; t < cfg.period_ns(); ++t) {
        sum += decode_chopper(pwm_sample(cfg, duty, t), vin);
    }
    return sum / static_cast<double>(cfg.period_ns());
}

} // namespace

TEST_CASE("decode_chopper truth table") {
    CHECK(decode_chopper(SwitchPair{true, false}, 60.0) == 60.0);
    CHECK(decode_chopper(SwitchPair{false, true}, 60.0) == -60.0);
    CHECK(decode_chopper(SwitchPair{false, false}, 60.0) == 0.0);
    CHECK(decode_chopper(SwitchPair{true, true}, 60.0) == 0.0);
    CHECK_THROWS_AS(decode_chopper(SwitchPair{true, false}, 0.0), std::domain_error);
}

TEST_CASE("pwm_sample at the duty extremes") {
    const PwmConfig cfg;
    for (std::int64_t t : {0LL, 1LL, 31249LL, 31250LL, 62499LL, 1'000'037LL}) {
        CHECK(pwm_sample(cfg, 1.0, t) == SwitchPair{true, false});
        CHECK(pwm_sample(cfg, 0.0, t) == SwitchPair{false, true});
    }
}

TEST_CASE("triangle comparator: duty 0.5 is high exactly half the period") {
    CHECK(high_ns_per_period(PwmConfig{}, 0.5) == 31250);
}

TEST_CASE("triangle comparator: duty 0.7 is high 43750 ns of each 62500 ns period") {
    CHECK(high_ns_per_period(PwmConfig{}, 0.7) == 43750);
}

TEST_CASE("triangle pulse is centered in the period") {
    const PwmConfig cfg;
    // duty 0.5: on-window should be [15625, 46875)
    CHECK_FALSE(pwm_sample(cfg, 0.5, 15624).c0);
    CHECK(pwm_sample(cfg, 0.5, 15625).c0);
    CHECK(pwm_sample(cfg, 0.5, 46874).c0);
    CHECK_FALSE(pwm_sample(cfg, 0.5, 46875).c0);
}

TEST_CASE("sawtooth puts the pulse at the period start") {
    PwmConfig cfg;
    cfg.carrier = CarrierShape::sawtooth;
    CHECK(pwm_sample(cfg, 0.25, 0).c0);
    CHECK(pwm_sample(cfg, 0.25, 15624).c0);
    CHECK_FALSE(pwm_sample(cfg, 0.25, 15625).c0);
    CHECK(high_ns_per_period(cfg, 0.25) == 15625);
}

TEST_CASE("quantize_duty mirrors a compare register") {
    const PwmConfig cfg;  // resolution 625
    CHECK(quantize_duty(cfg, 0.0) == 0.0);
    CHECK(quantize_duty(cfg, 1.0) == 1.0);
    CHECK(quantize_duty(cfg, 0.5) == 313.0 / 625.0);  // 312.5 rounds away from zero
    // 0.7*625 rounds to exactly 437.5 in binary, then away from zero
    CHECK(quantize_duty(cfg, 0.7) == 438.0 / 625.0);
    CHECK(quantize_duty(cfg, 437.0 / 625.0) == 437.0 / 625.0);
    CHECK_THROWS_AS(quantize_duty(cfg, -0.1), std::domain_error);
    CHECK_THROWS_AS(quantize_duty(cfg, 1.1), std::domain_error);
}

TEST_CASE("pwm_sample rejects bad duties") {
    const PwmConfig cfg;
    CHECK_THROWS_AS(pwm_sample(cfg, -0.01, 0), std::domain_error);
    CHECK_THROWS_AS(pwm_sample(cfg, 1.01, 0), std::domain_error);
    CHECK_THROWS_AS(pwm_sample(cfg, std::nan(""), 0), std::domain_error);
}

TEST_CASE("averaging equivalence: PWM mean matches the direct chopper law") {
    const PwmConfig cfg;
    const double vin = 60.0;
    const double bound = vin / cfg.resolution + 1e-9;

    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> duties = {0.0, 0.25, 0.5, 0.7, 1.0};
    for (int i = 0; i < 25; ++i) duties.push_back(dist(rng));

    for (double d : duties) {
        const double mean = mean_decoded_voltage(cfg, quantize_duty(cfg, d), vin);
        const double ideal = chopper_voltage(d, vin);
        CHECK(std::abs(mean - ideal) <= bound);
    }

    // without the compare-register quantization the only error left is the
    // nanosecond rounding of the on-window
    for (double d : duties) {
        const double mean = mean_decoded_voltage(cfg, d, vin);
        CHECK(std::abs(mean - chopper_voltage(d, vin)) <= 2.0 * vin / cfg.period_ns() + 1e-9);
    }
}

TEST_CASE("complementarity: the pair always decodes to a rail without fault gating") {
    const PwmConfig cfg;
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> dd(0.0, 1.0);
    std::uniform_int_distribution<std::int64_t> dt(0, 10'000'000);
    for (int i = 0; i < 2000; ++i) {
        const auto sw = pwm_sample(cfg, dd(rng), dt(rng));
        CHECK(sw.c1 == !sw.c0);
        CHECK(std::abs(decode_chopper(sw, 60.0)) == 60.0);
    }
}

TEST_CASE("waveform is exactly periodic") {
    const PwmConfig cfg;
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> dd(0.0, 1.0);
    std::uniform_int_distribution<std::int64_t> dt(0, 62499), dk(1, 2000);
    for (int i = 0; i < 2000; ++i) {
        const double d = dd(rng);
        const std::int64_t t = dt(rng);
        CHECK(pwm_sample(cfg, d, t) == pwm_sample(cfg, d, t + dk(rng) * 62500));
    }
}

TEST_CASE("pwm config validation") {
    PwmConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.period_ns() == 62500);

    cfg.frequency_hz = 0.0;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg.frequency_hz = -16000.0;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg.frequency_hz = 3.0;  // period 333333333.3 ns
    CHECK_THROWS_AS(cfg.validate(), validation_error);

    cfg = PwmConfig{};
    cfg.resolution = 1;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg.resolution = 624;  // does not divide 62500
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg.resolution = 1250;
    CHECK_NOTHROW(cfg.validate());
}
