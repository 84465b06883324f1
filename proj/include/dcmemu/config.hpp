#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dcmemu/control.hpp"
#include "dcmemu/diagnosis.hpp"
#include "dcmemu/motor_model.hpp"
#include "dcmemu/pwm.hpp"
#include "dcmemu/sim_engine.hpp"

namespace dcmemu {

enum class ScenarioMode { open_loop, closed_loop, fault, diagnose };

enum class DiscretizationMethod { euler, rk2 };

struct DiagnosisConfig {
    double threshold_a = 0.0;  ///< explicit residual threshold; 0 selects auto calibration
    double threshold_multiplier = 0.25;
    int debounce_samples = 3;
    std::int64_t ripple_window_ns = 100'000'000;
    double speed_cap_rad_s = 200.0;

    friend bool operator==(const DiagnosisConfig&, const DiagnosisConfig&) = default;
};

/// One scenario as read from a sectioned key-value file. The plant comes from
/// exactly one source: a coefficient set, or machine parameters plus a
/// discretization method; with neither, the shipped defaults apply.
struct ScenarioConfig {
    ScenarioMode mode = ScenarioMode::closed_loop;
    std::int64_t horizon_ns = 1'500'000'000;

    std::optional<PlantCoefficients> coefficients;
    std::optional<MachineParameters> parameters;
    std::optional<DiscretizationMethod> method;
    double vin_v = 60.0;
    std::int64_t step_ns = 1000;

    PwmConfig pwm;
    ControllerConfig controller;

    double duty = 0.7;
    double speed_ref_rad_s = 100.0;

    std::vector<FaultWindow> faults;
    std::int64_t recorder_period_ns = 15'000;
    DiagnosisConfig diagnosis;

    /// The coefficient set the engine will run, resolved from whichever
    /// source the config carries.
    PlantCoefficients plant() const;

    void validate() const;
};

/// Parses and validates a scenario file. Parse failures report the line
/// number; validation failures name the offending key.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Same grammar, from memory.
ScenarioConfig parse_config(const std::string& text, const std::string& origin = "<string>");

/// Canonical text form; parse_config(config_to_text(c)) == c.
std::string config_to_text(const ScenarioConfig& cfg);

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);

} // namespace dcmemu
