#pragma once

#include "dcmemu/config.hpp"
#include "dcmemu/diagnosis.hpp"
#include "dcmemu/sim_engine.hpp"

namespace dcmemu {

/// Executes a run-type scenario (open-loop, closed-loop or fault).
RunResult run_scenario(const ScenarioConfig& cfg);

struct DiagnosisOutcome {
    RunResult real;      ///< the faulted "process under test" run
    RunResult emulator;  ///< the clean reference twin
    double threshold_a = 0.0;
    ResidualSeries residual;
    DetectionReport report;
};

/// Runs the faulted process and its clean emulator twin, calibrates the
/// residual threshold if the config asks for auto, and compares the current
/// traces. The emulator's speed channel is clamped to the configured cap.
DiagnosisOutcome run_diagnosis(const ScenarioConfig& cfg);

} // namespace dcmemu
