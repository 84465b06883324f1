#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dcmemu/config.hpp"
#include "dcmemu/scenario.hpp"
#include "dcmemu/trace_io.hpp"

namespace {

namespace fs = std::filesystem;
using namespace dcmemu;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitIo = 3;

struct RunOptions {
    std::string config_path;
    std::string out_path;
    bool seedless_check = false;
    bool gnuplot = false;
};

fs::path with_suffix(const fs::path& base, const std::string& suffix, const std::string& ext) {
    fs::path p = base;
    p.replace_extension();
    p += suffix;
    p += ext;
    return p;
}

int cmd_run(const RunOptions& opt) {
    const ScenarioConfig cfg = load_config(opt.config_path);
    if (cfg.mode == ScenarioMode::diagnose) {
        throw validation_error("config mode is diagnose; use the diagnose subcommand");
    }
    const RunResult result = run_scenario(cfg);
    const std::string csv = trace_to_csv(result.trace);
    if (opt.seedless_check) {
        const std::string again = trace_to_csv(run_scenario(cfg).trace);
        if (csv != again) {
            throw numeric_overflow_error("determinism check failed: repeated run differs");
        }
        std::cerr << "determinism check passed: " << result.trace.records.size()
                  << " records byte-identical\n";
    }
    write_text_file(csv, opt.out_path);
    if (opt.gnuplot) {
        write_text_file(gnuplot_trace_script(opt.out_path),
                        with_suffix(opt.out_path, "", ".gp"));
    }
    return 0;
}

int cmd_diagnose(const RunOptions& opt) {
    const ScenarioConfig cfg = load_config(opt.config_path);
    const DiagnosisOutcome outcome = run_diagnosis(cfg);
    const std::string report = report_to_text(outcome.report);
    if (opt.seedless_check) {
        const DiagnosisOutcome again = run_diagnosis(cfg);
        if (report != report_to_text(again.report) ||
            trace_to_csv(outcome.real.trace) != trace_to_csv(again.real.trace) ||
            trace_to_csv(outcome.emulator.trace) != trace_to_csv(again.emulator.trace)) {
            throw numeric_overflow_error("determinism check failed: repeated diagnosis differs");
        }
        std::cerr << "determinism check passed\n";
    }
    write_text_file(report, opt.out_path);
    if (opt.gnuplot) {
        const fs::path real_csv = with_suffix(opt.out_path, "_process", ".csv");
        const fs::path emu_csv = with_suffix(opt.out_path, "_emulator", ".csv");
        write_trace_csv(outcome.real.trace, real_csv);
        write_trace_csv(outcome.emulator.trace, emu_csv);
        write_text_file(gnuplot_compare_script(real_csv, emu_csv),
                        with_suffix(opt.out_path, "", ".gp"));
    }
    std::cout << report;
    return 0;
}

void print_coefficients(const PlantCoefficients& c) {
    std::printf("a = %.17g\n", c.a_c);
    std::printf("b = %.17g\n", c.b_c);
    std::printf("g = %.17g\n", c.g_c);
    std::printf("l = %.17g\n", c.l_c);
    std::printf("m = %.17g\n", c.m_c);
    std::printf("n = %.17g\n", c.n_c);
    std::printf("vin_v = %.17g\n", c.vin_v);
    std::printf("step_ns = %lld\n", static_cast<long long>(c.step_ns));
}

int cmd_derive_coeffs(const std::string& config_path) {
    const ScenarioConfig cfg = load_config(config_path);
    if (!cfg.parameters) {
        throw validation_error(
            "derive-coeffs needs a [plant] section with machine parameters and a method");
    }
    print_coefficients(cfg.plant());
    return 0;
}

int cmd_steady_state(const std::string& config_path) {
    const ScenarioConfig cfg = load_config(config_path);
    const PlantCoefficients c = cfg.plant();
    const double vh = chopper_voltage(cfg.duty, c.vin_v);
    const PlantState ss = steady_state(c, vh);
    std::printf("duty = %.17g\n", cfg.duty);
    std::printf("vh_v = %.17g\n", vh);
    std::printf("im_a = %.17g\n", ss.im_a);
    std::printf("wm_rad_s = %.17g\n", ss.wm_rad_s);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chopper-fed DC machine emulator: deterministic fixed-step scenarios,\n"
                 "fault injection and residual diagnosis"};
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "execute a scenario and write its trace CSV");
    run->add_option("--config", run_opt.config_path, "scenario file")->required();
    run->add_option("--out", run_opt.out_path, "output CSV path")->required();
    run->add_flag("--seedless-check", run_opt.seedless_check,
                  "run twice and require byte-identical traces");
    run->add_flag("--gnuplot", run_opt.gnuplot, "also write a companion plot script");

    RunOptions diag_opt;
    auto* diagnose =
        app.add_subcommand("diagnose", "run a faulted process against its clean twin");
    diagnose->add_option("--config", diag_opt.config_path, "scenario file (mode = diagnose)")
        ->required();
    diagnose->add_option("--out", diag_opt.out_path, "output report path")->required();
    diagnose->add_flag("--seedless-check", diag_opt.seedless_check,
                       "run twice and require identical traces and report");
    diagnose->add_flag("--gnuplot", diag_opt.gnuplot,
                       "also write both trace CSVs and a comparison plot script");

    std::string derive_config;
    auto* derive = app.add_subcommand("derive-coeffs",
                                      "print the discrete update coefficients for the "
                                      "configured machine parameters");
    derive->add_option("--config", derive_config, "scenario file with a parameter plant")
        ->required();

    std::string steady_config;
    auto* steady =
        app.add_subcommand("steady-state", "print the analytic fixed point for the configured "
                                           "plant and duty");
    steady->add_option("--config", steady_config, "scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
        return kExitValidation;
    }

    try {
        if (run->parsed()) return cmd_run(run_opt);
        if (diagnose->parsed()) return cmd_diagnose(diag_opt);
        if (derive->parsed()) return cmd_derive_coeffs(derive_config);
        if (steady->parsed()) return cmd_steady_state(steady_config);
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const numeric_overflow_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitValidation;
}
