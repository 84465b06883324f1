#pragma once

#include <filesystem>
#include <string>

#include "dcmemu/diagnosis.hpp"
#include "dcmemu/sim_engine.hpp"

namespace dcmemu {

/// CSV rendering of a trace: header `t_ns,duty,vh,im,wm,fault`, one row per
/// record, floating-point fields at 17 significant digits so identical runs
/// serialize byte-identically.
std::string trace_to_csv(const Trace& trace);

void write_trace_csv(const Trace& trace, const std::filesystem::path& path);

/// Flat key-value rendering of a detection report.
std::string report_to_text(const DetectionReport& report);

void write_report(const DetectionReport& report, const std::filesystem::path& path);

/// gnuplot script plotting speed and current from one trace CSV.
std::string gnuplot_trace_script(const std::filesystem::path& csv_path);

/// gnuplot script overlaying the current channels of two trace CSVs.
std::string gnuplot_compare_script(const std::filesystem::path& real_csv,
                                   const std::filesystem::path& emulator_csv);

void write_text_file(const std::string& text, const std::filesystem::path& path);

} // namespace dcmemu
