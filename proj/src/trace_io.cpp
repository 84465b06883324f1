#include "dcmemu/trace_io.hpp"

#include <cstdio>
#include <fstream>

namespace dcmemu {

namespace {

void append_number(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

} // namespace

std::string trace_to_csv(const Trace& trace) {
    if (trace.records.empty()) {
        throw validation_error("trace_to_csv: trace is empty");
    }
    std::string out = "t_ns,duty,vh,im,wm,fault\n";
    out.reserve(out.size() + trace.records.size() * 80);
    std::int64_t prev_t = -1;
    for (const auto& r : trace.records) {
        if (r.t_ns <= prev_t) {
            throw validation_error("trace_to_csv: timestamps not strictly increasing");
        }
        prev_t = r.t_ns;
        out += std::to_string(r.t_ns);
        out += ',';
        append_number(out, r.duty);
        out += ',';
        append_number(out, r.vh_v);
        out += ',';
        append_number(out, r.im_a);
        out += ',';
        append_number(out, r.wm_rad_s);
        out += ',';
        out += r.fault_active ? '1' : '0';
        out += '\n';
    }
    return out;
}

void write_text_file(const std::string& text, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw io_error("cannot open for writing: " + path.string());
    }
    out << text;
    out.flush();
    if (!out) {
        throw io_error("write failed: " + path.string());
    }
}

void write_trace_csv(const Trace& trace, const std::filesystem::path& path) {
    write_text_file(trace_to_csv(trace), path);
}

std::string report_to_text(const DetectionReport& report) {
    std::string out;
    out += "detected = ";
    out += report.detected ? "true" : "false";
    out += "\ndetection_time_ns = " + std::to_string(report.detection_time_ns);
    out += "\nlatency_ns = " + std::to_string(report.latency_ns);
    out += "\npeak_residual_a = ";
    append_number(out, report.peak_residual_a);
    out += '\n';
    return out;
}

void write_report(const DetectionReport& report, const std::filesystem::path& path) {
    write_text_file(report_to_text(report), path);
}

std::string gnuplot_trace_script(const std::filesystem::path& csv_path) {
    std::string csv = csv_path.filename().string();
    std::string out;
    out += "set datafile separator ','\n";
    out += "set key left\n";
    out += "set multiplot layout 2,1\n";
    out += "set xlabel 't [s]'\n";
    out += "set ylabel 'speed [rad/s]'\n";
    out += "plot '" + csv + "' using ($1*1e-9):5 with lines title 'wm'\n";
    out += "set ylabel 'current [A]'\n";
    out += "plot '" + csv + "' using ($1*1e-9):4 with lines title 'im'\n";
    out += "unset multiplot\n";
    out += "pause -1\n";
    return out;
}

std::string gnuplot_compare_script(const std::filesystem::path& real_csv,
                                   const std::filesystem::path& emulator_csv) {
    std::string real = real_csv.filename().string();
    std::string emu = emulator_csv.filename().string();
    std::string out;
    out += "set datafile separator ','\n";
    out += "set key left\n";
    out += "set xlabel 't [s]'\n";
    out += "set ylabel 'current [A]'\n";
    out += "plot '" + real + "' using ($1*1e-9):4 with lines title 'faulted', \\\n";
    out += "     '" + emu + "' using ($1*1e-9):4 with lines title 'reference'\n";
    out += "pause -1\n";
    return out;
}

} // namespace dcmemu
