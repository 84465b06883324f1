#include "dcmemu/diagnosis.hpp"

#include <algorithm>
#include <cmath>

namespace dcmemu {

std::pair<ResidualSeries, DetectionReport> compare_traces(
    const Trace& real, const Trace& emulator, double threshold_a, int debounce_samples,
    std::optional<std::int64_t> fault_onset_ns) {
    if (!(threshold_a > 0.0)) {
        throw validation_error("compare_traces: threshold_a must be > 0");
    }
    if (debounce_samples < 1) {
        throw validation_error("compare_traces: debounce_samples must be >= 1");
    }
    if (real.records.size() != emulator.records.size()) {
        throw validation_error("compare_traces: trace lengths differ");
    }
    for (std::size_t i = 0; i < real.records.size(); ++i) {
        if (real.records[i].t_ns != emulator.records[i].t_ns) {
            throw validation_error("compare_traces: trace timestamps are not aligned");
        }
    }

    ResidualSeries series;
    series.t_ns.reserve(real.records.size());
    series.residual_a.reserve(real.records.size());

    DetectionReport report;
    int consecutive = 0;
    for (std::size_t i = 0; i < real.records.size(); ++i) {
        const double residual = std::abs(real.records[i].im_a - emulator.records[i].im_a);
        series.t_ns.push_back(real.records[i].t_ns);
        series.residual_a.push_back(residual);
        report.peak_residual_a = std::max(report.peak_residual_a, residual);

        if (residual >= threshold_a) {
            ++consecutive;
            if (!report.detected && consecutive >= debounce_samples) {
                report.detected = true;
                report.detection_time_ns =
                    series.t_ns[i - static_cast<std::size_t>(debounce_samples) + 1];
            }
        } else {
            consecutive = 0;
        }
    }
    if (report.detected && fault_onset_ns) {
        report.latency_ns = report.detection_time_ns - *fault_onset_ns;
    }
    return {std::move(series), report};
}

double ripple_threshold(const Trace& nominal, std::int64_t window_start_ns,
                        std::int64_t window_end_ns, double multiplier) {
    if (!(multiplier > 0.0)) throw validation_error("ripple_threshold: multiplier must be > 0");
    if (window_start_ns >= window_end_ns) {
        throw validation_error("ripple_threshold: empty calibration window");
    }
    double sum = 0.0;
    std::int64_t count = 0;
    for (const auto& r : nominal.records) {
        if (r.t_ns >= window_start_ns && r.t_ns < window_end_ns) {
            sum += r.im_a;
            ++count;
        }
    }
    if (count == 0) {
        throw validation_error("ripple_threshold: no samples in calibration window");
    }
    const double mean = sum / static_cast<double>(count);
    double amplitude = 0.0;
    for (const auto& r : nominal.records) {
        if (r.t_ns >= window_start_ns && r.t_ns < window_end_ns) {
            amplitude = std::max(amplitude, std::abs(r.im_a - mean));
        }
    }
    // A perfectly quiet reference would otherwise yield threshold 0, which
    // the >= comparison would read as a standing detection.
    return std::max(multiplier * amplitude, 1e-9);
}

} // namespace dcmemu
