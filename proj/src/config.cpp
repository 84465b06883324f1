#include "dcmemu/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace dcmemu {

namespace {

struct KeyValue {
    std::string value;
    int line = 0;
};

// Section -> key -> occurrences (repeatable keys keep every occurrence).
using Sections = std::map<std::string, std::map<std::string, std::vector<KeyValue>>>;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::string strip_comment(const std::string& line) {
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '#' || line[i] == ';') return line.substr(0, i);
    }
    return line;
}

Sections tokenize(const std::string& text, const std::string& origin) {
    Sections sections;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        auto at = [&](std::size_t col) {
            return origin + ":" + std::to_string(line_no) + ":" + std::to_string(col + 1);
        };
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw validation_error(at(line.size()) + ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) {
                throw validation_error(at(1) + ": empty section name");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw validation_error(at(0) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw validation_error(at(0) + ": empty key");
        }
        sections[section][key].push_back(KeyValue{value, line_no});
    }
    return sections;
}

double parse_double(const std::string& value, const std::string& where) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || !trim(end).empty() || errno == ERANGE) {
        throw validation_error(where + ": '" + value + "' is not a number");
    }
    return v;
}

std::int64_t parse_int(const std::string& value, const std::string& where) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (end == value.c_str() || !trim(end).empty() || errno == ERANGE) {
        throw validation_error(where + ": '" + value + "' is not an integer");
    }
    return v;
}

// Pulls typed values out of one section and complains about leftovers.
class SectionReader {
  public:
    SectionReader(Sections& sections, std::string name, const std::string& origin)
        : name_(std::move(name)), origin_(origin) {
        if (auto it = sections.find(name_); it != sections.end()) {
            keys_ = std::move(it->second);
            sections.erase(it);
        }
    }

    bool has(const std::string& key) const { return keys_.count(key) > 0; }

    std::optional<double> number(const std::string& key) {
        auto v = take(key);
        if (!v) return std::nullopt;
        return parse_double(*v, where(key));
    }

    std::optional<std::int64_t> integer(const std::string& key) {
        auto v = take(key);
        if (!v) return std::nullopt;
        return parse_int(*v, where(key));
    }

    std::optional<std::string> word(const std::string& key) { return take(key); }

    std::vector<std::string> all(const std::string& key) {
        std::vector<std::string> out;
        if (auto it = keys_.find(key); it != keys_.end()) {
            for (const auto& kv : it->second) out.push_back(kv.value);
            keys_.erase(it);
        }
        return out;
    }

    void finish() const {
        if (!keys_.empty()) {
            throw validation_error(where(keys_.begin()->first) + ": unknown key");
        }
    }

    std::string where(const std::string& key) const {
        return origin_ + ": [" + name_ + "] " + key;
    }

  private:
    std::optional<std::string> take(const std::string& key) {
        auto it = keys_.find(key);
        if (it == keys_.end()) return std::nullopt;
        if (it->second.size() > 1) {
            throw validation_error(where(key) + ": key given more than once");
        }
        std::string value = it->second.front().value;
        keys_.erase(it);
        return value;
    }

    std::string name_;
    const std::string& origin_;
    std::map<std::string, std::vector<KeyValue>> keys_;
};

ScenarioMode parse_mode(const std::string& word, const std::string& where) {
    if (word == "open-loop") return ScenarioMode::open_loop;
    if (word == "closed-loop") return ScenarioMode::closed_loop;
    if (word == "fault") return ScenarioMode::fault;
    if (word == "diagnose") return ScenarioMode::diagnose;
    throw validation_error(where + ": unknown mode '" + word +
                           "' (expected open-loop, closed-loop, fault or diagnose)");
}

const char* mode_name(ScenarioMode m) {
    switch (m) {
        case ScenarioMode::open_loop: return "open-loop";
        case ScenarioMode::closed_loop: return "closed-loop";
        case ScenarioMode::fault: return "fault";
        case ScenarioMode::diagnose: return "diagnose";
    }
    return "?";
}

} // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& origin) {
    Sections sections = tokenize(text, origin);
    ScenarioConfig cfg;

    {
        SectionReader sec(sections, "scenario", origin);
        if (auto mode = sec.word("mode")) cfg.mode = parse_mode(*mode, sec.where("mode"));
        if (auto h = sec.integer("horizon_ns")) {
            cfg.horizon_ns = *h;
        } else if (cfg.mode == ScenarioMode::open_loop) {
            cfg.horizon_ns = 60'000'000;
        }
        sec.finish();
    }

    {
        SectionReader sec(sections, "plant", origin);
        const bool has_coeffs = sec.has("a") || sec.has("b") || sec.has("g") || sec.has("l") ||
                                sec.has("m") || sec.has("n");
        const bool has_params = sec.has("rm_ohm") || sec.has("lm_h") || sec.has("j_kgm2") ||
                                sec.has("km") || sec.has("k1") || sec.has("k2") || sec.has("k3") ||
                                sec.has("method");
        if (has_coeffs && has_params) {
            throw validation_error(origin +
                                   ": [plant] gives both coefficients and machine parameters; "
                                   "exactly one source is allowed");
        }
        if (auto v = sec.number("vin_v")) cfg.vin_v = *v;
        if (auto v = sec.integer("step_ns")) cfg.step_ns = *v;

        if (has_coeffs) {
            PlantCoefficients c;
            auto need = [&](const char* key) {
                auto v = sec.number(key);
                if (!v) {
                    throw validation_error(sec.where(key) +
                                           ": missing (a coefficient source needs all six)");
                }
                return *v;
            };
            c.a_c = need("a");
            c.b_c = need("b");
            c.g_c = need("g");
            c.l_c = need("l");
            c.m_c = need("m");
            c.n_c = need("n");
            c.vin_v = cfg.vin_v;
            c.step_ns = cfg.step_ns;
            cfg.coefficients = c;
        } else if (has_params) {
            MachineParameters p;
            auto need = [&](const char* key) {
                auto v = sec.number(key);
                if (!v) {
                    throw validation_error(sec.where(key) +
                                           ": missing (a parameter source needs rm_ohm, lm_h, "
                                           "j_kgm2 and km)");
                }
                return *v;
            };
            p.rm_ohm = need("rm_ohm");
            p.lm_h = need("lm_h");
            p.j_kgm2 = need("j_kgm2");
            p.km = need("km");
            p.k1 = sec.number("k1").value_or(0.0);
            p.k2 = sec.number("k2").value_or(0.0);
            p.k3 = sec.number("k3").value_or(0.0);
            p.vin_v = cfg.vin_v;
            cfg.parameters = p;
            cfg.method = DiscretizationMethod::euler;
            if (auto m = sec.word("method")) {
                if (*m == "euler") {
                    cfg.method = DiscretizationMethod::euler;
                } else if (*m == "rk2") {
                    cfg.method = DiscretizationMethod::rk2;
                } else {
                    throw validation_error(sec.where("method") + ": expected 'euler' or 'rk2'");
                }
            }
        }
        sec.finish();
    }

    {
        SectionReader sec(sections, "pwm", origin);
        if (auto v = sec.number("frequency_hz")) cfg.pwm.frequency_hz = *v;
        if (auto v = sec.integer("resolution")) cfg.pwm.resolution = static_cast<int>(*v);
        if (auto v = sec.word("carrier")) {
            if (*v == "triangle") {
                cfg.pwm.carrier = CarrierShape::triangle;
            } else if (*v == "sawtooth") {
                cfg.pwm.carrier = CarrierShape::sawtooth;
            } else {
                throw validation_error(sec.where("carrier") +
                                       ": expected 'triangle' or 'sawtooth'");
            }
        }
        sec.finish();
    }

    {
        SectionReader sec(sections, "controller", origin);
        if (auto v = sec.number("speed_kp")) cfg.controller.speed.kp = *v;
        if (auto v = sec.number("speed_kpi")) cfg.controller.speed.kpi = *v;
        if (auto v = sec.number("current_kp")) cfg.controller.current.kp = *v;
        if (auto v = sec.number("current_kpi")) cfg.controller.current.kpi = *v;
        sec.finish();
    }

    {
        SectionReader sec(sections, "timing", origin);
        if (auto v = sec.integer("current_period_ns")) cfg.controller.timing.current_period_ns = *v;
        if (auto v = sec.integer("speed_period_ns")) cfg.controller.timing.speed_period_ns = *v;
        if (auto v = sec.number("iref_limit_a")) cfg.controller.timing.iref_limit_a = *v;
        sec.finish();
    }

    {
        SectionReader sec(sections, "stimulus", origin);
        if (auto v = sec.number("duty")) cfg.duty = *v;
        if (auto v = sec.number("speed_ref_rad_s")) cfg.speed_ref_rad_s = *v;
        sec.finish();
    }

    {
        SectionReader sec(sections, "faults", origin);
        for (const auto& value : sec.all("window_ns")) {
            std::istringstream ws(value);
            FaultWindow w;
            if (!(ws >> w.start_ns >> w.duration_ns)) {
                throw validation_error(sec.where("window_ns") +
                                       ": expected '<start_ns> <duration_ns>'");
            }
            std::string rest;
            if (ws >> rest) {
                throw validation_error(sec.where("window_ns") + ": trailing tokens");
            }
            cfg.faults.push_back(w);
        }
        sec.finish();
    }

    {
        SectionReader sec(sections, "recorder", origin);
        if (auto v = sec.integer("period_ns")) cfg.recorder_period_ns = *v;
        sec.finish();
    }

    {
        SectionReader sec(sections, "diagnosis", origin);
        if (auto v = sec.word("threshold_a")) {
            cfg.diagnosis.threshold_a =
                (*v == "auto") ? 0.0 : parse_double(*v, sec.where("threshold_a"));
        }
        if (auto v = sec.number("threshold_multiplier")) cfg.diagnosis.threshold_multiplier = *v;
        if (auto v = sec.integer("debounce_samples")) {
            cfg.diagnosis.debounce_samples = static_cast<int>(*v);
        }
        if (auto v = sec.integer("ripple_window_ns")) cfg.diagnosis.ripple_window_ns = *v;
        if (auto v = sec.number("speed_cap_rad_s")) cfg.diagnosis.speed_cap_rad_s = *v;
        sec.finish();
    }

    if (!sections.empty()) {
        throw validation_error(origin + ": unknown section [" + sections.begin()->first + "]");
    }

    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw io_error("cannot open config file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

PlantCoefficients ScenarioConfig::plant() const {
    if (coefficients) return *coefficients;
    if (parameters) {
        return method == DiscretizationMethod::rk2
                   ? derive_coefficients_rk2(*parameters, step_ns)
                   : derive_coefficients_euler(*parameters, step_ns);
    }
    return default_coefficients();
}

void ScenarioConfig::validate() const {
    if (horizon_ns <= 0) throw validation_error("[scenario] horizon_ns: must be > 0");
    if (step_ns <= 0) throw validation_error("[plant] step_ns: must be > 0");
    if (!(vin_v > 0.0)) throw validation_error("[plant] vin_v: must be > 0");
    if (!std::isfinite(duty) || duty < 0.0 || duty > 1.0) {
        throw validation_error("[stimulus] duty: must lie in [0, 1]");
    }
    if (!std::isfinite(speed_ref_rad_s)) {
        throw validation_error("[stimulus] speed_ref_rad_s: must be finite");
    }
    plant().validate();
    pwm.validate();
    controller.validate();
    validate_fault_windows(faults);
    if (recorder_period_ns <= 0) throw validation_error("[recorder] period_ns: must be > 0");
    if (mode == ScenarioMode::fault && faults.empty()) {
        throw validation_error("[faults]: fault mode needs at least one window_ns entry");
    }
    if (!faults.empty() &&
        (mode == ScenarioMode::open_loop || mode == ScenarioMode::closed_loop)) {
        throw validation_error(std::string("[faults]: windows are not applied in ") +
                               mode_name(mode) + " mode; use mode = fault or diagnose");
    }
    if (diagnosis.threshold_a < 0.0 || !std::isfinite(diagnosis.threshold_a)) {
        throw validation_error("[diagnosis] threshold_a: must be >= 0 (0 selects auto)");
    }
    if (!(diagnosis.threshold_multiplier > 0.0)) {
        throw validation_error("[diagnosis] threshold_multiplier: must be > 0");
    }
    if (diagnosis.debounce_samples < 1) {
        throw validation_error("[diagnosis] debounce_samples: must be >= 1");
    }
    if (diagnosis.ripple_window_ns <= 0) {
        throw validation_error("[diagnosis] ripple_window_ns: must be > 0");
    }
    if (!(diagnosis.speed_cap_rad_s > 0.0)) {
        throw validation_error("[diagnosis] speed_cap_rad_s: must be > 0");
    }
}

std::string config_to_text(const ScenarioConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "[scenario]\n";
    out << "mode = " << mode_name(cfg.mode) << "\n";
    out << "horizon_ns = " << cfg.horizon_ns << "\n\n";

    out << "[plant]\n";
    out << "vin_v = " << cfg.vin_v << "\n";
    out << "step_ns = " << cfg.step_ns << "\n";
    if (cfg.coefficients) {
        const auto& c = *cfg.coefficients;
        out << "a = " << c.a_c << "\nb = " << c.b_c << "\ng = " << c.g_c << "\nl = " << c.l_c
            << "\nm = " << c.m_c << "\nn = " << c.n_c << "\n";
    } else if (cfg.parameters) {
        const auto& p = *cfg.parameters;
        out << "rm_ohm = " << p.rm_ohm << "\nlm_h = " << p.lm_h << "\nj_kgm2 = " << p.j_kgm2
            << "\nkm = " << p.km << "\nk1 = " << p.k1 << "\nk2 = " << p.k2 << "\nk3 = " << p.k3
            << "\n";
        out << "method = "
            << (cfg.method == DiscretizationMethod::rk2 ? "rk2" : "euler") << "\n";
    }
    out << "\n[pwm]\n";
    out << "frequency_hz = " << cfg.pwm.frequency_hz << "\n";
    out << "carrier = " << (cfg.pwm.carrier == CarrierShape::triangle ? "triangle" : "sawtooth")
        << "\n";
    out << "resolution = " << cfg.pwm.resolution << "\n";

    out << "\n[controller]\n";
    out << "speed_kp = " << cfg.controller.speed.kp << "\n";
    out << "speed_kpi = " << cfg.controller.speed.kpi << "\n";
    out << "current_kp = " << cfg.controller.current.kp << "\n";
    out << "current_kpi = " << cfg.controller.current.kpi << "\n";

    out << "\n[timing]\n";
    out << "current_period_ns = " << cfg.controller.timing.current_period_ns << "\n";
    out << "speed_period_ns = " << cfg.controller.timing.speed_period_ns << "\n";
    out << "iref_limit_a = " << cfg.controller.timing.iref_limit_a << "\n";

    out << "\n[stimulus]\n";
    out << "duty = " << cfg.duty << "\n";
    out << "speed_ref_rad_s = " << cfg.speed_ref_rad_s << "\n";

    if (!cfg.faults.empty()) {
        out << "\n[faults]\n";
        for (const auto& w : cfg.faults) {
            out << "window_ns = " << w.start_ns << " " << w.duration_ns << "\n";
        }
    }

    out << "\n[recorder]\n";
    out << "period_ns = " << cfg.recorder_period_ns << "\n";

    out << "\n[diagnosis]\n";
    if (cfg.diagnosis.threshold_a == 0.0) {
        out << "threshold_a = auto\n";
    } else {
        out << "threshold_a = " << cfg.diagnosis.threshold_a << "\n";
    }
    out << "threshold_multiplier = " << cfg.diagnosis.threshold_multiplier << "\n";
    out << "debounce_samples = " << cfg.diagnosis.debounce_samples << "\n";
    out << "ripple_window_ns = " << cfg.diagnosis.ripple_window_ns << "\n";
    out << "speed_cap_rad_s = " << cfg.diagnosis.speed_cap_rad_s << "\n";
    return out.str();
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    return a.mode == b.mode && a.horizon_ns == b.horizon_ns && a.coefficients == b.coefficients &&
           a.parameters == b.parameters && a.method == b.method && a.vin_v == b.vin_v &&
           a.step_ns == b.step_ns && a.pwm == b.pwm && a.controller == b.controller &&
           a.duty == b.duty && a.speed_ref_rad_s == b.speed_ref_rad_s && a.faults == b.faults &&
           a.recorder_period_ns == b.recorder_period_ns && a.diagnosis == b.diagnosis;
}

} // namespace dcmemu
