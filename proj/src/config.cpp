#include <selfsense/config.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace selfsense {

namespace {

namespace pt = boost::property_tree;

std::string join_problems(const std::vector<std::string>& problems)
{
    std::string msg = "invalid configuration";
    for (const auto& p : problems)
        msg += "\n  " + p;
    return msg;
}

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& text)
{
    const std::string s = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument("expected a number, got '" + text + "'");
    return value;
}

template <typename Int = long long>
Int parse_integer(const std::string& text)
{
    const std::string s = trim(text);
    Int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument("expected an integer, got '" + text + "'");
    return value;
}

bool parse_bool(const std::string& text)
{
    const std::string s = trim(text);
    if (s == "true" || s == "1" || s == "yes")
        return true;
    if (s == "false" || s == "0" || s == "no")
        return false;
    throw std::invalid_argument("expected true or false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        values.push_back(parse_double(item));
    return values;
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename Container>
std::string fmt_list(const Container& values)
{
    std::string out;
    for (const auto& v : values) {
        if (!out.empty())
            out += ", ";
        out += fmt(static_cast<double>(v));
    }
    return out;
}

template <typename Enum>
Enum parse_enum(const std::string& text, std::initializer_list<Enum> options)
{
    const std::string s = trim(text);
    std::string allowed;
    for (Enum e : options) {
        if (to_string(e) == s)
            return e;
        allowed += (allowed.empty() ? "" : ", ") + to_string(e);
    }
    throw std::invalid_argument("expected one of {" + allowed + "}, got '" + text + "'");
}

struct Field {
    std::string section;
    std::string key;
    std::function<void(SystemConfig&, const std::string&)> set;
    std::function<std::string(const SystemConfig&)> get;

    std::string name() const { return section + "." + key; }
};

template <typename Member>
Field number(std::string section, std::string key, Member member)
{
    return {std::move(section), std::move(key),
            [member](SystemConfig& c, const std::string& v) { member(c) = parse_double(v); },
            [member](const SystemConfig& c) { return fmt(member(c)); }};
}

template <typename Member>
Field flag(std::string section, std::string key, Member member)
{
    return {std::move(section), std::move(key),
            [member](SystemConfig& c, const std::string& v) { member(c) = parse_bool(v); },
            [member](const SystemConfig& c) {
                return std::string(member(c) ? "true" : "false");
            }};
}

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        // [motor]
        f.push_back(number("motor", "turns_N", [](auto& c) -> auto& { return c.motor.turns_N; }));
        f.push_back(number("motor", "tooth_area_A", [](auto& c) -> auto& { return c.motor.tooth_area_A; }));
        f.push_back(number("motor", "mu0", [](auto& c) -> auto& { return c.motor.mu0; }));
        f.push_back(number("motor", "nominal_gap_g0", [](auto& c) -> auto& { return c.motor.nominal_gap_g0; }));
        f.push_back(number("motor", "coil_resistance_R", [](auto& c) -> auto& { return c.motor.coil_resistance_R; }));
        f.push_back(number("motor", "rotor_mass", [](auto& c) -> auto& { return c.motor.rotor_mass; }));
        f.push_back(number("motor", "rotor_weight_bias", [](auto& c) -> auto& { return c.motor.rotor_weight_bias; }));
        f.push_back(number("motor", "max_displacement_fraction",
                           [](auto& c) -> auto& { return c.motor.max_displacement_fraction; }));

        // [injection]
        f.push_back(number("injection", "amplitude_Is", [](auto& c) -> auto& { return c.injection.amplitude_Is; }));
        f.push_back(number("injection", "frequency_fs", [](auto& c) -> auto& { return c.injection.frequency_fs; }));
        f.push_back({"injection", "injected_coils",
                     [](SystemConfig& c, const std::string& v) {
                         c.injection.injected_coils.clear();
                         for (double d : parse_list(v)) {
                             if (d != std::floor(d))
                                 throw std::invalid_argument("coil numbers must be integers");
                             c.injection.injected_coils.push_back(static_cast<int>(d));
                         }
                     },
                     [](const SystemConfig& c) { return fmt_list(c.injection.injected_coils); }});
        f.push_back({"injection", "polarity",
                     [](SystemConfig& c, const std::string& v) { c.injection.polarity = parse_list(v); },
                     [](const SystemConfig& c) { return fmt_list(c.injection.polarity); }});
        f.push_back(number("injection", "demod_phase_offset",
                           [](auto& c) -> auto& { return c.injection.demod_phase_offset; }));

        // [estimator]
        f.push_back({"estimator", "window_periods",
                     [](SystemConfig& c, const std::string& v) {
                         c.estimator.window_periods = static_cast<int>(parse_integer(v));
                     },
                     [](const SystemConfig& c) { return std::to_string(c.estimator.window_periods); }});
        f.push_back(flag("estimator", "auto_calibrate", [](auto& c) -> auto& { return c.estimator.auto_calibrate; }));
        f.push_back(flag("estimator", "command_compensation",
                         [](auto& c) -> auto& { return c.estimator.command_compensation; }));
        f.push_back(number("estimator", "calibration_gain_x", [](auto& c) -> auto& { return c.estimator.x.gain; }));
        f.push_back(number("estimator", "calibration_offset_x", [](auto& c) -> auto& { return c.estimator.x.offset; }));
        f.push_back(number("estimator", "calibration_gain_y", [](auto& c) -> auto& { return c.estimator.y.gain; }));
        f.push_back(number("estimator", "calibration_offset_y", [](auto& c) -> auto& { return c.estimator.y.offset; }));

        // [controller]
        f.push_back(number("controller", "kp", [](auto& c) -> auto& { return c.controller.kp; }));
        f.push_back(number("controller", "ki", [](auto& c) -> auto& { return c.controller.ki; }));
        f.push_back(number("controller", "kd", [](auto& c) -> auto& { return c.controller.kd; }));
        f.push_back(number("controller", "output_limit", [](auto& c) -> auto& { return c.controller.output_limit; }));
        f.push_back(number("controller", "derivative_filter_tau",
                           [](auto& c) -> auto& { return c.controller.derivative_filter_tau; }));

        // [winding]; torque_bias_phase regenerates the pattern, an explicit
        // torque_pattern (applied after it) overrides.
        f.push_back(number("winding", "torque_bias_amplitude",
                           [](auto& c) -> auto& { return c.winding.torque_bias_amplitude; }));
        f.push_back({"winding", "torque_bias_phase",
                     [](SystemConfig& c, const std::string& v) {
                         c.winding.torque_pattern = four_pole_pattern(parse_double(v));
                     },
                     nullptr});
        f.push_back({"winding", "torque_pattern",
                     [](SystemConfig& c, const std::string& v) {
                         const auto values = parse_list(v);
                         if (values.size() != kTeeth)
                             throw std::invalid_argument("expected 12 values");
                         c.winding.torque_pattern = Eigen::Map<const CoilVector>(values.data());
                     },
                     [](const SystemConfig& c) { return fmt_list(c.winding.torque_pattern); }});
        f.push_back({"winding", "suspension_table",
                     [](SystemConfig& c, const std::string& v) {
                         const auto values = parse_list(v);
                         if (values.size() != 3 * kTeeth)
                             throw std::invalid_argument("expected 36 values (u, v, w per coil)");
                         c.winding.suspension =
                             Eigen::Map<const Eigen::Matrix<double, kTeeth, 3, Eigen::RowMajor>>(values.data());
                     },
                     [](const SystemConfig& c) {
                         const Eigen::Matrix<double, kTeeth, 3, Eigen::RowMajor> rows = c.winding.suspension;
                         return fmt_list(std::vector<double>(rows.data(), rows.data() + rows.size()));
                     }});
        f.push_back(number("winding", "dq_angle", [](auto& c) -> auto& { return c.winding.dq_angle; }));

        // [scenario]
        f.push_back({"scenario", "kind",
                     [](SystemConfig& c, const std::string& v) {
                         c.scenario.kind = parse_enum(v, {ScenarioKind::StaticSweep, ScenarioKind::OpenLoopInjection,
                                                          ScenarioKind::ClosedLoopLevitation,
                                                          ScenarioKind::DisturbanceRejection});
                     },
                     [](const SystemConfig& c) { return to_string(c.scenario.kind); }});
        f.push_back(number("scenario", "dt", [](auto& c) -> auto& { return c.scenario.dt; }));
        f.push_back(number("scenario", "duration", [](auto& c) -> auto& { return c.scenario.duration; }));
        f.push_back(number("scenario", "control_period", [](auto& c) -> auto& { return c.scenario.control_period; }));
        f.push_back(flag("scenario", "carrier_synchronous_control",
                         [](auto& c) -> auto& { return c.scenario.carrier_synchronous_control; }));
        f.push_back(number("scenario", "sweep_min", [](auto& c) -> auto& { return c.scenario.sweep_min; }));
        f.push_back(number("scenario", "sweep_max", [](auto& c) -> auto& { return c.scenario.sweep_max; }));
        f.push_back(number("scenario", "sweep_step", [](auto& c) -> auto& { return c.scenario.sweep_step; }));
        f.push_back({"scenario", "sweep_settle_periods",
                     [](SystemConfig& c, const std::string& v) {
                         c.scenario.sweep_settle_periods = static_cast<int>(parse_integer(v));
                     },
                     [](const SystemConfig& c) { return std::to_string(c.scenario.sweep_settle_periods); }});
        f.push_back(number("scenario", "initial_x", [](auto& c) -> auto& { return c.scenario.initial.x; }));
        f.push_back(number("scenario", "initial_y", [](auto& c) -> auto& { return c.scenario.initial.y; }));
        f.push_back(number("scenario", "initial_vx", [](auto& c) -> auto& { return c.scenario.initial.vx; }));
        f.push_back(number("scenario", "initial_vy", [](auto& c) -> auto& { return c.scenario.initial.vy; }));
        f.push_back({"scenario", "disturbance",
                     [](SystemConfig& c, const std::string& v) {
                         c.scenario.disturbance.kind =
                             parse_enum(v, {DisturbanceKind::None, DisturbanceKind::Step, DisturbanceKind::Sine});
                     },
                     [](const SystemConfig& c) { return to_string(c.scenario.disturbance.kind); }});
        f.push_back(number("scenario", "disturbance_amplitude_x",
                           [](auto& c) -> auto& { return c.scenario.disturbance.amplitude_x; }));
        f.push_back(number("scenario", "disturbance_amplitude_y",
                           [](auto& c) -> auto& { return c.scenario.disturbance.amplitude_y; }));
        f.push_back(number("scenario", "disturbance_start",
                           [](auto& c) -> auto& { return c.scenario.disturbance.start; }));
        f.push_back(number("scenario", "disturbance_frequency",
                           [](auto& c) -> auto& { return c.scenario.disturbance.frequency; }));
        f.push_back({"scenario", "feedback",
                     [](SystemConfig& c, const std::string& v) {
                         c.scenario.feedback = parse_enum(v, {FeedbackSource::Estimated, FeedbackSource::True});
                     },
                     [](const SystemConfig& c) { return to_string(c.scenario.feedback); }});
        f.push_back(number("scenario", "sensor_noise_sigma",
                           [](auto& c) -> auto& { return c.scenario.sensor_noise_sigma; }));
        f.push_back({"scenario", "seed",
                     [](SystemConfig& c, const std::string& v) {
                         c.scenario.seed = parse_integer<std::uint64_t>(v);
                     },
                     [](const SystemConfig& c) { return std::to_string(c.scenario.seed); }});
        f.push_back(number("scenario", "settle_band", [](auto& c) -> auto& { return c.scenario.settle_band; }));
        return f;
    }();
    return table;
}

struct Setting {
    std::string value;
    std::string origin;
};

SystemConfig build(const std::map<std::string, Setting>& settings, std::vector<std::string> problems)
{
    SystemConfig cfg = default_config();
    for (const auto& field : fields()) {
        const auto it = settings.find(field.name());
        if (it == settings.end())
            continue;
        try {
            field.set(cfg, it->second.value);
        } catch (const std::exception& e) {
            problems.push_back(it->second.origin + ": " + field.name() + ": " + e.what());
        }
    }
    cfg.controller.dt = cfg.scenario.control_period;
    try {
        for (const auto& p : validate(cfg))
            problems.push_back(p);
    } catch (const std::exception& e) {
        problems.push_back(e.what());
    }
    if (!problems.empty())
        throw ConfigError(std::move(problems));
    return cfg;
}

bool is_known(const std::string& name)
{
    for (const auto& f : fields())
        if (f.name() == name)
            return true;
    return false;
}

void merge_overrides(std::map<std::string, Setting>& settings, std::span<const std::string> overrides,
                     std::vector<std::string>& problems)
{
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) {
            problems.push_back("override '" + o + "': expected section.key=value");
            continue;
        }
        const std::string name = trim(o.substr(0, eq));
        if (!is_known(name)) {
            problems.push_back("override '" + o + "': unknown key '" + name + "'");
            continue;
        }
        settings[name] = Setting{trim(o.substr(eq + 1)), "override"};
    }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems))
{
}

std::vector<std::string> known_config_keys()
{
    std::vector<std::string> keys;
    for (const auto& f : fields())
        keys.push_back(f.name());
    return keys;
}

SystemConfig parse_config(std::istream& in, std::span<const std::string> overrides,
                          const std::string& source_name)
{
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError({source_name + ":" + std::to_string(e.line()) + ": " + e.message()});
    }

    std::vector<std::string> problems;
    std::map<std::string, Setting> settings;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            problems.push_back(source_name + ": key '" + section + "' outside any section");
            continue;
        }
        for (const auto& [key, value] : body) {
            const std::string name = section + "." + key;
            if (!is_known(name)) {
                problems.push_back(source_name + ": unknown key '" + name + "'");
                continue;
            }
            settings[name] = Setting{value.data(), source_name};
        }
    }
    merge_overrides(settings, overrides, problems);
    return build(settings, std::move(problems));
}

SystemConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError({path.string() + ": cannot open file"});
    return parse_config(in, overrides, path.string());
}

SystemConfig config_from_overrides(std::span<const std::string> overrides)
{
    std::vector<std::string> problems;
    std::map<std::string, Setting> settings;
    merge_overrides(settings, overrides, problems);
    return build(settings, std::move(problems));
}

std::string format_config(const SystemConfig& cfg)
{
    std::string out;
    std::string current;
    for (const auto& f : fields()) {
        if (!f.get)
            continue;
        if (f.section != current) {
            out += (out.empty() ? "[" : "\n[") + f.section + "]\n";
            current = f.section;
        }
        out += f.key + " = " + f.get(cfg) + "\n";
    }
    return out;
}

std::string calibration_fragment(const CalibrationFit& x, const CalibrationFit& y)
{
    std::string out = "; affine calibration from static sweeps, x = gain * (raw - offset)\n";
    out += "; residual rms: x " + fmt(x.residual_rms) + " V, y " + fmt(y.residual_rms) + " V\n";
    out += "[estimator]\n";
    out += "auto_calibrate = false\n";
    out += "calibration_gain_x = " + fmt(x.calibration.gain) + "\n";
    out += "calibration_offset_x = " + fmt(x.calibration.offset) + "\n";
    out += "calibration_gain_y = " + fmt(y.calibration.gain) + "\n";
    out += "calibration_offset_y = " + fmt(y.calibration.offset) + "\n";
    return out;
}

}  // namespace selfsense
