#include <selfsense/cli.hpp>

#include <selfsense/config.hpp>
#include <selfsense/selftest.hpp>
#include <selfsense/trace_io.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace selfsense {

namespace {

struct Options {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    bool force = false;
    std::string feedback;
};

struct Failure {
    int code;
    std::string reason;
};

SystemConfig resolve_config(const Options& opt)
{
    std::vector<std::string> overrides = opt.overrides;
    if (opt.seed) {
        overrides.push_back("scenario.seed=" + std::to_string(*opt.seed));
    } else if (const char* env = std::getenv("SELFSENSE_SEED"); env && *env) {
        overrides.push_back("scenario.seed=" + std::string(env));
    }
    if (!opt.feedback.empty())
        overrides.push_back("scenario.feedback=" + opt.feedback);
    if (opt.config_path.empty())
        return config_from_overrides(overrides);
    return load_config(opt.config_path, overrides);
}

void prepare_output(const Options& opt)
{
    const fs::path dir(opt.out_dir);
    std::error_code ec;
    if (fs::exists(dir, ec)) {
        if (!fs::is_directory(dir, ec))
            throw Failure{kExitIo, "output path exists and is not a directory: " + dir.string()};
        if (!fs::is_empty(dir, ec) && !opt.force)
            throw Failure{kExitIo, "output directory not empty (use --force): " + dir.string()};
    } else if (!fs::create_directories(dir, ec) || ec) {
        throw Failure{kExitIo, "cannot create output directory " + dir.string() + ": " + ec.message()};
    }
}

template <typename Writer>
void write_file(const Options& opt, const std::string& name, Writer&& writer)
{
    const fs::path path = fs::path(opt.out_dir) / name;
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw Failure{kExitIo, "cannot open " + path.string() + " for writing"};
    writer(file);
    file.flush();
    if (!file)
        throw Failure{kExitIo, "write failed: " + path.string()};
}

void write_sweep_summary(std::ostream& out, const char* axis, const SweepSummary& s)
{
    const std::string prefix = std::string("sweep_") + axis + "_";
    auto kv = [&](const std::string& key, const std::string& value) { out << prefix << key << " = " << value << '\n'; };
    kv("points", std::to_string(s.points));
    kv("strictly_monotonic", s.strictly_monotonic ? "true" : "false");
    kv("zero_crossing", s.zero_crossing ? format_number(*s.zero_crossing) : "none");
    kv("on_axis_span", format_number(s.on_axis_span));
    kv("max_cross_axis", format_number(s.max_cross_axis));
    kv("odd_symmetry_error", format_number(s.odd_symmetry_error));
}

std::vector<TraceRecord> steady_records(std::span<const SweepRow> rows)
{
    std::vector<TraceRecord> trace;
    trace.reserve(rows.size());
    for (const auto& row : rows)
        trace.push_back(row.steady_state);
    return trace;
}

int cmd_sweep(const Options& opt, std::ostream& out)
{
    SystemConfig cfg = resolve_config(opt);
    cfg.scenario.kind = ScenarioKind::StaticSweep;
    prepare_output(opt);
    const auto rows = run_static_sweep(cfg, SweepAxis::X);
    const SweepSummary summary = summarize_sweep(rows);
    write_file(opt, "sweep.csv", [&](std::ostream& f) { write_sweep_csv(f, rows); });
    write_file(opt, "trace.csv", [&](std::ostream& f) { write_trace_csv(f, steady_records(rows)); });
    write_file(opt, "summary.txt", [&](std::ostream& f) {
        f << "scenario = " << to_string(ScenarioKind::StaticSweep) << '\n';
        write_sweep_summary(f, "x", summary);
    });
    out << "sweep: " << summary.points << " points, span " << format_number(summary.on_axis_span) << " V, "
        << (summary.strictly_monotonic ? "monotonic" : "NOT monotonic") << ", zero crossing "
        << (summary.zero_crossing ? format_number(*summary.zero_crossing) + " m" : std::string("none")) << '\n';
    return kExitOk;
}

int cmd_run(const Options& opt, std::ostream& out, bool disturb)
{
    SystemConfig cfg = resolve_config(opt);
    if (disturb) {
        cfg.scenario.kind = ScenarioKind::DisturbanceRejection;
        if (cfg.scenario.disturbance.kind == DisturbanceKind::None) {
            cfg.scenario.disturbance = {DisturbanceKind::Step, kDefaultDisturbanceForce, 0.0,
                                        kDefaultDisturbanceStart, 0.0};
            out << "disturb: no disturbance configured, using " << format_number(kDefaultDisturbanceForce)
                << " N x step at " << format_number(kDefaultDisturbanceStart) << " s\n";
        }
    } else if (cfg.scenario.kind != ScenarioKind::OpenLoopInjection) {
        cfg.scenario.kind = ScenarioKind::ClosedLoopLevitation;
    }
    if (const auto problems = validate(cfg); !problems.empty())
        throw ConfigError(problems);
    prepare_output(opt);
    const RunResult result = run_closed_loop(cfg);
    write_file(opt, "trace.csv", [&](std::ostream& f) { write_trace_csv(f, result.trace); });
    write_file(opt, "summary.txt", [&](std::ostream& f) {
        write_summary(f, result.summary);
        f << "seed = " << cfg.scenario.seed << '\n';
    });

    const RunSummary& s = result.summary;
    if (s.touchdown) {
        out << to_string(s.kind) << ": touchdown at t = " << format_number(s.touchdown_time) << " s\n";
        throw Failure{kExitTouchdown, "touchdown at t = " + format_number(s.touchdown_time) + " s"};
    }
    out << to_string(s.kind) << " (" << to_string(s.feedback) << " feedback): settling_time "
        << (s.settling_time ? format_number(*s.settling_time) + " s" : std::string("none")) << ", final |r| "
        << format_number(std::hypot(s.final_x, s.final_y)) << " m, estimation error rms "
        << format_number(s.estimation_error_rms) << " m";
    if (disturb)
        out << ", peak deviation " << format_number(s.peak_deviation_after_disturbance) << " m";
    out << '\n';
    return kExitOk;
}

int cmd_calibrate(const Options& opt, std::ostream& out)
{
    SystemConfig cfg = resolve_config(opt);
    prepare_output(opt);
    const auto rows_x = run_static_sweep(cfg, SweepAxis::X);
    const auto rows_y = run_static_sweep(cfg, SweepAxis::Y);
    const CalibrationFit fx = calibrate_from_sweep(rows_x);
    const CalibrationFit fy = calibrate_from_sweep(rows_y);

    SystemConfig calibrated = cfg;
    calibrated.estimator.auto_calibrate = false;
    calibrated.estimator.x = fx.calibration;
    calibrated.estimator.y = fy.calibration;

    std::vector<TraceRecord> trace = steady_records(rows_x);
    for (const auto& r : rows_y)
        trace.push_back(r.steady_state);
    write_file(opt, "sweep.csv", [&](std::ostream& f) { write_sweep_csv(f, rows_x); });
    write_file(opt, "sweep_y.csv", [&](std::ostream& f) { write_sweep_csv(f, rows_y); });
    write_file(opt, "trace.csv", [&](std::ostream& f) { write_trace_csv(f, trace); });
    write_file(opt, "calibration.ini", [&](std::ostream& f) { f << calibration_fragment(fx, fy); });
    write_file(opt, "config.ini", [&](std::ostream& f) { f << format_config(calibrated); });
    write_file(opt, "summary.txt", [&](std::ostream& f) {
        f << "scenario = calibrate\n";
        f << "calibration_gain_x = " << format_number(fx.calibration.gain) << '\n';
        f << "calibration_offset_x = " << format_number(fx.calibration.offset) << '\n';
        f << "calibration_residual_rms_x = " << format_number(fx.residual_rms) << '\n';
        f << "calibration_gain_y = " << format_number(fy.calibration.gain) << '\n';
        f << "calibration_offset_y = " << format_number(fy.calibration.offset) << '\n';
        f << "calibration_residual_rms_y = " << format_number(fy.residual_rms) << '\n';
        write_sweep_summary(f, "x", summarize_sweep(rows_x));
        write_sweep_summary(f, "y", summarize_sweep(rows_y));
    });
    out << "calibrate: gain_x " << format_number(fx.calibration.gain) << " m/V, gain_y "
        << format_number(fy.calibration.gain) << " m/V; wrote "
        << (fs::path(opt.out_dir) / "config.ini").string() << '\n';
    return kExitOk;
}

int cmd_selftest(const Options& opt, std::ostream& out)
{
    const SystemConfig cfg = resolve_config(opt);
    if (!opt.out_dir.empty())
        prepare_output(opt);
    const auto checks = run_selftest(cfg);
    std::size_t failed = 0;
    std::ostringstream report;
    for (const auto& c : checks) {
        report << (c.passed ? "PASS  " : "FAIL  ") << c.name << "  [" << c.detail << "]\n";
        failed += c.passed ? 0 : 1;
    }
    report << "selftest: " << checks.size() - failed << "/" << checks.size() << " passed\n";
    out << report.str();
    if (!opt.out_dir.empty())
        write_file(opt, "summary.txt", [&](std::ostream& f) { f << report.str(); });
    if (failed)
        throw Failure{kExitSelftest, std::to_string(failed) + " self-test check(s) failed"};
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Self-sensing bearingless motor simulator", "selfsense"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&opt](CLI::App* sub, bool needs_out) {
        sub->add_option("-c,--config", opt.config_path, "scenario config file (INI)")->check(CLI::ExistingFile);
        auto* o = sub->add_option("-o,--out", opt.out_dir, "output directory");
        if (needs_out)
            o->required();
        sub->add_option("--seed", opt.seed, "RNG seed (falls back to SELFSENSE_SEED, then the config)");
        sub->add_option("--set", opt.overrides, "override, section.key=value (repeatable)")
            ->allow_extra_args(false);
        sub->add_flag("--force", opt.force, "write into a non-empty output directory");
    };

    auto* sweep = app.add_subcommand("sweep", "static position sweep of the demodulated outputs");
    auto* levitate = app.add_subcommand("levitate", "closed-loop levitation from the initial offset");
    auto* disturb = app.add_subcommand("disturb", "closed-loop run with a force disturbance");
    auto* calibrate_cmd = app.add_subcommand("calibrate", "fit estimator gain/offset and write a config");
    auto* selftest = app.add_subcommand("selftest", "run the invariant checks");
    add_common(sweep, true);
    add_common(levitate, true);
    add_common(disturb, true);
    add_common(calibrate_cmd, true);
    add_common(selftest, false);
    for (auto* sub : {levitate, disturb})
        sub->add_option("--feedback", opt.feedback, "position feedback source")
            ->check(CLI::IsMember({"estimated", "true"}));

    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i)
        args.emplace_back(argv[i]);
    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sweep->parsed())
            return cmd_sweep(opt, out);
        if (levitate->parsed())
            return cmd_run(opt, out, false);
        if (disturb->parsed())
            return cmd_run(opt, out, true);
        if (calibrate_cmd->parsed())
            return cmd_calibrate(opt, out);
        return cmd_selftest(opt, out);
    } catch (const Failure& f) {
        err << "selfsense: " << f.reason << '\n';
        return f.code;
    } catch (const ConfigError& e) {
        std::string joined;
        for (const auto& p : e.problems())
            joined += (joined.empty() ? "" : "; ") + p;
        err << "selfsense: config: " << joined << '\n';
        return kExitConfig;
    } catch (const CalibrationError& e) {
        err << "selfsense: calibration: " << e.what() << '\n';
        return kExitScenario;
    } catch (const DomainError& e) {
        err << "selfsense: model: " << e.what() << '\n';
        return kExitScenario;
    } catch (const std::exception& e) {
        err << "selfsense: " << e.what() << '\n';
        return kExitIo;
    }
}

}  // namespace selfsense
