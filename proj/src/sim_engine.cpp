#include <selfsense/sim_engine.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace selfsense {

namespace {

long steps_in(double span, double dt) { return std::lround(span / dt); }

bool is_multiple(double span, double dt)
{
    const double ratio = span / dt;
    return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio) && ratio >= 1.0 - 1e-9;
}

}  // namespace

std::string to_string(ScenarioKind kind)
{
    switch (kind) {
    case ScenarioKind::StaticSweep: return "static_sweep";
    case ScenarioKind::OpenLoopInjection: return "open_loop_injection";
    case ScenarioKind::ClosedLoopLevitation: return "closed_loop_levitation";
    case ScenarioKind::DisturbanceRejection: return "disturbance_rejection";
    }
    return "unknown";
}

std::string to_string(FeedbackSource source)
{
    return source == FeedbackSource::Estimated ? "estimated" : "true";
}

std::string to_string(DisturbanceKind kind)
{
    switch (kind) {
    case DisturbanceKind::None: return "none";
    case DisturbanceKind::Step: return "step";
    case DisturbanceKind::Sine: return "sine";
    }
    return "unknown";
}

Eigen::Vector2d DisturbanceProfile::at(double t) const
{
    if (kind == DisturbanceKind::None || t < start)
        return Eigen::Vector2d::Zero();
    const Eigen::Vector2d amplitude(amplitude_x, amplitude_y);
    if (kind == DisturbanceKind::Step)
        return amplitude;
    return amplitude * std::sin(2.0 * kPi * frequency * (t - start));
}

SystemConfig default_config()
{
    SystemConfig cfg;
    // Plant: 1 A bias gives k = 3 I^2 L0 / g0^2 ~ 1.2e4 N/m and 3 I L0 / g0 ~ 6 N/A.
    // Gains place the closed-loop poles near 500 rad/s with derivative lead.
    cfg.controller.kp = 2.1e4;
    cfg.controller.ki = 2.0e6;
    cfg.controller.kd = 40.0;
    cfg.controller.output_limit = 3.0;
    cfg.controller.derivative_filter_tau = 1.0e-4;
    cfg.controller.dt = cfg.scenario.control_period;
    return cfg;
}

std::vector<std::string> validate(const ScenarioConfig& s, const MotorParams& motor)
{
    std::vector<std::string> errors;
    if (!(s.dt > 0.0))
        errors.push_back("scenario.dt must be > 0");
    if (!(s.duration > 0.0))
        errors.push_back("scenario.duration must be > 0");
    if (!(s.control_period > 0.0) || (s.dt > 0.0 && !is_multiple(s.control_period, s.dt)))
        errors.push_back("scenario.control_period must be a positive integer multiple of scenario.dt");
    const double limit = motor.max_displacement_fraction * motor.nominal_gap_g0;
    if (!(s.sweep_max > s.sweep_min))
        errors.push_back("scenario.sweep_max must exceed scenario.sweep_min");
    if (!(std::abs(s.sweep_min) < limit) || !(std::abs(s.sweep_max) < limit))
        errors.push_back("scenario sweep range must stay within max_displacement_fraction * g0");
    if (!(s.sweep_step > 0.0))
        errors.push_back("scenario.sweep_step must be > 0");
    if (s.sweep_settle_periods < 0)
        errors.push_back("scenario.sweep_settle_periods must be >= 0");
    if (!(std::hypot(s.initial.x, s.initial.y) < limit))
        errors.push_back("scenario initial position must lie inside the touchdown radius");
    if (!(s.sensor_noise_sigma >= 0.0))
        errors.push_back("scenario.sensor_noise_sigma must be >= 0");
    if (s.disturbance.kind == DisturbanceKind::Sine && !(s.disturbance.frequency > 0.0))
        errors.push_back("scenario.disturbance_frequency must be > 0 for a sine disturbance");
    if (!(s.disturbance.start >= 0.0))
        errors.push_back("scenario.disturbance_start must be >= 0");
    if (!(s.settle_band > 0.0))
        errors.push_back("scenario.settle_band must be > 0");
    return errors;
}

std::vector<std::string> validate(const SystemConfig& cfg)
{
    std::vector<std::string> errors = validate(cfg.motor);
    auto append = [&](std::vector<std::string> more) {
        errors.insert(errors.end(), more.begin(), more.end());
    };
    append(validate(cfg.injection));
    append(validate(cfg.controller));
    append(validate(cfg.winding));
    append(validate(cfg.scenario, cfg.motor));
    if (cfg.estimator.window_periods < 1)
        errors.push_back("estimator.window_periods must be >= 1");
    if (!std::isfinite(cfg.estimator.x.gain) || !std::isfinite(cfg.estimator.y.gain) ||
        cfg.estimator.x.gain == 0.0 || cfg.estimator.y.gain == 0.0)
        errors.push_back("estimator calibration gains must be finite and nonzero");
    if (cfg.scenario.dt > 0.0 && cfg.injection.frequency_fs > 0.0 && cfg.estimator.window_periods >= 1) {
        try {
            commensurate_window(cfg.scenario.dt, cfg.injection, cfg.estimator.window_periods);
        } catch (const DomainError&) {
            errors.push_back("scenario.dt must divide the injection carrier period");
        }
        if (cfg.scenario.carrier_synchronous_control) {
            const double half_period = 0.5 / cfg.injection.frequency_fs;
            if (cfg.scenario.control_period > 0.0 && !is_multiple(cfg.scenario.control_period, half_period))
                errors.push_back(
                    "scenario.control_period must be a multiple of half the carrier period "
                    "when carrier_synchronous_control is set");
            else if (first_control_step(cfg) < 0)
                errors.push_back("scenario.dt does not place a sample on a carrier null");
        }
    }
    return errors;
}

long first_control_step(const SystemConfig& cfg)
{
    const auto& s = cfg.scenario;
    if (!s.carrier_synchronous_control)
        return 0;
    // The command written at step n is first differenced at sample n + 1;
    // put that sample on a zero of sin(w t + phase).
    const double omega = 2.0 * kPi * cfg.injection.frequency_fs;
    const double phase = cfg.injection.demod_phase_offset;
    double k = std::ceil((omega * s.dt + phase) / kPi - 1e-9);
    const double t_null = (k * kPi - phase) / omega;
    const double samples = t_null / s.dt;
    const double rounded = std::round(samples);
    if (std::abs(samples - rounded) > 1e-6 || rounded < 1.0)
        return -1;
    return static_cast<long>(rounded) - 1;
}

std::vector<double> sweep_grid(const ScenarioConfig& cfg)
{
    const long n = std::lround(std::floor((cfg.sweep_max - cfg.sweep_min) / cfg.sweep_step + 1e-9)) + 1;
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i)
        grid.push_back(cfg.sweep_min + static_cast<double>(i) * cfg.sweep_step);
    return grid;
}

std::vector<SweepRow> run_static_sweep(const SystemConfig& cfg, SweepAxis axis)
{
    const auto& s = cfg.scenario;
    const CoilVector weights = cfg.injection.weights();
    const CoilVector bias = superpose_coil_currents(Eigen::Vector3d::Zero(),
                                                    cfg.winding.torque_bias_amplitude, 0.0,
                                                    CoilVector::Zero(), cfg.winding);
    const int window = commensurate_window(s.dt, cfg.injection, cfg.estimator.window_periods);
    const long per_period = commensurate_window(s.dt, cfg.injection, 1);
    const long total = window + s.sweep_settle_periods * per_period;

    std::vector<SweepRow> rows;
    for (double position : sweep_grid(s)) {
        RotorState rotor;
        (axis == SweepAxis::X ? rotor.x : rotor.y) = position;

        EstimatorState est(s.dt, cfg.injection, cfg.estimator.window_periods);
        CoilBank bank;
        bank.current = bias + injection_current(0.0, cfg.injection) * weights;
        for (long n = 1; n <= total; ++n) {
            const double t = static_cast<double>(n) * s.dt;
            rotor.t = t;
            const CoilVector cmd = bias + injection_current(t, cfg.injection) * weights;
            bank = current_drive_step(bank, cmd, rotor, s.dt, cfg.motor);
            est.update(bank.terminal_voltage, t, cfg.injection);
        }
        const double on_axis = axis == SweepAxis::X ? est.x_hat_raw : est.y_hat_raw;
        const double off_axis = axis == SweepAxis::X ? est.y_hat_raw : est.x_hat_raw;
        TraceRecord sample;
        sample.t = rotor.t;
        sample.x = rotor.x;
        sample.y = rotor.y;
        sample.x_hat = est.x_hat;
        sample.y_hat = est.y_hat;
        sample.x_hat_raw = est.x_hat_raw;
        sample.y_hat_raw = est.y_hat_raw;
        sample.current = bank.current;
        sample.voltage = bank.terminal_voltage;
        const Eigen::Vector2d f = radial_force(rotor.x, rotor.y, bank.current, cfg.motor);
        sample.fx = f[0];
        sample.fy = f[1];
        sample.gap_clamp = any_gap_clamped(rotor.x, rotor.y, cfg.motor);
        rows.push_back(SweepRow{position, on_axis, off_axis, sample});
    }
    return rows;
}

SweepSummary summarize_sweep(std::span<const SweepRow> rows)
{
    SweepSummary out;
    out.points = rows.size();
    if (rows.empty())
        return out;
    out.strictly_monotonic = rows.size() > 1;
    double lo = rows.front().x_hat_raw;
    double hi = lo;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        lo = std::min(lo, rows[i].x_hat_raw);
        hi = std::max(hi, rows[i].x_hat_raw);
        out.max_cross_axis = std::max(out.max_cross_axis, std::abs(rows[i].y_hat_raw));
        if (i > 0) {
            const double d = rows[i].x_hat_raw - rows[i - 1].x_hat_raw;
            const double d0 = rows[1].x_hat_raw - rows[0].x_hat_raw;
            if (!(d * d0 > 0.0))
                out.strictly_monotonic = false;
            const double a = rows[i - 1].x_hat_raw;
            const double b = rows[i].x_hat_raw;
            if (!out.zero_crossing && ((a <= 0.0 && b >= 0.0) || (a >= 0.0 && b <= 0.0))) {
                out.zero_crossing = a == b ? rows[i - 1].x_true
                                           : rows[i - 1].x_true + (rows[i].x_true - rows[i - 1].x_true) * a / (a - b);
            }
        }
    }
    out.on_axis_span = hi - lo;
    // Mirrored pairs by grid position.
    for (const auto& r : rows) {
        if (r.x_true <= 0.0)
            continue;
        for (const auto& m : rows) {
            if (std::abs(m.x_true + r.x_true) <= 1e-9 * std::abs(r.x_true) && r.x_hat_raw != 0.0)
                out.odd_symmetry_error =
                    std::max(out.odd_symmetry_error, std::abs(r.x_hat_raw + m.x_hat_raw) / std::abs(r.x_hat_raw));
        }
    }
    return out;
}

CalibrationFit calibrate_axis(const SystemConfig& cfg, SweepAxis axis)
{
    return calibrate_from_sweep(run_static_sweep(cfg, axis));
}

CalibrationFit calibrate_from_sweep(std::span<const SweepRow> rows)
{
    std::vector<CalibrationPoint> points;
    points.reserve(rows.size());
    for (const auto& r : rows)
        points.push_back({r.x_true, r.x_hat_raw});
    return calibrate(points);
}

RunResult run_closed_loop(const SystemConfig& cfg_in)
{
    SystemConfig cfg = cfg_in;
    const auto& s = cfg.scenario;
    RunResult result;
    RunSummary& summary = result.summary;
    summary.kind = s.kind;
    summary.feedback = s.feedback;

    EstimatorState est(s.dt, cfg.injection, cfg.estimator.window_periods);
    if (cfg.estimator.auto_calibrate) {
        summary.calibration_x = calibrate_axis(cfg, SweepAxis::X);
        summary.calibration_y = calibrate_axis(cfg, SweepAxis::Y);
        est.cal_x = summary.calibration_x->calibration;
        est.cal_y = summary.calibration_y->calibration;
    } else {
        est.cal_x = cfg.estimator.x;
        est.cal_y = cfg.estimator.y;
    }

    SuspensionController controller;
    controller.config = cfg.controller;
    controller.config.dt = s.control_period;
    controller.winding = cfg.winding;
    controller.enabled = s.kind != ScenarioKind::OpenLoopInjection;

    std::mt19937_64 rng(s.seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    const CoilVector weights = cfg.injection.weights();
    const long n_steps = steps_in(s.duration, s.dt);
    const long per_control = steps_in(s.control_period, s.dt);
    const long first_control = first_control_step(cfg);
    const double fill_time = static_cast<double>(est.window_samples()) * s.dt;

    RotorState rotor = s.initial;
    rotor.t = 0.0;
    // Bias only until the first control update.
    CoilVector slow = superpose_coil_currents(Eigen::Vector3d::Zero(), cfg.winding.torque_bias_amplitude,
                                              0.0, CoilVector::Zero(), cfg.winding);
    CoilVector slow_previous = slow;
    const double nominal_inductance = coil_inductance(cfg.motor.nominal_gap_g0, cfg.motor);
    auto currents_at = [&](double t) -> CoilVector {
        return slow + injection_current(t, cfg.injection) * weights;
    };
    auto total_force = [&](double t, const RotorState& r) -> Eigen::Vector2d {
        return radial_force(r.x, r.y, currents_at(t), cfg.motor) + s.disturbance.at(t);
    };

    CoilBank bank;
    bank.current = currents_at(0.0);
    ControlCommand cmd;
    bool touchdown = false;
    bool clamp_seen = false;
    long saturated_updates = 0;
    long control_updates = 0;

    auto record = [&](double t) {
        TraceRecord r;
        r.t = t;
        r.x = rotor.x;
        r.y = rotor.y;
        r.x_hat = est.x_hat;
        r.y_hat = est.y_hat;
        r.x_hat_raw = est.x_hat_raw;
        r.y_hat_raw = est.y_hat_raw;
        r.current = bank.current;
        r.voltage = bank.terminal_voltage;
        const Eigen::Vector2d f = radial_force(rotor.x, rotor.y, bank.current, cfg.motor);
        r.fx = f[0];
        r.fy = f[1];
        r.u_x = cmd.u_x;
        r.u_y = cmd.u_y;
        r.u_d = cmd.u_d;
        r.u_q = cmd.u_q;
        r.i_u = cmd.i_u_star;
        r.i_v = cmd.i_v_star;
        r.i_w = cmd.i_w_star;
        r.saturated = cmd.saturated;
        r.touchdown = touchdown;
        r.gap_clamp = clamp_seen;
        result.trace.push_back(r);
    };

    for (long n = 0;; ++n) {
        const double t = static_cast<double>(n) * s.dt;
        if (n >= first_control && (n - first_control) % per_control == 0) {
            double fb_x = rotor.x;
            double fb_y = rotor.y;
            if (s.feedback == FeedbackSource::Estimated) {
                fb_x = est.x_hat;
                fb_y = est.y_hat;
            } else if (s.sensor_noise_sigma > 0.0) {
                fb_x += s.sensor_noise_sigma * noise(rng);
                fb_y += s.sensor_noise_sigma * noise(rng);
            }
            cmd = controller.update(fb_x, fb_y);
            slow = cmd.coil_current_cmd;
            ++control_updates;
            if (cmd.saturated)
                ++saturated_updates;
            record(t);
        }
        if (n == n_steps)
            break;

        rotor = mechanical_step(rotor, total_force, s.dt, cfg.motor);
        const double t_next = static_cast<double>(n + 1) * s.dt;
        rotor.t = t_next;
        clamp_seen = clamp_seen || any_gap_clamped(rotor.x, rotor.y, cfg.motor);
        bank = current_drive_step(bank, currents_at(t_next), rotor, s.dt, cfg.motor);
        if (cfg.estimator.command_compensation) {
            const CoilVector known = cfg.motor.coil_resistance_R * slow +
                                     (nominal_inductance / s.dt) * (slow - slow_previous);
            est.update(bank.terminal_voltage - known, t_next, cfg.injection);
        } else {
            est.update(bank.terminal_voltage, t_next, cfg.injection);
        }
        slow_previous = slow;

        if (is_touchdown(rotor, cfg.motor)) {
            touchdown = true;
            summary.touchdown_time = t_next;
            record(t_next);
            break;
        }
    }

    // Summary statistics over the emitted records.
    const auto& trace = result.trace;
    summary.touchdown = touchdown;
    summary.records = trace.size();
    summary.simulated_time = trace.empty() ? 0.0 : trace.back().t;
    summary.saturated_fraction =
        control_updates > 0 ? static_cast<double>(saturated_updates) / static_cast<double>(control_updates) : 0.0;
    if (!trace.empty()) {
        summary.final_x = trace.back().x;
        summary.final_y = trace.back().y;
    }

    const double r0 = std::hypot(s.initial.x, s.initial.y);
    double err_sum = 0.0;
    long err_count = 0;
    std::optional<std::size_t> last_outside;
    std::optional<std::size_t> last_outside_after_disturbance;
    const bool disturbed = s.disturbance.kind != DisturbanceKind::None;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& r = trace[i];
        const double radial = std::hypot(r.x, r.y);
        summary.max_radial_displacement = std::max(summary.max_radial_displacement, radial);
        summary.max_coil_current = std::max(summary.max_coil_current, r.current.cwiseAbs().maxCoeff());
        if (r0 > 0.0)
            summary.overshoot =
                std::max(summary.overshoot, -(r.x * s.initial.x + r.y * s.initial.y) / r0);
        if (r.t >= fill_time) {
            err_sum += (r.x_hat - r.x) * (r.x_hat - r.x) + (r.y_hat - r.y) * (r.y_hat - r.y);
            ++err_count;
        }
        if (radial >= s.settle_band)
            last_outside = i;
        if (disturbed && r.t >= s.disturbance.start) {
            summary.peak_deviation_after_disturbance =
                std::max(summary.peak_deviation_after_disturbance, radial);
            if (radial >= s.settle_band)
                last_outside_after_disturbance = i;
        }
    }
    summary.estimation_error_rms = err_count > 0 ? std::sqrt(err_sum / static_cast<double>(err_count)) : 0.0;

    if (!touchdown && !trace.empty()) {
        if (!last_outside)
            summary.settling_time = 0.0;
        else if (*last_outside + 1 < trace.size())
            summary.settling_time = trace[*last_outside + 1].t;
        if (disturbed) {
            if (!last_outside_after_disturbance)
                summary.recovery_time = 0.0;
            else if (*last_outside_after_disturbance + 1 < trace.size())
                summary.recovery_time =
                    std::max(0.0, trace[*last_outside_after_disturbance + 1].t - s.disturbance.start);
        }
    }
    return result;
}

double linearized_stiffness(const MotorParams& params, const CoilVector& bias_currents)
{
    const double h = 1e-6 * params.nominal_gap_g0;
    const double plus = radial_force(h, 0.0, bias_currents, params)[0];
    const double minus = radial_force(-h, 0.0, bias_currents, params)[0];
    return (plus - minus) / (2.0 * h);
}

}  // namespace selfsense
