#pragma once

// Fixed-step orchestration of plant, estimator and suspension controller.
//
// The plant (rotor mechanics, coil currents and terminal voltages) advances
// at scenario.dt; the estimator consumes every plant sample; the controller
// runs every control_period and its commands are held in between. One trace
// record is emitted per control update.

#include <selfsense/motor_model.hpp>
#include <selfsense/signal_chain.hpp>
#include <selfsense/suspension_control.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace selfsense {

enum class ScenarioKind { StaticSweep, OpenLoopInjection, ClosedLoopLevitation, DisturbanceRejection };
enum class FeedbackSource { Estimated, True };
enum class DisturbanceKind { None, Step, Sine };

std::string to_string(ScenarioKind kind);
std::string to_string(FeedbackSource source);
std::string to_string(DisturbanceKind kind);

struct DisturbanceProfile {
    DisturbanceKind kind = DisturbanceKind::None;
    double amplitude_x = 0.0;  // N
    double amplitude_y = 0.0;  // N
    double start = 0.0;        // s
    double frequency = 0.0;    // Hz, sine only

    Eigen::Vector2d at(double t) const;
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::ClosedLoopLevitation;
    double dt = 5.0e-6;
    double duration = 0.5;
    double control_period = 2.5e-4;
    /// Phase control updates so that each command step is first seen by the
    /// demodulator on a null of its carrier. Needs control_period to be a
    /// multiple of half a carrier period.
    bool carrier_synchronous_control = true;
    double sweep_min = -1.0e-4;
    double sweep_max = 1.0e-4;
    double sweep_step = 1.0e-5;
    int sweep_settle_periods = 10;
    RotorState initial{1.0e-4, 0.0, 0.0, 0.0, 0.0};
    DisturbanceProfile disturbance;
    FeedbackSource feedback = FeedbackSource::Estimated;
    double sensor_noise_sigma = 0.0;
    std::uint64_t seed = 1;
    double settle_band = 5.0e-6;
};

struct EstimatorConfig {
    int window_periods = 1;
    bool auto_calibrate = true;
    /// Subtract the nominal-inductance voltage of the known suspension and
    /// bias commands, R i* + L(g0) di*/dt, before demodulation.
    bool command_compensation = true;
    AxisCalibration x;
    AxisCalibration y;
};

struct SystemConfig {
    MotorParams motor;
    InjectionConfig injection;
    EstimatorConfig estimator;
    ControllerConfig controller;
    WindingConfig winding;
    ScenarioConfig scenario;
};

/// Shipped defaults: motor and injection values as documented in the README,
/// gains tuned for a stable estimated-feedback loop.
SystemConfig default_config();

std::vector<std::string> validate(const ScenarioConfig& cfg, const MotorParams& motor);
std::vector<std::string> validate(const SystemConfig& cfg);

struct TraceRecord {
    double t = 0.0;
    double x = 0.0, y = 0.0;
    double x_hat = 0.0, y_hat = 0.0;
    double x_hat_raw = 0.0, y_hat_raw = 0.0;
    CoilVector current = CoilVector::Zero();
    CoilVector voltage = CoilVector::Zero();
    double fx = 0.0, fy = 0.0;
    double u_x = 0.0, u_y = 0.0, u_d = 0.0, u_q = 0.0;
    double i_u = 0.0, i_v = 0.0, i_w = 0.0;
    bool saturated = false;
    bool touchdown = false;
    bool gap_clamp = false;
};

struct RunSummary {
    ScenarioKind kind = ScenarioKind::ClosedLoopLevitation;
    FeedbackSource feedback = FeedbackSource::Estimated;
    bool touchdown = false;
    double touchdown_time = 0.0;
    std::optional<double> settling_time;
    double overshoot = 0.0;
    double estimation_error_rms = 0.0;
    double final_x = 0.0, final_y = 0.0;
    double max_radial_displacement = 0.0;
    double max_coil_current = 0.0;
    double saturated_fraction = 0.0;
    double peak_deviation_after_disturbance = 0.0;
    std::optional<double> recovery_time;
    std::optional<CalibrationFit> calibration_x;
    std::optional<CalibrationFit> calibration_y;
    std::size_t records = 0;
    double simulated_time = 0.0;
};

struct RunResult {
    std::vector<TraceRecord> trace;
    RunSummary summary;
};

// For a y sweep, x_hat_raw holds the on-axis (y) reading and y_hat_raw the
// cross-axis one, so every sweep reads the same way.
struct SweepRow {
    double x_true = 0.0;  // m, displacement along the swept axis
    double x_hat_raw = 0.0;
    double y_hat_raw = 0.0;
    TraceRecord steady_state;  // last plant sample at this grid point
};

struct SweepSummary {
    std::size_t points = 0;
    bool strictly_monotonic = false;
    std::optional<double> zero_crossing;  // m, linear interpolation
    double on_axis_span = 0.0;            // max - min of x_hat_raw
    double max_cross_axis = 0.0;          // max |y_hat_raw|
    double odd_symmetry_error = 0.0;      // max |r(x) + r(-x)| / |r(x)| over mirrored pairs
};

SweepSummary summarize_sweep(std::span<const SweepRow> rows);

enum class SweepAxis { X, Y };

/// Sweep grid sweep_min, sweep_min + step, ... up to sweep_max.
std::vector<double> sweep_grid(const ScenarioConfig& cfg);

/// Static sweep: rotor held at each grid position, bias plus injection
/// applied until the demodulator has filled and run sweep_settle_periods
/// more carrier periods; records the final raw outputs.
std::vector<SweepRow> run_static_sweep(const SystemConfig& cfg, SweepAxis axis = SweepAxis::X);

/// Affine calibration of one axis from a static sweep of that axis.
CalibrationFit calibrate_axis(const SystemConfig& cfg, SweepAxis axis);
CalibrationFit calibrate_from_sweep(std::span<const SweepRow> rows);

/// Plant step index of the first control update (0 unless carrier-synchronous).
long first_control_step(const SystemConfig& cfg);

/// Full loop for open-loop, closed-loop and disturbance scenarios.
RunResult run_closed_loop(const SystemConfig& cfg);

/// dFx/dx at the centered rotor by central differences of radial_force.
double linearized_stiffness(const MotorParams& params, const CoilVector& bias_currents);

}  // namespace selfsense
