#pragma once

// Suspension control path: per-axis PID, xy -> dq -> uvw transforms and the
// per-coil superposition of suspension, torque-bias and sensing currents.

#include <selfsense/types.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace selfsense {

struct ControllerConfig {
    double kp = 0.0;   // A/m
    double ki = 0.0;   // A/(m s)
    double kd = 0.0;   // A s/m
    double output_limit = 1.0;  // A
    double dt = 1.0e-4;         // s
    double derivative_filter_tau = 0.0;  // s
};

std::vector<std::string> validate(const ControllerConfig& cfg);

struct PidState {
    double integral = 0.0;  // accumulated error, m s
    double previous_error = 0.0;
    double derivative = 0.0;  // filtered de/dt
    bool saturated = false;
};

/// Discrete PID: proportional + trapezoidal integral + first-order filtered
/// derivative, output clamped to +-output_limit. The integrator holds while
/// the output is saturated and the error pushes further into saturation, and
/// its contribution ki*integral never exceeds output_limit.
double pid_step(double error, PidState& state, const ControllerConfig& cfg);

// ---------------------------------------------------------------------------
// Frame transforms
// ---------------------------------------------------------------------------

/// Rotation by -angle into the suspension dq frame.
template <typename Scalar>
Vector2T<Scalar> xy_to_dq(const Scalar& u_x, const Scalar& u_y, const Scalar& angle)
{
    using std::cos;
    using std::sin;
    const Scalar c = cos(angle);
    const Scalar s = sin(angle);
    return Vector2T<Scalar>(u_x * c + u_y * s, -u_x * s + u_y * c);
}

template <typename Scalar>
Vector2T<Scalar> dq_to_xy(const Scalar& u_d, const Scalar& u_q, const Scalar& angle)
{
    using std::cos;
    using std::sin;
    const Scalar c = cos(angle);
    const Scalar s = sin(angle);
    return Vector2T<Scalar>(u_d * c - u_q * s, u_d * s + u_q * c);
}

/// Amplitude-invariant inverse Clarke transform, phase axes at 0/120/240 deg.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> dq_to_three_phase(const Scalar& u_d, const Scalar& u_q)
{
    const Scalar half_sqrt3 = Scalar(std::sqrt(3.0) / 2.0);
    const Scalar u = u_d;
    const Scalar v = -u_d / Scalar(2) + half_sqrt3 * u_q;
    // w closes the set so the three commands sum to zero exactly.
    const Scalar w = -u - v;
    return Eigen::Matrix<Scalar, 3, 1>(u, v, w);
}

// ---------------------------------------------------------------------------
// Winding patterns
// ---------------------------------------------------------------------------

using SuspensionTable = Eigen::Matrix<double, kTeeth, 3>;

/// 2-pole distribution of the 3-phase suspension set over the 12 teeth:
/// W(k, p) = (2/3) cos(theta_k + alpha_p), alpha = 0, 120, 240 deg. A
/// balanced set of amplitude A and angle phi maps to A cos(theta_k + phi),
/// which under a cos(2 theta) bias field pushes the rotor toward angle phi.
SuspensionTable default_suspension_table();

/// 4-pole bias pattern cos(2 theta_k - phase).
CoilVector four_pole_pattern(double phase);

struct WindingConfig {
    SuspensionTable suspension = default_suspension_table();
    CoilVector torque_pattern = four_pole_pattern(0.0);
    double torque_bias_amplitude = 1.0;  // A
    double dq_angle = 0.0;               // rad, stator-fixed by default
};

std::vector<std::string> validate(const WindingConfig& cfg);

/// Coil current commands s_k + m_k + j_k.
CoilVector superpose_coil_currents(const Eigen::Vector3d& suspension_uvw, double torque_amplitude,
                                   double injection, const CoilVector& injection_weights,
                                   const WindingConfig& winding);

struct ControlCommand {
    double e_x = 0.0, e_y = 0.0;
    double u_x = 0.0, u_y = 0.0;
    double u_d = 0.0, u_q = 0.0;
    double i_u_star = 0.0, i_v_star = 0.0, i_w_star = 0.0;
    /// Suspension plus bias part; injection is added at the plant rate.
    CoilVector coil_current_cmd = CoilVector::Zero();
    bool saturated = false;
};

/// One control update: PID on both axes, transforms, and the slow (non
/// injection) part of the per-coil commands.
struct SuspensionController {
    ControllerConfig config;
    WindingConfig winding;
    PidState pid_x;
    PidState pid_y;
    bool enabled = true;

    ControlCommand update(double x_feedback, double y_feedback,
                          double x_ref = 0.0, double y_ref = 0.0);
};

}  // namespace selfsense
