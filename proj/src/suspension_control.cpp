#include <selfsense/suspension_control.hpp>

#include <algorithm>

namespace selfsense {

std::vector<std::string> validate(const ControllerConfig& cfg)
{
    std::vector<std::string> errors;
    if (!(cfg.dt > 0.0))
        errors.push_back("controller.dt must be > 0");
    if (!(cfg.output_limit > 0.0))
        errors.push_back("controller.output_limit must be > 0");
    if (!(cfg.kp >= 0.0) || !(cfg.ki >= 0.0) || !(cfg.kd >= 0.0))
        errors.push_back("controller gains kp, ki, kd must be >= 0");
    if (!(cfg.derivative_filter_tau >= 0.0))
        errors.push_back("controller.derivative_filter_tau must be >= 0");
    return errors;
}

double pid_step(double error, PidState& state, const ControllerConfig& cfg)
{
    const double limit = cfg.output_limit;
    const double increment = 0.5 * (error + state.previous_error) * cfg.dt;

    const double tau = cfg.derivative_filter_tau;
    state.derivative = (tau * state.derivative + (error - state.previous_error)) / (tau + cfg.dt);
    state.previous_error = error;

    const double p_term = cfg.kp * error;
    const double d_term = cfg.kd * state.derivative;

    double integral = state.integral + increment;
    if (cfg.ki > 0.0)
        integral = std::clamp(integral, -limit / cfg.ki, limit / cfg.ki);
    const double trial = p_term + cfg.ki * integral + d_term;
    if (std::abs(trial) > limit && increment * trial > 0.0)
        integral = state.integral;
    state.integral = integral;

    const double raw = p_term + cfg.ki * state.integral + d_term;
    state.saturated = std::abs(raw) > limit;
    return std::clamp(raw, -limit, limit);
}

SuspensionTable default_suspension_table()
{
    const double alpha[3] = {0.0, 2.0 * kPi / 3.0, 4.0 * kPi / 3.0};
    SuspensionTable table;
    for (int k = 0; k < kTeeth; ++k) {
        const double theta = 2.0 * kPi * k / kTeeth;
        for (int p = 0; p < 3; ++p)
            table(k, p) = (2.0 / 3.0) * std::cos(theta + alpha[p]);
    }
    return table;
}

CoilVector four_pole_pattern(double phase)
{
    CoilVector m;
    for (int k = 0; k < kTeeth; ++k)
        m[k] = std::cos(2.0 * (2.0 * kPi * k / kTeeth) - phase);
    return m;
}

std::vector<std::string> validate(const WindingConfig& cfg)
{
    std::vector<std::string> errors;
    if (!cfg.suspension.allFinite())
        errors.push_back("winding.suspension_table must be finite");
    if (!cfg.torque_pattern.allFinite())
        errors.push_back("winding.torque_pattern must be finite");
    if (!std::isfinite(cfg.torque_bias_amplitude))
        errors.push_back("winding.torque_bias_amplitude must be finite");
    if (!std::isfinite(cfg.dq_angle))
        errors.push_back("winding.dq_angle must be finite");
    return errors;
}

CoilVector superpose_coil_currents(const Eigen::Vector3d& suspension_uvw, double torque_amplitude,
                                   double injection, const CoilVector& injection_weights,
                                   const WindingConfig& winding)
{
    return winding.suspension * suspension_uvw + torque_amplitude * winding.torque_pattern +
           injection * injection_weights;
}

ControlCommand SuspensionController::update(double x_feedback, double y_feedback, double x_ref,
                                            double y_ref)
{
    ControlCommand cmd;
    cmd.e_x = x_ref - x_feedback;
    cmd.e_y = y_ref - y_feedback;
    if (enabled) {
        cmd.u_x = pid_step(cmd.e_x, pid_x, config);
        cmd.u_y = pid_step(cmd.e_y, pid_y, config);
        cmd.saturated = pid_x.saturated || pid_y.saturated;
    }
    const Eigen::Vector2d dq = xy_to_dq(cmd.u_x, cmd.u_y, winding.dq_angle);
    cmd.u_d = dq[0];
    cmd.u_q = dq[1];
    const Eigen::Vector3d uvw = dq_to_three_phase(cmd.u_d, cmd.u_q);
    cmd.i_u_star = uvw[0];
    cmd.i_v_star = uvw[1];
    cmd.i_w_star = uvw[2];
    cmd.coil_current_cmd = superpose_coil_currents(uvw, winding.torque_bias_amplitude, 0.0,
                                                   CoilVector::Zero(), winding);
    return cmd;
}

}  // namespace selfsense
