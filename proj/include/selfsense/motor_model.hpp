#pragma once

// Lumped model of the 12-tooth bearingless hysteresis motor.
//
// Each stator coil is a single reluctance element whose inductance follows
// L(g) = N^2 mu0 A / (2 g) of its local air gap. Coils are magnetically
// uncoupled. The rotor is a point mass in the radial plane, pulled by the
// gradient of the magnetic coenergy sum(1/2 L_k i_k^2).

#include <selfsense/integrator.hpp>
#include <selfsense/types.hpp>

#include <cmath>
#include <concepts>
#include <string>
#include <vector>

namespace selfsense {

/// Tooth k (zero-based) sits at 2*pi*k/12: coil 1 on +x, 4 on +y, 7 on -x, 10 on -y.
CoilVector default_tooth_angles();

struct MotorParams {
    int n_teeth = kTeeth;
    double turns_N = 100.0;
    double tooth_area_A = 8.0e-5;      // m^2, 8 mm tooth x 10 mm stack
    double mu0 = 4.0e-7 * kPi;         // H/m
    double nominal_gap_g0 = 0.5e-3;    // m
    double coil_resistance_R = 1.0;    // ohm
    double rotor_mass = 0.15;          // kg
    double rotor_weight_bias = 0.0;    // N, acts along -y
    double max_displacement_fraction = 0.9;
    CoilVector tooth_angle = default_tooth_angles();

    /// Radius at which the rotor is considered to touch the stator bore.
    double touchdown_radius() const { return max_displacement_fraction * nominal_gap_g0; }
    double min_gap() const { return (1.0 - max_displacement_fraction) * nominal_gap_g0; }
    double inductance_constant() const { return turns_N * turns_N * mu0 * tooth_area_A / 2.0; }
};

/// Every violated invariant, one message per field; empty when valid.
std::vector<std::string> validate(const MotorParams& params);

struct RotorState {
    double x = 0.0;
    double y = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double t = 0.0;
};

struct CoilBank {
    CoilVector current = CoilVector::Zero();
    CoilVector flux_linkage = CoilVector::Zero();
    CoilVector terminal_voltage = CoilVector::Zero();
    CoilVector back_emf = CoilVector::Zero();
};

// ---------------------------------------------------------------------------
// Geometry and inductance
// ---------------------------------------------------------------------------

/// First-order air gap under a tooth for a rotor displaced by (x, y),
/// clamped from below at params.min_gap().
template <typename Scalar>
Scalar gap_at_tooth(const Scalar& x, const Scalar& y, const Scalar& theta,
                    const MotorParams& params)
{
    using std::cos;
    using std::sin;
    const Scalar g = Scalar(params.nominal_gap_g0) - x * cos(theta) - y * sin(theta);
    const Scalar floor(params.min_gap());
    return g < floor ? floor : g;
}

inline bool gap_clamped(double x, double y, double theta, const MotorParams& params)
{
    return params.nominal_gap_g0 - x * std::cos(theta) - y * std::sin(theta) < params.min_gap();
}

template <typename Scalar>
CoilVectorT<Scalar> gaps(const Scalar& x, const Scalar& y, const MotorParams& params)
{
    CoilVectorT<Scalar> g;
    for (int k = 0; k < kTeeth; ++k)
        g[k] = gap_at_tooth(x, y, Scalar(params.tooth_angle[k]), params);
    return g;
}

bool any_gap_clamped(double x, double y, const MotorParams& params);

template <typename Scalar>
Scalar coil_inductance(const Scalar& g, const MotorParams& params)
{
    if (!(g > Scalar(0)))
        throw DomainError("coil_inductance: air gap must be positive");
    return Scalar(params.inductance_constant()) / g;
}

/// Terminal voltage v = R i + L di/dt + i (dL/dg) dg/dt + E_b.
/// With dg_dt == 0 the result is bitwise R i + L di/dt + E_b.
template <typename Scalar>
Scalar coil_voltage(const Scalar& i, const Scalar& di_dt, const Scalar& g, const Scalar& dg_dt,
                    const MotorParams& params, const Scalar& back_emf = Scalar(0))
{
    const Scalar L = coil_inductance(g, params);
    const Scalar dL_dg = -L / g;
    return Scalar(params.coil_resistance_R) * i + L * di_dt + i * dL_dg * dg_dt + back_emf;
}

// ---------------------------------------------------------------------------
// Force
// ---------------------------------------------------------------------------

/// Magnetic coenergy W = sum 1/2 L_k(g_k) i_k^2 at rotor position (x, y).
template <typename Scalar>
Scalar coenergy(const Scalar& x, const Scalar& y, const CoilVectorT<Scalar>& currents,
                const MotorParams& params)
{
    Scalar w(0);
    for (int k = 0; k < kTeeth; ++k) {
        const Scalar g = gap_at_tooth(x, y, Scalar(params.tooth_angle[k]), params);
        w += Scalar(0.5) * coil_inductance(g, params) * currents[k] * currents[k];
    }
    return w;
}

/// Analytic gradient of the coenergy: dL_k/dx = (L_k/g_k) cos(theta_k),
/// dL_k/dy = (L_k/g_k) sin(theta_k).
template <typename Scalar>
Vector2T<Scalar> radial_force(const Scalar& x, const Scalar& y,
                              const CoilVectorT<Scalar>& currents, const MotorParams& params)
{
    using std::cos;
    using std::sin;
    Vector2T<Scalar> f = Vector2T<Scalar>::Zero();
    for (int k = 0; k < kTeeth; ++k) {
        const Scalar theta(params.tooth_angle[k]);
        const Scalar g = gap_at_tooth(x, y, theta, params);
        const Scalar dL = coil_inductance(g, params) / g;
        const Scalar w = Scalar(0.5) * currents[k] * currents[k] * dL;
        f[0] += w * cos(theta);
        f[1] += w * sin(theta);
    }
    return f;
}

inline Eigen::Vector2d radial_force(const RotorState& rotor, const CoilVector& currents,
                                    const MotorParams& params)
{
    return radial_force(rotor.x, rotor.y, currents, params);
}

// ---------------------------------------------------------------------------
// Dynamics
// ---------------------------------------------------------------------------

/// Voltage-driven coils: integrates d(lambda_k)/dt = v_k - R i_k - E_b,k with
/// i_k = lambda_k / L_k over one RK4 step. The rotor is held where it is.
CoilBank electrical_step(const CoilBank& bank, const CoilVector& applied_voltage,
                         const RotorState& rotor, double dt, const MotorParams& params);

/// Ideal current sources: currents take the commanded values and the
/// terminal voltage is reported from coil_voltage with a backward-difference
/// di/dt against the previous bank and the analytic gap rate.
CoilBank current_drive_step(const CoilBank& previous, const CoilVector& commanded,
                            const RotorState& rotor, double dt, const MotorParams& params);

inline bool is_touchdown(const RotorState& rotor, const MotorParams& params)
{
    return std::hypot(rotor.x, rotor.y) >= params.touchdown_radius();
}

/// Advances m x'' = Fx, m y'' = Fy - weight_bias by one RK4 step. `force`
/// is called as force(t, state) -> Eigen::Vector2d at every stage.
template <typename ForceFn>
    requires(!std::convertible_to<ForceFn, Eigen::Vector2d>)
RotorState mechanical_step(const RotorState& rotor, ForceFn&& force, double dt,
                           const MotorParams& params)
{
    if (!(dt > 0.0))
        throw DomainError("mechanical_step: dt must be positive");
    using State = Eigen::Vector4d;
    const double inv_m = 1.0 / params.rotor_mass;
    auto deriv = [&](double t, const State& s) -> State {
        const RotorState r{s[0], s[1], s[2], s[3], t};
        const Eigen::Vector2d f = force(t, r);
        return State(s[2], s[3], f[0] * inv_m, (f[1] - params.rotor_weight_bias) * inv_m);
    };
    const State next =
        rk4_step(deriv, rotor.t, State(rotor.x, rotor.y, rotor.vx, rotor.vy), dt);
    return RotorState{next[0], next[1], next[2], next[3], rotor.t + dt};
}

inline RotorState mechanical_step(const RotorState& rotor, const Eigen::Vector2d& force,
                                  double dt, const MotorParams& params)
{
    return mechanical_step(
        rotor, [&](double, const RotorState&) { return force; }, dt, params);
}

}  // namespace selfsense
