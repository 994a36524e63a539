#include <selfsense/motor_model.hpp>

#include <cmath>

namespace selfsense {

CoilVector default_tooth_angles()
{
    CoilVector a;
    for (int k = 0; k < kTeeth; ++k)
        a[k] = 2.0 * kPi * k / kTeeth;
    return a;
}

std::vector<std::string> validate(const MotorParams& p)
{
    std::vector<std::string> errors;
    if (p.n_teeth != kTeeth)
        errors.push_back("motor.n_teeth must be 12");
    if (!(p.turns_N > 0.0))
        errors.push_back("motor.turns_N must be > 0");
    if (!(p.tooth_area_A > 0.0))
        errors.push_back("motor.tooth_area_A must be > 0");
    if (!(p.mu0 > 0.0))
        errors.push_back("motor.mu0 must be > 0");
    if (!(p.nominal_gap_g0 > 0.0))
        errors.push_back("motor.nominal_gap_g0 must be > 0");
    if (!(p.coil_resistance_R >= 0.0))
        errors.push_back("motor.coil_resistance_R must be >= 0");
    if (!(p.rotor_mass > 0.0))
        errors.push_back("motor.rotor_mass must be > 0");
    if (!std::isfinite(p.rotor_weight_bias))
        errors.push_back("motor.rotor_weight_bias must be finite");
    if (!(p.max_displacement_fraction > 0.0 && p.max_displacement_fraction < 1.0))
        errors.push_back("motor.max_displacement_fraction must lie in (0, 1)");
    const CoilVector expected = default_tooth_angles();
    if (!p.tooth_angle.isApprox(expected, 1e-12))
        errors.push_back("motor.tooth_angle must place coil k at 2*pi*(k-1)/12");
    return errors;
}

bool any_gap_clamped(double x, double y, const MotorParams& params)
{
    for (int k = 0; k < kTeeth; ++k)
        if (gap_clamped(x, y, params.tooth_angle[k], params))
            return true;
    return false;
}

CoilBank electrical_step(const CoilBank& bank, const CoilVector& applied_voltage,
                         const RotorState& rotor, double dt, const MotorParams& params)
{
    if (!(dt > 0.0))
        throw DomainError("electrical_step: dt must be positive");

    CoilVector inductance;
    for (int k = 0; k < kTeeth; ++k)
        inductance[k] = coil_inductance(
            gap_at_tooth(rotor.x, rotor.y, params.tooth_angle[k], params), params);

    const double R = params.coil_resistance_R;
    auto deriv = [&](double, const CoilVector& flux) -> CoilVector {
        return applied_voltage - R * flux.cwiseQuotient(inductance) - bank.back_emf;
    };

    CoilBank next = bank;
    next.flux_linkage = rk4_step(deriv, rotor.t, bank.flux_linkage, dt);
    next.current = next.flux_linkage.cwiseQuotient(inductance);
    next.terminal_voltage = applied_voltage;
    return next;
}

CoilBank current_drive_step(const CoilBank& previous, const CoilVector& commanded,
                            const RotorState& rotor, double dt, const MotorParams& params)
{
    if (!(dt > 0.0))
        throw DomainError("current_drive_step: dt must be positive");

    CoilBank next;
    next.back_emf = previous.back_emf;
    next.current = commanded;
    for (int k = 0; k < kTeeth; ++k) {
        const double theta = params.tooth_angle[k];
        const double g = gap_at_tooth(rotor.x, rotor.y, theta, params);
        const double dg_dt = gap_clamped(rotor.x, rotor.y, theta, params)
                                 ? 0.0
                                 : -(rotor.vx * std::cos(theta) + rotor.vy * std::sin(theta));
        const double di_dt = (commanded[k] - previous.current[k]) / dt;
        next.terminal_voltage[k] =
            coil_voltage(commanded[k], di_dt, g, dg_dt, params, previous.back_emf[k]);
        next.flux_linkage[k] = coil_inductance(g, params) * commanded[k];
    }
    return next;
}

}  // namespace selfsense
