#include <selfsense/selftest.hpp>

#include <complex>
#include <cstdio>
#include <random>

namespace selfsense {

namespace {

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

SelfTestCheck check(std::string name, double worst, double tolerance)
{
    return {std::move(name), worst <= tolerance, "worst " + sci(worst) + " (limit " + sci(tolerance) + ")"};
}

}  // namespace

std::vector<SelfTestCheck> run_selftest(const SystemConfig& cfg)
{
    const MotorParams& motor = cfg.motor;
    const double g0 = motor.nominal_gap_g0;
    std::mt19937_64 rng(20240607);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<SelfTestCheck> checks;

    {
        const double ref = coil_inductance(g0, motor) * g0;
        double worst = 0.0;
        for (double f : {0.2, 0.5, 1.0, 1.5, 1.9})
            worst = std::max(worst, std::abs(coil_inductance(f * g0, motor) * f * g0 - ref) / ref);
        checks.push_back(check("inductance L(g)*g constant", worst, 1e-14));
    }
    {
        int mismatches = 0;
        for (int n = 0; n < 200; ++n) {
            const double i = 2.0 * unit(rng), di = 1e3 * unit(rng), g = g0 * (1.0 + 0.5 * unit(rng));
            const double eb = 0.1 * unit(rng);
            const double expected = motor.coil_resistance_R * i + coil_inductance(g, motor) * di + eb;
            if (coil_voltage(i, di, g, 0.0, motor, eb) != expected)
                ++mismatches;
        }
        checks.push_back({"voltage equation recovery (dg/dt = 0)", mismatches == 0,
                          std::to_string(mismatches) + " bitwise mismatches in 200"});
    }
    {
        double worst = 0.0;
        for (int n = 0; n < 100; ++n) {
            CoilVector i;
            for (int k = 0; k < kTeeth; ++k)
                i[k] = 2.0 * unit(rng);
            const double r = 0.3 * g0 * std::abs(unit(rng));
            const double a = kPi * unit(rng);
            const double x = r * std::cos(a), y = r * std::sin(a);
            const Eigen::Vector2d f = radial_force(x, y, i, motor);
            const CoilVectorT<long double> il = i.cast<long double>();
            const long double h = 1e-8L * g0;
            const long double lx = x, ly = y;
            const long double fx =
                (coenergy(lx + h, ly, il, motor) - coenergy(lx - h, ly, il, motor)) / (2 * h);
            const long double fy =
                (coenergy(lx, ly + h, il, motor) - coenergy(lx, ly - h, il, motor)) / (2 * h);
            const Eigen::Vector2d fd(static_cast<double>(fx), static_cast<double>(fy));
            worst = std::max(worst, (f - fd).norm() / f.norm());
        }
        checks.push_back(check("radial force = coenergy gradient", worst, 1e-6));
    }
    {
        double worst = 0.0;
        const double pitch = 2.0 * kPi / kTeeth;
        const Eigen::Rotation2Dd rot(pitch);
        for (int n = 0; n < 50; ++n) {
            CoilVector i, shifted;
            for (int k = 0; k < kTeeth; ++k)
                i[k] = 2.0 * unit(rng);
            for (int k = 0; k < kTeeth; ++k)
                shifted[(k + 1) % kTeeth] = i[k];
            const Eigen::Vector2d p(0.3 * g0 * unit(rng), 0.3 * g0 * unit(rng));
            const Eigen::Vector2d q = rot * p;
            const Eigen::Vector2d f = radial_force(p.x(), p.y(), i, motor);
            const Eigen::Vector2d fr = radial_force(q.x(), q.y(), shifted, motor);
            worst = std::max(worst, (fr - rot * f).norm() / f.norm());
        }
        checks.push_back(check("tooth-pitch rotational symmetry", worst, 1e-12));
    }
    {
        const int window = commensurate_window(cfg.scenario.dt, cfg.injection, cfg.estimator.window_periods);
        const double fs = cfg.injection.frequency_fs;
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            const double a = unit(rng), b = unit(rng), c = unit(rng), f2 = fs * (1.0 + 0.5 * std::abs(unit(rng)));
            auto signal = [&](double t) {
                return a * std::cos(2 * kPi * fs * t) + b * std::sin(2 * kPi * fs * t) + c * std::sin(2 * kPi * f2 * t);
            };
            DemodChannel ch(window);
            std::vector<double> samples;
            const int start = 37;
            for (int n = start; n < start + 3 * window; ++n) {
                const double t = n * cfg.scenario.dt;
                ch = demodulate(signal(t), t, cfg.injection, ch);
                samples.push_back(signal(t));
            }
            // Single-bin projection over the last window using index phases.
            const int periods = cfg.estimator.window_periods;
            const int n0 = start + 2 * window;
            std::complex<double> acc = 0.0;
            for (int m = 0; m < window; ++m)
                acc += samples[2 * window + m] * std::polar(1.0, 2 * kPi * periods * m / window);
            const double phase0 = 2 * kPi * fs * n0 * cfg.scenario.dt + cfg.injection.demod_phase_offset;
            const double oracle = (std::polar(1.0, phase0) * acc).imag() / window;
            worst = std::max(worst, std::abs(ch.output() - oracle) / std::max(std::abs(oracle), 1e-3));
        }
        checks.push_back(check("demodulator = single-bin projection", worst, 1e-9));
    }
    {
        double worst = 0.0;
        double worst_sum = 0.0;
        for (int n = 0; n < 100; ++n) {
            const double ux = unit(rng), uy = unit(rng), ang = kPi * unit(rng);
            const Eigen::Vector2d dq = xy_to_dq(ux, uy, ang);
            const Eigen::Vector2d back = dq_to_xy(dq[0], dq[1], ang);
            worst = std::max(worst, (back - Eigen::Vector2d(ux, uy)).norm());
            worst_sum = std::max(worst_sum, std::abs(dq_to_three_phase(dq[0], dq[1]).sum()));
        }
        checks.push_back(check("xy -> dq -> xy round trip", worst, 1e-12));
        checks.push_back(check("three-phase commands sum to zero", worst_sum, 0.0));
    }
    {
        const Eigen::Vector3d uvw = dq_to_three_phase(0.7, -0.3);
        const CoilVector s = cfg.winding.suspension * uvw;
        const CoilVector m = cfg.winding.torque_pattern;
        auto leak = [](const CoilVector& v, int keep) {
            double total = 0.0, outside = 0.0;
            for (int h = 0; h < kTeeth; ++h) {
                std::complex<double> bin = 0.0;
                for (int k = 0; k < kTeeth; ++k)
                    bin += v[k] * std::polar(1.0, -2 * kPi * h * k / kTeeth);
                total += std::norm(bin);
                if (h != keep && h != kTeeth - keep)
                    outside += std::norm(bin);
            }
            return outside / total;
        };
        checks.push_back(check("suspension pattern is 2-pole only", leak(s, 1), 1e-12));
        checks.push_back(check("bias pattern is 4-pole only", leak(m, 2), 1e-12));
    }
    {
        const auto rows = run_static_sweep(cfg);
        const auto summary = summarize_sweep(rows);
        checks.push_back({"static sweep strictly monotonic", summary.strictly_monotonic,
                          std::to_string(summary.points) + " points, span " + sci(summary.on_axis_span) + " V"});
    }
    return checks;
}

}  // namespace selfsense
