#include "oracles.hpp"

#include <selfsense/motor_model.hpp>

#include <doctest.h>

#include <random>

using namespace selfsense;

namespace {

CoilVector random_currents(std::mt19937_64& rng, double span = 2.0)
{
    std::uniform_real_distribution<double> u(-span, span);
    CoilVector i;
    for (int k = 0; k < kTeeth; ++k)
        i[k] = u(rng);
    return i;
}

}  // namespace

TEST_CASE("gap at tooth")
{
    const MotorParams p;
    const double g0 = p.nominal_gap_g0, d = 0.1 * g0;
    for (double th : {0.0, 0.7, kPi / 2, 3.0})
        CHECK(gap_at_tooth(0.0, 0.0, th, p) == g0);
    CHECK(gap_at_tooth(d, 0.0, 0.0, p) == doctest::Approx(g0 - d).epsilon(1e-15));
    CHECK(gap_at_tooth(d, 0.0, kPi / 2, p) == doctest::Approx(g0).epsilon(1e-15));
}

TEST_CASE("gap clamps at the minimum and flags it")
{
    const MotorParams p;
    const double far = 0.95 * p.nominal_gap_g0;
    CHECK(gap_at_tooth(far, 0.0, 0.0, p) == p.min_gap());
    CHECK(gap_clamped(far, 0.0, 0.0, p));
    CHECK(any_gap_clamped(far, 0.0, p));
    CHECK_FALSE(any_gap_clamped(0.5 * p.nominal_gap_g0, 0.0, p));
}

TEST_CASE("coil inductance value")
{
    MotorParams p;
    p.tooth_area_A = 1.0e-4;
    const double L = coil_inductance(0.5e-3, p);
    CHECK(L == doctest::Approx(static_cast<double>(oracle::inductance(100.0L, 1.0e-4L, 0.5e-3L))).epsilon(1e-14));
    CHECK(L == doctest::Approx(1.2566e-3).epsilon(1e-4));
}

TEST_CASE("inductance scaling")
{
    MotorParams p;
    const double g = 0.37e-3;
    CHECK(coil_inductance(2 * g, p) == doctest::Approx(coil_inductance(g, p) / 2).epsilon(1e-15));
    const double base = coil_inductance(g, p);
    p.turns_N *= 2;
    CHECK(coil_inductance(g, p) == doctest::Approx(4 * base).epsilon(1e-15));
}

TEST_CASE("inductance rejects non-positive gap")
{
    const MotorParams p;
    CHECK_THROWS_AS(coil_inductance(0.0, p), DomainError);
    CHECK_THROWS_AS(coil_inductance(-1e-4, p), DomainError);
    CHECK_THROWS_AS(coil_voltage(1.0, 0.0, 0.0, 0.0, p), DomainError);
}

TEST_CASE("L(g) g is constant")
{
    const MotorParams p;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    const double ref = coil_inductance(p.nominal_gap_g0, p) * p.nominal_gap_g0;
    for (int n = 0; n < 200; ++n) {
        const double g = u(rng) * p.nominal_gap_g0;
        CHECK(coil_inductance(g, p) * g == doctest::Approx(ref).epsilon(1e-14));
    }
}

TEST_CASE("coil voltage: DC is R i")
{
    MotorParams p;
    p.coil_resistance_R = 2.5;
    CHECK(coil_voltage(0.4, 0.0, p.nominal_gap_g0, 0.0, p) == doctest::Approx(1.0));
}

TEST_CASE("coil voltage: sinusoidal amplitude matches phasor")
{
    MotorParams p;
    p.tooth_area_A = 1.0e-4;
    const double g = 0.5e-3, I = 0.1, f = 2000.0, w = 2 * kPi * f;
    const double L = static_cast<double>(oracle::inductance(100.0L, 1.0e-4L, 0.5e-3L));
    const double expected = I * std::hypot(p.coil_resistance_R, w * L);
    double peak = 0.0;
    for (int n = 0; n < 20000; ++n) {
        const double t = n * 2.5e-8;
        peak = std::max(peak, std::abs(coil_voltage(I * std::sin(w * t), I * w * std::cos(w * t), g, 0.0, p)));
    }
    CHECK(peak == doctest::Approx(expected).epsilon(1e-6));
    CHECK(expected == doctest::Approx(1.582).epsilon(1e-3));
}

TEST_CASE("coil voltage: opposing coils agree when centered")
{
    const MotorParams p;
    CoilBank prev;
    CoilVector cmd = CoilVector::Zero();
    cmd[coil(1)] = cmd[coil(7)] = 0.8;
    const CoilBank b = current_drive_step(prev, cmd, RotorState{}, 5e-6, p);
    CHECK(b.terminal_voltage[coil(1)] == b.terminal_voltage[coil(7)]);
}

TEST_CASE("coil voltage with static gap is bitwise R i + L di/dt + Eb")
{
    MotorParams p;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n = 0; n < 5000; ++n) {
        p.coil_resistance_R = 0.1 + 3.0 * std::abs(u(rng));
        const double i = 2 * u(rng), di = 1e3 * u(rng), eb = u(rng);
        const double g = p.nominal_gap_g0 * (1.0 + 0.5 * u(rng));
        const double L = p.turns_N * p.turns_N * p.mu0 * p.tooth_area_A / 2.0 / g;
        REQUIRE(coil_voltage(i, di, g, 0.0, p, eb) == p.coil_resistance_R * i + L * di + eb);
    }
}

TEST_CASE("coil voltage includes the moving-gap term")
{
    const MotorParams p;
    const double i = 0.7, g = 0.4e-3, dg = 0.01;
    const double L = coil_inductance(g, p);
    CHECK(coil_voltage(i, 0.0, g, dg, p) == doctest::Approx(p.coil_resistance_R * i - i * L / g * dg));
}

TEST_CASE("radial force simple cases")
{
    const MotorParams p;
    CHECK(radial_force(1e-5, -2e-5, CoilVector::Zero().eval(), p).norm() == 0.0);

    CoilVector i = CoilVector::Zero();
    i[coil(1)] = i[coil(7)] = 1.0;
    const Eigen::Vector2d centered = radial_force(0.0, 0.0, i, p);
    CHECK(std::abs(centered.x()) < 1e-15);
    CHECK(std::abs(centered.y()) < 1e-15);

    const double x = 0.05 * p.nominal_gap_g0;
    const Eigen::Vector2d f = radial_force(x, 0.0, i, p);
    const Eigen::Vector2d ref = oracle::fd_force(x, 0.0, i, p);
    CHECK(f.x() > 0.0);
    CHECK(ref.x() > 0.0);
    CHECK(f.x() == doctest::Approx(ref.x()).epsilon(1e-6));
}

TEST_CASE("radial force equals the coenergy gradient")
{
    const MotorParams p;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n = 0; n < 300; ++n) {
        const CoilVector i = random_currents(rng);
        const double x = 0.3 * p.nominal_gap_g0 * u(rng) / std::sqrt(2.0);
        const double y = 0.3 * p.nominal_gap_g0 * u(rng) / std::sqrt(2.0);
        const Eigen::Vector2d f = radial_force(x, y, i, p);
        const Eigen::Vector2d ref = oracle::fd_force(x, y, i, p);
        REQUIRE((f - ref).norm() / ref.norm() < 1e-6);
    }
}

TEST_CASE("tooth-pitch rotational symmetry")
{
    const MotorParams p;
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Eigen::Rotation2Dd rot(2 * kPi / kTeeth);
    for (int n = 0; n < 200; ++n) {
        const CoilVector i = random_currents(rng);
        CoilVector shifted;
        for (int k = 0; k < kTeeth; ++k)
            shifted[(k + 1) % kTeeth] = i[k];
        const Eigen::Vector2d r(0.2 * p.nominal_gap_g0 * u(rng), 0.2 * p.nominal_gap_g0 * u(rng));
        const Eigen::Vector2d q = rot * r;
        const Eigen::Vector2d f = radial_force(r.x(), r.y(), i, p);
        const Eigen::Vector2d fr = radial_force(q.x(), q.y(), shifted, p);
        REQUIRE((fr - rot * f).norm() / f.norm() < 1e-12);
    }
}

TEST_CASE("electrical step: steady state holds")
{
    const MotorParams p;
    CoilBank bank;
    bank.current.setConstant(0.3);
    const RotorState rotor{1e-5, -2e-5, 0, 0, 0};
    for (int k = 0; k < kTeeth; ++k)
        bank.flux_linkage[k] = coil_inductance(gap_at_tooth(rotor.x, rotor.y, p.tooth_angle[k], p), p) * 0.3;
    const CoilVector v = CoilVector::Constant(p.coil_resistance_R * 0.3);
    CoilBank next = bank;
    for (int n = 0; n < 100; ++n)
        next = electrical_step(next, v, rotor, 5e-6, p);
    CHECK((next.current - bank.current).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(next.terminal_voltage == v);
}

TEST_CASE("electrical step: RL step response")
{
    const MotorParams p;
    CoilBank bank;
    CoilVector v = CoilVector::Zero();
    v[coil(4)] = 2.0;
    const double dt = 5e-6, L = p.inductance_constant() / p.nominal_gap_g0;
    RotorState rotor;
    for (int n = 1; n <= 1000; ++n) {
        bank = electrical_step(bank, v, rotor, dt, p);
        rotor.t = n * dt;
        if (n % 100 == 0)
            REQUIRE(bank.current[coil(4)] ==
                    doctest::Approx(oracle::rl_step(2.0, p.coil_resistance_R, L, rotor.t)).epsilon(1e-9));
    }
    CHECK(bank.current[coil(1)] == 0.0);
}

TEST_CASE("electrical step: passive decay and flux identity")
{
    const MotorParams p;
    const RotorState rotor{4e-5, 3e-5, 0, 0, 0};
    CoilBank bank;
    for (int k = 0; k < kTeeth; ++k) {
        bank.current[k] = 0.1 * (k + 1);
        bank.flux_linkage[k] = coil_inductance(gap_at_tooth(rotor.x, rotor.y, p.tooth_angle[k], p), p) * bank.current[k];
    }
    CoilVector last = bank.current;
    for (int n = 0; n < 500; ++n) {
        bank = electrical_step(bank, CoilVector::Zero(), rotor, 5e-6, p);
        for (int k = 0; k < kTeeth; ++k) {
            const double L = coil_inductance(gap_at_tooth(rotor.x, rotor.y, p.tooth_angle[k], p), p);
            REQUIRE(std::abs(bank.flux_linkage[k] - L * bank.current[k]) <= 1e-12 * std::abs(bank.flux_linkage[k]));
            REQUIRE(bank.current[k] < last[k]);
            REQUIRE(bank.current[k] > 0.0);
        }
        last = bank.current;
    }
}

TEST_CASE("dynamics reject non-positive dt")
{
    const MotorParams p;
    CHECK_THROWS_AS(electrical_step(CoilBank{}, CoilVector::Zero(), RotorState{}, 0.0, p), DomainError);
    CHECK_THROWS_AS(current_drive_step(CoilBank{}, CoilVector::Zero(), RotorState{}, -1.0, p), DomainError);
    CHECK_THROWS_AS(mechanical_step(RotorState{}, Eigen::Vector2d::Zero(), 0.0, p), DomainError);
}

TEST_CASE("mechanical step")
{
    const MotorParams p;
    SUBCASE("at rest without force only time advances")
    {
        const RotorState r0{1e-5, 2e-5, 0, 0, 0.1};
        const RotorState r1 = mechanical_step(r0, Eigen::Vector2d::Zero(), 5e-6, p);
        CHECK(r1.x == r0.x);
        CHECK(r1.y == r0.y);
        CHECK(r1.vx == 0.0);
        CHECK(r1.vy == 0.0);
        CHECK(r1.t == doctest::Approx(0.100005));
    }
    SUBCASE("constant force from rest is ballistic")
    {
        const Eigen::Vector2d f(0.3, -0.2);
        RotorState r;
        for (int n = 0; n < 400; ++n)
            r = mechanical_step(r, f, 5e-6, p);
        CHECK(r.x == doctest::Approx(f.x() * r.t * r.t / (2 * p.rotor_mass)).epsilon(1e-12));
        CHECK(r.y == doctest::Approx(f.y() * r.t * r.t / (2 * p.rotor_mass)).epsilon(1e-12));
    }
    SUBCASE("rotating the force rotates the displacement")
    {
        RotorState a, b;
        for (int n = 0; n < 100; ++n) {
            a = mechanical_step(a, Eigen::Vector2d(0.5, 0.2), 5e-6, p);
            b = mechanical_step(b, Eigen::Vector2d(-0.2, 0.5), 5e-6, p);
        }
        CHECK(b.x == doctest::Approx(-a.y).epsilon(1e-14));
        CHECK(b.y == doctest::Approx(a.x).epsilon(1e-14));
    }
    SUBCASE("weight bias pulls along -y")
    {
        MotorParams heavy = p;
        heavy.rotor_weight_bias = 1.5;
        const RotorState r = mechanical_step(RotorState{}, Eigen::Vector2d::Zero(), 1e-3, heavy);
        CHECK(r.vy == doctest::Approx(-1.5 / p.rotor_mass * 1e-3));
    }
}

TEST_CASE("mechanical step converges at fourth order")
{
    const MotorParams p;
    const double w = 2 * kPi * 2000.0;
    std::vector<double> hs, errs;
    for (double h : {20e-6, 10e-6, 5e-6, 2.5e-6}) {
        RotorState r;
        auto force = [&](double t, const RotorState&) { return Eigen::Vector2d(std::sin(w * t), 0.0); };
        for (long n = 0; n < std::lround(2e-3 / h); ++n)
            r = mechanical_step(r, force, h, p);
        hs.push_back(h);
        errs.push_back(std::abs(r.x - oracle::ballistic_sine(1.0, w, p.rotor_mass, r.t)));
    }
    const double slope = oracle::loglog_slope(hs, errs);
    CHECK(slope >= 3.7);
    CHECK(slope <= 4.3);
}

TEST_CASE("touchdown radius")
{
    const MotorParams p;
    CHECK_FALSE(is_touchdown(RotorState{0.89 * p.nominal_gap_g0, 0, 0, 0, 0}, p));
    CHECK(is_touchdown(RotorState{0.7 * p.nominal_gap_g0, 0.7 * p.nominal_gap_g0, 0, 0, 0}, p));
}

TEST_CASE("motor parameter validation")
{
    CHECK(validate(MotorParams{}).empty());
    MotorParams bad;
    bad.nominal_gap_g0 = 0.0;
    bad.rotor_mass = -1.0;
    bad.max_displacement_fraction = 1.0;
    const auto errors = validate(bad);
    CHECK(errors.size() == 3);
    CHECK(errors[0].find("nominal_gap_g0") != std::string::npos);
}
