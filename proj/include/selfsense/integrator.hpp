#pragma once

namespace selfsense {

/// One classical fourth-order Runge-Kutta step of dS/dt = f(t, S).
/// State is any Eigen vector type; f must return the same type.
template <typename State, typename Derivative>
State rk4_step(Derivative&& f, double t, const State& state, double h)
{
    const double half = 0.5 * h;
    const State k1 = f(t, state);
    const State k2 = f(t + half, State(state + half * k1));
    const State k3 = f(t + half, State(state + half * k2));
    const State k4 = f(t + h, State(state + h * k3));
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace selfsense
