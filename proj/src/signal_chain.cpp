#include <selfsense/signal_chain.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace selfsense {

CoilVector InjectionConfig::weights() const
{
    CoilVector w = CoilVector::Zero();
    for (std::size_t n = 0; n < injected_coils.size(); ++n)
        w[coil(injected_coils[n])] = n < polarity.size() ? polarity[n] : 1.0;
    return w;
}

std::vector<std::string> validate(const InjectionConfig& cfg)
{
    std::vector<std::string> errors;
    if (!(cfg.amplitude_Is > 0.0))
        errors.push_back("injection.amplitude_Is must be > 0");
    if (!(cfg.frequency_fs > 0.0))
        errors.push_back("injection.frequency_fs must be > 0");
    std::set<int> seen;
    for (int c : cfg.injected_coils) {
        if (c < 1 || c > kTeeth)
            errors.push_back("injection.injected_coils entries must lie in 1..12");
        else if (!seen.insert(c).second)
            errors.push_back("injection.injected_coils must not repeat a coil");
    }
    if (cfg.polarity.size() != cfg.injected_coils.size())
        errors.push_back("injection.polarity needs one entry per injected coil");
    if (!std::isfinite(cfg.demod_phase_offset))
        errors.push_back("injection.demod_phase_offset must be finite");
    return errors;
}

double injection_current(double t, const InjectionConfig& cfg)
{
    return cfg.amplitude_Is * std::sin(2.0 * kPi * cfg.frequency_fs * t);
}

double demod_carrier(double t, const InjectionConfig& cfg)
{
    return std::sin(2.0 * kPi * cfg.frequency_fs * t + cfg.demod_phase_offset);
}

int commensurate_window(double dt, const InjectionConfig& cfg, int periods)
{
    if (!(dt > 0.0) || periods < 1)
        throw DomainError("demodulator window: dt and period count must be positive");
    const double samples = periods / (cfg.frequency_fs * dt);
    const double rounded = std::round(samples);
    if (rounded < 1.0 || std::abs(samples - rounded) > 1e-9 * rounded)
        throw DomainError("demodulator window: dt does not divide the carrier period");
    return static_cast<int>(rounded);
}

DemodChannel::DemodChannel(int window_samples) : buffer_(Eigen::VectorXd::Zero(window_samples))
{
    if (window_samples < 1)
        throw DomainError("demodulator window must hold at least one sample");
}

void DemodChannel::push(double sample, double carrier)
{
    buffer_[head_] = sample * carrier;
    head_ = (head_ + 1) % buffer_.size();
    ++pushed_;
    // Full re-sum each sample: no running-sum drift over long runs.
    output_ = buffer_.mean();
}

DemodChannel demodulate(double sample_diff, double t, const InjectionConfig& cfg,
                        DemodChannel channel)
{
    channel.push(sample_diff, demod_carrier(t, cfg));
    return channel;
}

EstimatorState::EstimatorState(double dt, const InjectionConfig& cfg, int window_periods)
    : x_channel(commensurate_window(dt, cfg, window_periods)),
      y_channel(commensurate_window(dt, cfg, window_periods))
{
}

void EstimatorState::update(const CoilVector& v, double t, const InjectionConfig& cfg)
{
    const double carrier = demod_carrier(t, cfg);
    x_channel.push(v[coil(1)] - v[coil(7)], carrier);
    y_channel.push(v[coil(4)] - v[coil(10)], carrier);
    x_hat_raw = x_channel.output();
    y_hat_raw = y_channel.output();
    x_hat = cal_x.apply(x_hat_raw);
    y_hat = cal_y.apply(y_hat_raw);
}

EstimatorState estimate_position(const CoilVector& voltages, double t, const InjectionConfig& cfg,
                                 EstimatorState state)
{
    state.update(voltages, t, cfg);
    return state;
}

CalibrationFit calibrate(std::span<const CalibrationPoint> sweep)
{
    if (sweep.size() < 2)
        throw CalibrationError("calibration needs at least two sweep points");
    const auto [lo, hi] = std::minmax_element(
        sweep.begin(), sweep.end(),
        [](const CalibrationPoint& a, const CalibrationPoint& b) { return a.displacement < b.displacement; });
    if (!(hi->displacement > lo->displacement))
        throw CalibrationError("calibration sweep has no distinct displacements");

    const Eigen::Index n = static_cast<Eigen::Index>(sweep.size());
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd raw(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        design(r, 0) = sweep[r].displacement;
        design(r, 1) = 1.0;
        raw[r] = sweep[r].raw;
    }
    const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(raw);

    CalibrationFit fit;
    fit.slope = coef[0];
    fit.intercept = coef[1];
    if (!(std::abs(fit.slope) > 0.0) || !std::isfinite(fit.slope))
        throw CalibrationError("calibration sweep shows no response to displacement");
    fit.calibration = AxisCalibration{1.0 / fit.slope, fit.intercept};
    fit.residual_rms = std::sqrt((design * coef - raw).squaredNorm() / static_cast<double>(n));
    return fit;
}

}  // namespace selfsense
