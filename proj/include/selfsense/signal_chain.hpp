#pragma once

// High-frequency injection and synchronous demodulation.
//
// A sinusoidal sensing current is added to coils 1, 4, 7 and 10. The
// difference of the terminal voltages of opposing coils (1-7 for x, 4-10 for
// y) is multiplied by the carrier and averaged over an integer number of
// carrier periods; the result is proportional to the inductance imbalance and
// therefore to the rotor displacement.

#include <selfsense/types.hpp>

#include <span>
#include <string>
#include <vector>

namespace selfsense {

struct InjectionConfig {
    double amplitude_Is = 0.1;     // A
    double frequency_fs = 2000.0;  // Hz
    std::vector<int> injected_coils{1, 4, 7, 10};
    std::vector<double> polarity{1.0, 1.0, 1.0, 1.0};  // one entry per injected coil
    double demod_phase_offset = kPi / 2.0;

    /// Per-coil injection weight: polarity on injected coils, 0 elsewhere.
    CoilVector weights() const;
};

std::vector<std::string> validate(const InjectionConfig& cfg);

/// i_s(t) = Is sin(2 pi fs t)
double injection_current(double t, const InjectionConfig& cfg);

/// Demodulating reference sin(2 pi fs t + phase offset).
double demod_carrier(double t, const InjectionConfig& cfg);

/// Number of samples spanning `periods` carrier periods at step dt.
/// Throws DomainError unless that is an integer.
int commensurate_window(double dt, const InjectionConfig& cfg, int periods = 1);

/// Moving-average demodulator for one axis.
class DemodChannel {
public:
    DemodChannel() = default;
    explicit DemodChannel(int window_samples);

    /// Pushes sample * carrier and refreshes the mean. Before the window has
    /// filled, unwritten slots count as zero.
    void push(double sample, double carrier);

    double output() const { return output_; }
    bool filled() const { return pushed_ >= buffer_.size(); }
    int window_samples() const { return static_cast<int>(buffer_.size()); }
    const Eigen::VectorXd& buffer() const { return buffer_; }

private:
    Eigen::VectorXd buffer_;
    Eigen::Index head_ = 0;
    Eigen::Index pushed_ = 0;
    double output_ = 0.0;
};

DemodChannel demodulate(double sample_diff, double t, const InjectionConfig& cfg,
                        DemodChannel channel);

/// Affine map raw volts -> meters: x = gain * (raw - offset).
struct AxisCalibration {
    double gain = 1.0;    // m/V
    double offset = 0.0;  // V

    double apply(double raw) const { return gain * (raw - offset); }
};

struct EstimatorState {
    DemodChannel x_channel;
    DemodChannel y_channel;
    AxisCalibration cal_x;
    AxisCalibration cal_y;
    double x_hat_raw = 0.0;
    double y_hat_raw = 0.0;
    double x_hat = 0.0;
    double y_hat = 0.0;

    EstimatorState() = default;
    EstimatorState(double dt, const InjectionConfig& cfg, int window_periods = 1);

    int window_samples() const { return x_channel.window_samples(); }
    bool filled() const { return x_channel.filled() && y_channel.filled(); }

    /// Feeds v1 - v7 and v4 - v10 into the two channels and applies calibration.
    void update(const CoilVector& voltages, double t, const InjectionConfig& cfg);
};

EstimatorState estimate_position(const CoilVector& voltages, double t, const InjectionConfig& cfg,
                                 EstimatorState state);

struct CalibrationPoint {
    double displacement;  // m
    double raw;           // V
};

struct CalibrationFit {
    AxisCalibration calibration;
    double slope = 0.0;      // V/m
    double intercept = 0.0;  // V
    double residual_rms = 0.0;
};

/// Least-squares line raw = slope * x + intercept; gain = 1/slope,
/// offset = intercept. Throws CalibrationError on a degenerate sweep.
CalibrationFit calibrate(std::span<const CalibrationPoint> sweep);

}  // namespace selfsense
