#pragma once

// Scenario configuration files.
//
// INI layout, one section per module:
//
//   [motor]       geometry and electrical constants
//   [injection]   sensing current and demodulation phase
//   [estimator]   window length and calibration
//   [controller]  PID gains and output limit
//   [winding]     bias amplitude, dq angle, pattern tables
//   [scenario]    kind, time steps, sweep grid, initial state, disturbance
//
// Missing keys keep their defaults; unknown sections or keys are errors.
// Overrides use dotted "section.key=value" syntax.

#include <selfsense/sim_engine.hpp>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace selfsense {

/// Carries every problem found, parse and validation alike.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Every "section.key" the loader understands.
std::vector<std::string> known_config_keys();

SystemConfig parse_config(std::istream& in, std::span<const std::string> overrides = {},
                          const std::string& source_name = "<config>");

SystemConfig load_config(const std::filesystem::path& path,
                         std::span<const std::string> overrides = {});

/// Defaults with overrides applied and validated.
SystemConfig config_from_overrides(std::span<const std::string> overrides);

/// Full configuration in INI form; doubles are written with 17 significant
/// digits so parse_config(format_config(c)) reproduces c exactly.
std::string format_config(const SystemConfig& cfg);

/// [estimator] fragment that fixes the calibration to the given fits.
std::string calibration_fragment(const CalibrationFit& x, const CalibrationFit& y);

}  // namespace selfsense
