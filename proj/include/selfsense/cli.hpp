#pragma once

// Command-line front end.
//
//   selfsense <sweep|levitate|disturb|calibrate|selftest> [options]
//
// Exit codes (see kExit* below): 0 success, 1 usage, 2 configuration,
// 3 output I/O, 4 touchdown, 5 self-test failure, 6 calibration or
// model-domain error.

#include <iosfwd>

namespace selfsense {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitTouchdown = 4;
inline constexpr int kExitSelftest = 5;
inline constexpr int kExitScenario = 6;

/// Disturbance substituted by `disturb` when the config has none.
inline constexpr double kDefaultDisturbanceForce = 1.0;  // N, x axis step
inline constexpr double kDefaultDisturbanceStart = 0.1;  // s

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace selfsense
