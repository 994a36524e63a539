#pragma once

#include <selfsense/sim_engine.hpp>

#include <string>
#include <vector>

namespace selfsense {

struct SelfTestCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Quick invariant checks against the given configuration: inductance
/// structure, voltage equation, force vs coenergy gradient, tooth-pitch
/// symmetry, demodulator projection, transforms, pattern purity and the
/// static sweep shape. Deterministic (fixed internal seed).
std::vector<SelfTestCheck> run_selftest(const SystemConfig& cfg);

}  // namespace selfsense
