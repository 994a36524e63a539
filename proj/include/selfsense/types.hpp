#pragma once

#include <Eigen/Dense>

#include <numbers>
#include <stdexcept>
#include <string>

namespace selfsense {

inline constexpr int kTeeth = 12;
inline constexpr double kPi = std::numbers::pi;

template <typename Scalar>
using CoilVectorT = Eigen::Matrix<Scalar, kTeeth, 1>;
using CoilVector = CoilVectorT<double>;

template <typename Scalar>
using Vector2T = Eigen::Matrix<Scalar, 2, 1>;

/// Coil numbers follow the winding diagram (1..12, coil 1 on +x).
/// Storage is zero-based.
constexpr int coil(int number) { return number - 1; }

/// Raised for out-of-domain physical arguments (non-positive gap, dt <= 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace selfsense
