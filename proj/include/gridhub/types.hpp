#pragma once

#include <complex>

#include <Eigen/Dense>

namespace gridhub {

using Complex = std::complex<double>;

using Mat3c = Eigen::Matrix3cd;
using Vec3c = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kSqrt3 = 1.7320508075688772;

/// kV line-to-line -> volts line-to-neutral.
inline double kv_ll_to_v_ln(double kv_ll) { return kv_ll * 1000.0 / kSqrt3; }

/// volts line-to-neutral -> kV line-to-line.
inline double v_ln_to_kv_ll(double v_ln) { return v_ln * kSqrt3 / 1000.0; }

}  // namespace gridhub
