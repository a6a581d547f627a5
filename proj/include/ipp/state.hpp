#pragma once

#include <Eigen/Core>

namespace ipp {

inline constexpr int kStateDim = 12;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;

/// Slot of each modified-linear state inside a StateVector.
enum StateIndex : int {
    kX = 0,
    kY,
    kZ,
    kPhi,
    kTheta,
    kPsi,
    kSpeed,
    kVt,
    kWt,
    kPt,
    kQt,
    kRt,
};

/**
 * @brief The twelve states of the modified linear projectile model.
 *
 * Positions are inertial with z positive down (altitude is -z). The lateral
 * velocities and angular rates are the non-rolling ("tilde") components.
 * The independent variable of the model is arc length in calibers, so
 * d/dtau = (D / V) d/dt.
 */
struct MlmState {
    double x = 0.0;     ///< downrange [ft]
    double y = 0.0;     ///< crossrange [ft]
    double z = 0.0;     ///< down [ft]
    double phi = 0.0;   ///< roll [rad]
    double theta = 0.0; ///< pitch [rad]
    double psi = 0.0;   ///< yaw [rad]
    double V = 0.0;     ///< total speed [ft/s]
    double v_t = 0.0;   ///< lateral velocity, fixed frame [ft/s]
    double w_t = 0.0;   ///< normal velocity, fixed frame [ft/s]
    double p_t = 0.0;   ///< roll rate [rad/s]
    double q_t = 0.0;   ///< pitch rate, fixed frame [rad/s]
    double r_t = 0.0;   ///< yaw rate, fixed frame [rad/s]

    StateVector to_vector() const {
        StateVector v;
        v << x, y, z, phi, theta, psi, V, v_t, w_t, p_t, q_t, r_t;
        return v;
    }

    static MlmState from_vector(const StateVector& v) {
        return {v[kX], v[kY], v[kZ], v[kPhi], v[kTheta], v[kPsi],
                v[kSpeed], v[kVt], v[kWt], v[kPt], v[kQt], v[kRt]};
    }

    bool operator==(const MlmState&) const = default;
};

} // namespace ipp
