#pragma once

#include <Eigen/Core>

namespace ipp {

using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;

/// Body-to-inertial rotation for the roll-pitch-yaw sequence; maps (u, v, w)
/// to (xdot, ydot, zdot).
Matrix3 rotation_matrix(double phi, double theta, double psi);

/// Maps body rates (p, q, r) to Euler angle rates. Throws SingularityError
/// when cos(theta) vanishes to machine tolerance.
Matrix3 euler_rate_matrix(double phi, double theta);

/// Maps Euler angle rates to body rates; inverse of euler_rate_matrix.
Matrix3 body_rate_matrix(double phi, double theta);

/// Body velocities, Euler angles and body rates of the full rigid body.
struct FullKinematicState {
    double phi = 0.0;
    double theta = 0.0;
    double psi = 0.0;
    double u = 0.0; ///< [ft/s]
    double v = 0.0;
    double w = 0.0;
    double p = 0.0; ///< [rad/s]
    double q = 0.0;
    double r = 0.0;

    Vector3 inertial_velocity() const {
        return rotation_matrix(phi, theta, psi) * Vector3(u, v, w);
    }
    Vector3 euler_rates() const { return euler_rate_matrix(phi, theta) * Vector3(p, q, r); }
};

} // namespace ipp
