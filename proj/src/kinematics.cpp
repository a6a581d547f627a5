#include "ipp/kinematics.hpp"

#include <cmath>
#include <limits>

#include "ipp/error.hpp"

namespace ipp {

Matrix3 rotation_matrix(double phi, double theta, double psi) {
    const double sf = std::sin(phi), cf = std::cos(phi);
    const double st = std::sin(theta), ct = std::cos(theta);
    const double ss = std::sin(psi), cs = std::cos(psi);
    Matrix3 R;
    R << ct * cs, sf * st * cs - ss * cf, st * cs * cf + ss * sf,
        ct * ss, sf * st * ss + cs * cf, st * ss * cf - cs * sf,
        -st, sf * ct, ct * cf;
    return R;
}

Matrix3 euler_rate_matrix(double phi, double theta) {
    const double ct = std::cos(theta);
    if (std::abs(ct) < 1e3 * std::numeric_limits<double>::epsilon()) {
        throw SingularityError("1/cos(theta)", "Euler rate matrix is singular at |theta| = pi/2");
    }
    const double sf = std::sin(phi), cf = std::cos(phi);
    const double tt = std::sin(theta) / ct;
    Matrix3 E;
    E << 1.0, sf * tt, cf * tt,
        0.0, cf, -sf,
        0.0, sf / ct, cf / ct;
    return E;
}

Matrix3 body_rate_matrix(double phi, double theta) {
    const double sf = std::sin(phi), cf = std::cos(phi);
    const double st = std::sin(theta), ct = std::cos(theta);
    Matrix3 L;
    L << 1.0, 0.0, -st,
        0.0, cf, sf * ct,
        0.0, -sf, cf * ct;
    return L;
}

} // namespace ipp
