#pragma once

#include <array>
#include <optional>

#include "ipp/kinematics.hpp"
#include "ipp/scenario.hpp"
#include "ipp/state.hpp"

namespace ipp {

/**
 * @brief Right-hand side of the modified linear projectile model.
 *
 * Derivatives are per caliber of travel. When `frozen_speed` is given every
 * 1/V factor uses it instead of the state speed (the V equation's own drag
 * term still uses V). Throws SingularityError if cos(theta) or V vanishes.
 */
StateVector mlm_drift(const MlmState& s, const ProjectileParams& params, const WindModel& wind,
                      std::optional<double> frozen_speed = std::nullopt);

/// Analytic Jacobian of mlm_drift with respect to the state vector.
StateMatrix mlm_jacobian(const MlmState& s, const ProjectileParams& params, const WindModel& wind,
                         std::optional<double> frozen_speed = std::nullopt);

/// Deflection angles of the four canards [rad].
using CanardAngles = std::array<double, 4>;

/// Force and moment contribution of one canard, in body axes.
struct CanardLoad {
    Vector3 force = Vector3::Zero();  ///< (Xci, Yci, Zci) [lbf]
    Vector3 moment = Vector3::Zero(); ///< (Lci, Mci, Nci) [ft lbf]
    Vector3 flow = Vector3::Zero();   ///< (uci, vci, wci) [ft/s]
    double alpha = 0.0;               ///< angle of attack [rad]
    double lift = 0.0;                ///< [lbf]
    double drag = 0.0;                ///< [lbf]
    double mach = 0.0;
};

struct CanardForces {
    std::array<CanardLoad, 4> canards{};

    Vector3 total_force() const;
    Vector3 total_moment() const;
};

/**
 * @brief Air-relative flow velocity at canard `index` (0-based).
 *
 * The lateral components are taken relative to the wind. Angular rates enter
 * through omega x r; the roll rate is included only for a spin-coupled canard
 * section.
 */
Vector3 canard_local_flow(const MlmState& s, int index, const CanardConfig& cfg,
                          const ProjectileParams& params, const WindModel& wind = {});

/// Lift, drag, resolved forces and lever-arm moments of all four canards.
/// Throws SingularityError if the axial inflow at a canard is not positive.
CanardForces canard_forces(const MlmState& s, const CanardAngles& lambdas, const CanardConfig& cfg,
                           const ProjectileParams& params, const WindModel& wind = {});

/// Adds the summed canard loads to the V, v~, w~ (force / m) and p~, q~, r~
/// (moment / inertia) channels, each scaled by D/V.
StateVector apply_canards(const StateVector& drift, const CanardForces& f,
                          const ProjectileParams& params, const MlmState& s);

} // namespace ipp
