#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ipp/dynamics.hpp"
#include "ipp/sde.hpp"

namespace ipp {

/// Reference path tabulated on strictly increasing downrange x.
struct DesiredTrajectory {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> z;

    /// Linear interpolation at downrange `xq`; throws OutOfRangeError
    /// outside [x.front(), x.back()].
    Vector3 at(double xq) const;
};

/// Zero-noise, canard-free path from the mean launch state, resampled on a
/// uniform x grid with `spacing` [ft].
DesiredTrajectory desired_trajectory(const Scenario& scenario, double spacing = 1.0);

/// Reads a CSV with header `x,y,z`. Throws ParseError on format problems and
/// ValidationError if x is not strictly increasing.
DesiredTrajectory load_desired_trajectory(const std::filesystem::path& path);

struct GuidanceErrors {
    double e1 = 0.0; ///< target minus current, x [ft]
    double e2 = 0.0; ///< y [ft]
    double e3 = 0.0; ///< z [ft]
    double theta_E = 0.0;
    double psi_E = 0.0;
    double alpha = 0.0; ///< angle of attack [rad]
    double beta = 0.0;  ///< sideslip [rad]
};

/// Errors toward the desired point `lookahead` ahead in x.
GuidanceErrors compute_errors(const MlmState& s, const DesiredTrajectory& d,
                              const ControlGains& gains);

/// How the deflection limit is shared between the roll and steering channels.
enum class Allocation {
    Clamp,    ///< mix first, then clamp each deflection independently
    Priority, ///< clamp pitch/yaw first; roll gets the remaining authority
};

struct CanardCommand {
    CanardAngles lambda{};
    double e_phi = 0.0;         ///< roll channel before allocation
    double e_theta = 0.0;
    double e_psi = 0.0;
    double e_phi_applied = 0.0; ///< roll channel after allocation
    bool saturated = false;
};

/// Roll angle wrapped to (-pi, pi].
double wrap_angle(double phi);

/**
 * @brief Canard deflections from the guidance errors.
 *
 * e_phi = Kp p + Kphi phi (phi wrapped), e_theta = Ktheta theta_E,
 * e_psi = Kpsi psi_E; lambda = (e_theta - e_phi, e_psi + e_phi,
 * e_theta + e_phi, e_psi - e_phi), limited to +-limit.
 */
CanardCommand feedback_law(const MlmState& s, const GuidanceErrors& err, const ControlGains& gains,
                           double limit, Allocation allocation = Allocation::Priority);

struct ControlLogEntry {
    double tau = 0.0;
    GuidanceErrors errors;
    CanardAngles lambda{};
    bool saturated = false;
};

/// Controller closing the loop around a desired trajectory. Outside the
/// tabulated range the steering channels are zeroed and only roll acts.
class GuidanceController : public Controller {
public:
    GuidanceController(const DesiredTrajectory& desired, const ControlGains& gains,
                       const CanardConfig& canards, Allocation allocation = Allocation::Priority,
                       bool keep_log = false);

    CanardAngles command(double tau, const MlmState& s) override;

    const std::vector<ControlLogEntry>& log() const { return log_; }

private:
    const DesiredTrajectory& desired_;
    ControlGains gains_;
    double limit_;
    Allocation allocation_;
    bool keep_log_;
    std::vector<ControlLogEntry> log_;
};

struct ClosedLoopResult {
    EnsembleResult controlled;
    EnsembleResult uncontrolled;
    double trace_ratio = 0.0; ///< trace(cov controlled) / trace(cov uncontrolled)
};

/**
 * @brief Paired ensembles with and without guidance over identical noise.
 *
 * The uncontrolled ensemble flies without canards. Throws ValidationError
 * if the scenario lacks canards or gains.
 */
ClosedLoopResult closed_loop_simulate(const Scenario& scenario, std::uint64_t base_seed,
                                      std::size_t n, const EnsembleOptions& options = {},
                                      Allocation allocation = Allocation::Priority);

} // namespace ipp
