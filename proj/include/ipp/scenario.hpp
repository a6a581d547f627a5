#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "ipp/random_stream.hpp"
#include "ipp/state.hpp"

namespace ipp {

/// Physical constants and aerodynamic coefficients of the airframe.
struct ProjectileParams {
    double D = 0.0;    ///< reference diameter [ft]
    double m = 0.0;    ///< mass [slug]
    double rho = 0.0;  ///< air density [slug/ft^3]
    double g = 0.0;    ///< gravity [ft/s^2]
    double Ixx = 0.0;  ///< axial inertia [slug ft^2]
    double Iyy = 0.0;  ///< transverse inertia [slug ft^2]
    double CX0 = 0.0;  ///< zero-yaw axial force
    double CDD = 0.0;  ///< roll driving
    double CLP = 0.0;  ///< roll damping
    double CNA = 0.0;  ///< normal force slope
    double CYPA = 0.0; ///< Magnus force
    double CMQ = 0.0;  ///< pitch damping
    double RMCP = 0.0; ///< center of mass to center of pressure [ft]
    double RMCM = 0.0; ///< center of mass to Magnus center [ft]

    bool operator==(const ProjectileParams&) const = default;
};

/// Constant wind expressed in the fixed frame.
struct WindModel {
    double vw = 0.0; ///< lateral [ft/s]
    double ww = 0.0; ///< normal [ft/s]

    bool operator==(const WindModel&) const = default;
};

/// Diffusion amplitudes of the additive white noise on x, y, z.
struct NoiseModel {
    double a1 = 1.0;
    double a2 = 1.0;
    double a3 = 1.0;

    bool operator==(const NoiseModel&) const = default;
};

struct GaussianComponent {
    double mean = 0.0;
    double sd = 0.0;

    bool operator==(const GaussianComponent&) const = default;
};

/// Independent Gaussian initial conditions. u, v, w are the launch velocity
/// components; V is formed from them when a state is drawn.
struct InitialDistribution {
    GaussianComponent x, y, z;
    GaussianComponent phi, theta, psi;
    GaussianComponent u, v, w;
    GaussianComponent p, q, r;

    /// Same means, every standard deviation zero.
    InitialDistribution point_mass() const;

    /// The deterministic launch state at the means.
    MlmState mean_state() const;

    bool operator==(const InitialDistribution&) const = default;
};

struct CanardSurface {
    double diameter = 0.0; ///< characteristic length D_i [ft]
    double area = 0.0;     ///< S_i = pi D_i^2 / 4 [ft^2]
    double rx = 0.0;       ///< lever arm from the center of gravity [ft]
    double ry = 0.0;
    double rz = 0.0;
    double alpha_sign = 1.0; ///< sign of the inflow-angle term in alpha_i

    bool operator==(const CanardSurface&) const = default;
};

/**
 * @brief Four identical control canards.
 *
 * Canards 1 and 3 lie along the body y axis and produce X/Z forces;
 * canards 2 and 4 lie along z and produce X/Y forces. When `spin_coupled`
 * is false the canard section is roll-decoupled from the airframe, so the
 * body roll rate does not enter the canard inflow.
 */
struct CanardConfig {
    std::array<CanardSurface, 4> surfaces{};
    double c_l_alpha = 0.0;
    double c_d0 = 0.0;
    double c_d2 = 0.0;
    double c_i = 0.0;
    double speed_of_sound = 1116.45; ///< [ft/s], Mach bookkeeping only
    double deflection_limit = 0.35;  ///< [rad]
    bool spin_coupled = false;

    bool operator==(const CanardConfig&) const = default;
};

struct ControlGains {
    double Kp = 0.0;
    double Kphi = 0.0;
    double Ktheta = 0.0;
    double Kpsi = 0.0;
    double lookahead = 0.0; ///< downrange offset of the guidance target [ft]

    bool operator==(const ControlGains&) const = default;
};

struct IntegrationSettings {
    double step = 0.5;         ///< SDE step in calibers of travel
    double max_span = 6000.0;  ///< horizon in calibers
    double moment_step = 0.0125; ///< RK4 step of the moment equations
    int record_every = 1;      ///< trajectory decimation

    bool operator==(const IntegrationSettings&) const = default;
};

struct Scenario {
    ProjectileParams params;
    WindModel wind;
    NoiseModel noise;
    InitialDistribution init;
    std::optional<CanardConfig> canards;
    std::optional<ControlGains> gains;
    IntegrationSettings integration;

    /// Copy with all diffusion amplitudes zeroed.
    Scenario without_noise() const;

    bool operator==(const Scenario&) const = default;
};

/// Parses a JSON scenario document. Throws ParseError on malformed input,
/// unknown keys or missing required keys, and ValidationError on invariant
/// violations.
Scenario load_scenario(std::string_view text);
Scenario load_scenario_file(const std::filesystem::path& path);

/// JSON text that load_scenario reads back to an identical Scenario.
std::string serialize_scenario(const Scenario& scenario);

/// Throws ValidationError naming the first violated invariant.
void validate(const Scenario& scenario);

/// Built-in fin-stabilized projectile with the four-canard guidance kit.
Scenario nominal_scenario();

/// Independent Gaussian draw of every launch state; V = |(u, v, w)|.
MlmState sample_initial_state(const InitialDistribution& dist, RandomStream& stream);

} // namespace ipp
