#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ipp/dynamics.hpp"
#include "ipp/random_stream.hpp"
#include "ipp/scenario.hpp"
#include "ipp/state.hpp"

namespace ipp {

/// Treatment of the drift within one stochastic step.
enum class DriftScheme {
    Explicit,          ///< s + f(s) dt
    LinearlyImplicit,  ///< s + (I - dt J)^-1 f(s) dt, J the drift Jacobian
};

struct WienerIncrement {
    double dW1 = 0.0;
    double dW2 = 0.0;
    double dW3 = 0.0;
};

/// Three independent N(0, dt) draws.
WienerIncrement wiener_increments(RandomStream& stream, double dt);

/// Drift including the canard increments when a command is supplied.
StateVector total_drift(const MlmState& s, const Scenario& scenario,
                        const std::optional<CanardAngles>& command);

/// The noise-free part of one step.
MlmState drift_step(const MlmState& s, double dt, const Scenario& scenario,
                    const std::optional<CanardAngles>& command,
                    DriftScheme scheme = DriftScheme::LinearlyImplicit);

/**
 * @brief One Euler-Maruyama step.
 *
 * The drift part follows `scheme`; the additive noise (a1 dW1, a2 dW2,
 * a3 dW3) is added to x, y, z only. Exactly three normals are consumed.
 */
MlmState em_step(const MlmState& s, double dt, RandomStream& stream, const Scenario& scenario,
                 const std::optional<CanardAngles>& command = std::nullopt,
                 DriftScheme scheme = DriftScheme::LinearlyImplicit);

struct ImpactPoint {
    double tau = 0.0;
    double x = 0.0;
    double y = 0.0;

    bool operator==(const ImpactPoint&) const = default;
};

/// Linear interpolation of the ground crossing when prev.z < 0 <= next.z.
std::optional<ImpactPoint> detect_impact(double prev_tau, const MlmState& prev, double next_tau,
                                         const MlmState& next);

/// Noise-free vertical rate per caliber; positive once the arc descends.
double descent_rate(const MlmState& s, const ProjectileParams& params);

/// Guidance law invoked before every step.
class Controller {
public:
    virtual ~Controller() = default;
    virtual CanardAngles command(double tau, const MlmState& s) = 0;
};

using ControllerFactory = std::function<std::unique_ptr<Controller>()>;

struct Trajectory {
    std::vector<double> tau;
    std::vector<MlmState> states;
    std::optional<ImpactPoint> impact;
};

struct SimulationOptions {
    bool random_ic = false;  ///< draw the launch state instead of using the means
    DriftScheme scheme = DriftScheme::LinearlyImplicit;
    bool record = true;      ///< keep every record_every-th sample
};

/**
 * @brief Integrates one sample path until ground impact or the horizon.
 *
 * With random_ic the launch state comes from a stream derived from the
 * seed and substream of `stream`, which itself supplies only the Wiener
 * increments. Impact is accepted only after the arc has begun
 * to descend, so the launch point itself is never reported.
 */
Trajectory simulate_trajectory(const Scenario& scenario, RandomStream& stream,
                               Controller* controller = nullptr,
                               const SimulationOptions& options = {});

/// One-sigma ellipse of a 2-D Gaussian.
struct Ellipse {
    double cx = 0.0;
    double cy = 0.0;
    double semi_major = 0.0;
    double semi_minor = 0.0;
    double angle = 0.0; ///< major axis direction from +x [rad]
};

struct ImpactStats {
    std::size_t n = 0;
    double mean_x = 0.0;
    double mean_y = 0.0;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    double sd_x = 0.0;
    double sd_y = 0.0;
    Ellipse ellipse;
};

/// Sample statistics (unbiased covariance). Throws StatisticsError for n < 2.
ImpactStats impact_stats(const std::vector<ImpactPoint>& points);

/// Statistics of a given mean and covariance.
ImpactStats impact_stats(double mean_x, double mean_y, const Eigen::Matrix2d& cov, std::size_t n);

struct EnsembleResult {
    std::vector<std::optional<ImpactPoint>> runs; ///< indexed by run
    std::vector<ImpactPoint> impacts;             ///< impacting runs in index order
    std::size_t non_impacting = 0;
    std::size_t failed = 0;                       ///< runs that left the model domain
    ImpactStats stats;
};

struct EnsembleOptions {
    bool random_ic = false;
    DriftScheme scheme = DriftScheme::LinearlyImplicit;
    unsigned threads = 0; ///< 0 reads IPP_THREADS, then the hardware count
};

/// Worker count from IPP_THREADS (0 or unset means hardware concurrency).
unsigned ensemble_threads();

/**
 * @brief n independent sample paths; run i uses substream i of base_seed.
 *
 * Results are stored by run index and reduced in index order, so output is
 * independent of the thread count. Throws StatisticsError if fewer than two
 * runs impact.
 */
EnsembleResult run_ensemble(const Scenario& scenario, std::size_t n, std::uint64_t base_seed,
                            const EnsembleOptions& options = {},
                            const ControllerFactory& controller = nullptr);

} // namespace ipp
