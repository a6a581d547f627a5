#include "ipp/sde.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ipp/error.hpp"

namespace ipp {

namespace {

// Seed offset of the launch-state draws, kept apart from the noise stream so
// fixed- and random-IC ensembles see identical Wiener paths.
constexpr std::uint64_t kLaunchSalt = 0x6c8e9cf570932bd5ULL;

} // namespace

WienerIncrement wiener_increments(RandomStream& stream, double dt) {
    const double scale = std::sqrt(dt);
    WienerIncrement w;
    w.dW1 = scale * stream.normal();
    w.dW2 = scale * stream.normal();
    w.dW3 = scale * stream.normal();
    return w;
}

StateVector total_drift(const MlmState& s, const Scenario& scenario,
                        const std::optional<CanardAngles>& command) {
    StateVector f = mlm_drift(s, scenario.params, scenario.wind);
    if (command) {
        if (!scenario.canards) {
            throw ValidationError("canards", "a canard command requires a canard configuration");
        }
        const CanardForces loads =
            canard_forces(s, *command, *scenario.canards, scenario.params, scenario.wind);
        f = apply_canards(f, loads, scenario.params, s);
    }
    return f;
}

MlmState drift_step(const MlmState& s, double dt, const Scenario& scenario,
                    const std::optional<CanardAngles>& command, DriftScheme scheme) {
    const StateVector x = s.to_vector();
    const StateVector f = total_drift(s, scenario, command);
    if (scheme == DriftScheme::Explicit) {
        return MlmState::from_vector(x + dt * f);
    }
    // Positions appear in no right-hand side, so the Jacobian's first three
    // columns vanish and only the 9x9 attitude/velocity block needs a solve.
    constexpr int kPos = 3;
    constexpr int kRest = kStateDim - kPos;
    const StateMatrix J = mlm_jacobian(s, scenario.params, scenario.wind);
    const Eigen::Matrix<double, kRest, kRest> A =
        Eigen::Matrix<double, kRest, kRest>::Identity() - dt * J.bottomRightCorner<kRest, kRest>();
    const Eigen::Matrix<double, kRest, 1> db = A.partialPivLu().solve(dt * f.tail<kRest>());
    StateVector next;
    next.head<kPos>() = x.head<kPos>() + dt * f.head<kPos>() + dt * J.topRightCorner<kPos, kRest>() * db;
    next.tail<kRest>() = x.tail<kRest>() + db;
    return MlmState::from_vector(next);
}

MlmState em_step(const MlmState& s, double dt, RandomStream& stream, const Scenario& scenario,
                 const std::optional<CanardAngles>& command, DriftScheme scheme) {
    if (!(dt > 0.0)) {
        throw ValidationError("dt", "step must be positive");
    }
    MlmState next = drift_step(s, dt, scenario, command, scheme);
    const WienerIncrement w = wiener_increments(stream, dt);
    next.x += scenario.noise.a1 * w.dW1;
    next.y += scenario.noise.a2 * w.dW2;
    next.z += scenario.noise.a3 * w.dW3;
    return next;
}

std::optional<ImpactPoint> detect_impact(double prev_tau, const MlmState& prev, double next_tau,
                                         const MlmState& next) {
    if (!(prev.z < 0.0 && next.z >= 0.0)) {
        return std::nullopt;
    }
    const double frac = -prev.z / (next.z - prev.z);
    return ImpactPoint{prev_tau + frac * (next_tau - prev_tau), prev.x + frac * (next.x - prev.x),
                       prev.y + frac * (next.y - prev.y)};
}

double descent_rate(const MlmState& s, const ProjectileParams& params) {
    return -params.D * std::sin(s.theta) + params.D * std::cos(s.theta) * s.w_t / s.V;
}

Trajectory simulate_trajectory(const Scenario& scenario, RandomStream& stream,
                               Controller* controller, const SimulationOptions& options) {
    const IntegrationSettings& in = scenario.integration;
    const double dt = in.step;
    const auto steps = static_cast<long long>(std::ceil(in.max_span / dt));

    Trajectory traj;
    MlmState s = scenario.init.mean_state();
    if (options.random_ic) {
        RandomStream launch(splitmix64(stream.seed() ^ kLaunchSalt), stream.substream());
        s = sample_initial_state(scenario.init, launch);
    }
    if (options.record) {
        traj.tau.push_back(0.0);
        traj.states.push_back(s);
    }
    bool descending = false;
    for (long long k = 0; k < steps; ++k) {
        const double tau = static_cast<double>(k) * dt;
        const double next_tau = static_cast<double>(k + 1) * dt;
        std::optional<CanardAngles> command;
        if (controller != nullptr) {
            command = controller->command(tau, s);
        }
        descending = descending || descent_rate(s, scenario.params) > 0.0;
        const MlmState next = em_step(s, dt, stream, scenario, command, options.scheme);
        if (!std::isfinite(next.x) || !std::isfinite(next.z) || !std::isfinite(next.V)) {
            throw SingularityError("state", "non-finite state at tau = " + std::to_string(next_tau));
        }
        const bool last = descending ? static_cast<bool>(detect_impact(tau, s, next_tau, next))
                                     : false;
        if (options.record && ((k + 1) % in.record_every == 0 || last)) {
            traj.tau.push_back(next_tau);
            traj.states.push_back(next);
        }
        if (last) {
            traj.impact = detect_impact(tau, s, next_tau, next);
            break;
        }
        s = next;
    }
    return traj;
}

ImpactStats impact_stats(double mean_x, double mean_y, const Eigen::Matrix2d& cov, std::size_t n) {
    ImpactStats st;
    st.n = n;
    st.mean_x = mean_x;
    st.mean_y = mean_y;
    st.cov = 0.5 * (cov + cov.transpose());
    st.sd_x = std::sqrt(std::max(0.0, st.cov(0, 0)));
    st.sd_y = std::sqrt(std::max(0.0, st.cov(1, 1)));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(st.cov);
    const Eigen::Vector2d values = eig.eigenvalues().cwiseMax(0.0);
    const Eigen::Vector2d major = eig.eigenvectors().col(1);
    st.ellipse = Ellipse{mean_x, mean_y, std::sqrt(values[1]), std::sqrt(values[0]),
                         std::atan2(major.y(), major.x())};
    return st;
}

ImpactStats impact_stats(const std::vector<ImpactPoint>& points) {
    const std::size_t n = points.size();
    if (n < 2) {
        throw StatisticsError("impact statistics need at least 2 impacts, got " + std::to_string(n));
    }
    double mx = 0.0, my = 0.0;
    for (const ImpactPoint& p : points) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const ImpactPoint& p : points) {
        const Eigen::Vector2d d(p.x - mx, p.y - my);
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(n - 1);
    return impact_stats(mx, my, cov, n);
}

unsigned ensemble_threads() {
    unsigned threads = 0;
    if (const char* env = std::getenv("IPP_THREADS"); env != nullptr && *env != '\0') {
        try {
            threads = static_cast<unsigned>(std::stoul(env));
        } catch (const std::exception&) {
            throw ValidationError("IPP_THREADS", "must be a non-negative integer");
        }
    }
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    return threads;
}

EnsembleResult run_ensemble(const Scenario& scenario, std::size_t n, std::uint64_t base_seed,
                            const EnsembleOptions& options, const ControllerFactory& controller) {
    if (n < 2) {
        throw ValidationError("runs", "an ensemble needs at least 2 runs");
    }
    enum class Outcome { Impact, NoImpact, Failed };
    std::vector<std::optional<ImpactPoint>> runs(n);
    std::vector<Outcome> outcome(n, Outcome::NoImpact);

    SimulationOptions sim;
    sim.random_ic = options.random_ic;
    sim.scheme = options.scheme;
    sim.record = false;

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < n; i = next++) {
            RandomStream stream(base_seed, i);
            std::unique_ptr<Controller> ctl = controller ? controller() : nullptr;
            try {
                const Trajectory t = simulate_trajectory(scenario, stream, ctl.get(), sim);
                runs[i] = t.impact;
                outcome[i] = t.impact ? Outcome::Impact : Outcome::NoImpact;
            } catch (const SingularityError&) {
                outcome[i] = Outcome::Failed;
            }
        }
    };

    const unsigned threads =
        static_cast<unsigned>(std::min<std::size_t>(options.threads ? options.threads : ensemble_threads(), n));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (std::thread& t : pool) {
            t.join();
        }
    }

    EnsembleResult result;
    result.runs = std::move(runs);
    for (std::size_t i = 0; i < n; ++i) {
        switch (outcome[i]) {
        case Outcome::Impact: result.impacts.push_back(*result.runs[i]); break;
        case Outcome::NoImpact: ++result.non_impacting; break;
        case Outcome::Failed: ++result.failed; break;
        }
    }
    result.stats = impact_stats(result.impacts);
    return result;
}

} // namespace ipp
