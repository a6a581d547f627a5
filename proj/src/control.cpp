#include "ipp/control.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ipp/error.hpp"

namespace ipp {

Vector3 DesiredTrajectory::at(double xq) const {
    if (x.size() < 2 || !(xq >= x.front() && xq <= x.back())) {
        throw OutOfRangeError("desired trajectory lookup at x = " + std::to_string(xq) +
                              " is outside the tabulated range");
    }
    auto it = std::upper_bound(x.begin(), x.end(), xq);
    std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - x.begin()), x.size() - 1);
    const std::size_t lo = hi - 1;
    const double t = (xq - x[lo]) / (x[hi] - x[lo]);
    return Vector3(xq, y[lo] + t * (y[hi] - y[lo]), z[lo] + t * (z[hi] - z[lo]));
}

DesiredTrajectory desired_trajectory(const Scenario& scenario, double spacing) {
    Scenario sc = scenario.without_noise();
    sc.canards.reset();
    sc.integration.record_every = 1;
    RandomStream stream(0);
    const Trajectory path = simulate_trajectory(sc, stream);
    if (!path.impact) {
        throw HorizonError("nominal trajectory does not reach the ground within the horizon");
    }
    std::vector<double> xs, ys, zs;
    for (const MlmState& s : path.states) {
        xs.push_back(s.x);
        ys.push_back(s.y);
        zs.push_back(s.z);
    }
    DesiredTrajectory d;
    const double x_end = xs.back();
    std::size_t j = 0;
    for (double xq = xs.front(); xq <= x_end; xq += spacing) {
        while (j + 2 < xs.size() && xs[j + 1] < xq) {
            ++j;
        }
        const double t = (xq - xs[j]) / (xs[j + 1] - xs[j]);
        d.x.push_back(xq);
        d.y.push_back(ys[j] + t * (ys[j + 1] - ys[j]));
        d.z.push_back(zs[j] + t * (zs[j + 1] - zs[j]));
    }
    return d;
}

DesiredTrajectory load_desired_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open desired trajectory " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("desired trajectory file is empty");
    }
    line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
    if (line != "x,y,z") {
        throw ParseError("desired trajectory header must be x,y,z");
    }
    DesiredTrajectory d;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream ss(line);
        double v[3];
        char comma = 0;
        if (!(ss >> v[0] >> comma) || comma != ',' || !(ss >> v[1] >> comma) || comma != ',' ||
            !(ss >> v[2])) {
            throw ParseError("desired trajectory row " + std::to_string(row) + " is malformed");
        }
        if (!d.x.empty() && !(v[0] > d.x.back())) {
            throw ValidationError("x", "desired trajectory x must be strictly increasing (row " +
                                           std::to_string(row) + ")");
        }
        d.x.push_back(v[0]);
        d.y.push_back(v[1]);
        d.z.push_back(v[2]);
    }
    if (d.x.size() < 2) {
        throw ParseError("desired trajectory needs at least 2 rows");
    }
    return d;
}

GuidanceErrors compute_errors(const MlmState& s, const DesiredTrajectory& d,
                              const ControlGains& gains) {
    const Vector3 target = d.at(s.x + gains.lookahead);
    GuidanceErrors e;
    e.e1 = target.x() - s.x;
    e.e2 = target.y() - s.y;
    e.e3 = target.z() - s.z;
    const double u = std::sqrt(std::max(0.0, s.V * s.V - s.v_t * s.v_t - s.w_t * s.w_t));
    e.alpha = std::atan2(s.w_t, u);
    e.beta = std::atan2(s.v_t, u);
    e.theta_E = e.alpha - std::atan(e.e3 / e.e1);
    e.psi_E = -e.beta + std::atan(e.e2 / e.e1);
    return e;
}

double wrap_angle(double phi) {
    const double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(phi + std::numbers::pi, two_pi);
    if (w <= 0.0) {
        w += two_pi;
    }
    return w - std::numbers::pi;
}

CanardCommand feedback_law(const MlmState& s, const GuidanceErrors& err, const ControlGains& gains,
                           double limit, Allocation allocation) {
    CanardCommand c;
    c.e_phi = gains.Kp * s.p_t + gains.Kphi * wrap_angle(s.phi);
    c.e_theta = gains.Ktheta * err.theta_E;
    c.e_psi = gains.Kpsi * err.psi_E;
    double e_theta = c.e_theta;
    double e_psi = c.e_psi;
    double e_phi = c.e_phi;
    if (allocation == Allocation::Priority) {
        e_theta = std::clamp(e_theta, -limit, limit);
        e_psi = std::clamp(e_psi, -limit, limit);
        const double room = limit - std::max(std::abs(e_theta), std::abs(e_psi));
        e_phi = std::clamp(e_phi, -room, room);
    }
    c.e_phi_applied = e_phi;
    const CanardAngles raw = {e_theta - e_phi, e_psi + e_phi, e_theta + e_phi, e_psi - e_phi};
    c.saturated = e_phi != c.e_phi || e_theta != c.e_theta || e_psi != c.e_psi;
    for (std::size_t i = 0; i < 4; ++i) {
        c.lambda[i] = std::clamp(raw[i], -limit, limit);
        c.saturated = c.saturated || c.lambda[i] != raw[i];
    }
    return c;
}

GuidanceController::GuidanceController(const DesiredTrajectory& desired, const ControlGains& gains,
                                       const CanardConfig& canards, Allocation allocation,
                                       bool keep_log)
    : desired_(desired),
      gains_(gains),
      limit_(canards.deflection_limit),
      allocation_(allocation),
      keep_log_(keep_log) {}

CanardAngles GuidanceController::command(double tau, const MlmState& s) {
    GuidanceErrors err;
    ControlGains gains = gains_;
    try {
        err = compute_errors(s, desired_, gains_);
    } catch (const OutOfRangeError&) {
        gains.Ktheta = 0.0;
        gains.Kpsi = 0.0;
    }
    const CanardCommand cmd = feedback_law(s, err, gains, limit_, allocation_);
    if (keep_log_) {
        log_.push_back(ControlLogEntry{tau, err, cmd.lambda, cmd.saturated});
    }
    return cmd.lambda;
}

ClosedLoopResult closed_loop_simulate(const Scenario& scenario, std::uint64_t base_seed,
                                      std::size_t n, const EnsembleOptions& options,
                                      Allocation allocation) {
    if (!scenario.canards) {
        throw ValidationError("canards", "closed-loop simulation requires canards");
    }
    if (!scenario.gains) {
        throw ValidationError("gains", "closed-loop simulation requires control gains");
    }
    const DesiredTrajectory desired = desired_trajectory(scenario);
    const ControlGains gains = *scenario.gains;
    const CanardConfig canards = *scenario.canards;

    Scenario bare = scenario;
    bare.canards.reset();

    ClosedLoopResult r;
    r.uncontrolled = run_ensemble(bare, n, base_seed, options);
    r.controlled = run_ensemble(scenario, n, base_seed, options, [&]() {
        return std::make_unique<GuidanceController>(desired, gains, canards, allocation);
    });
    r.trace_ratio = r.controlled.stats.cov.trace() / r.uncontrolled.stats.cov.trace();
    return r;
}

} // namespace ipp
