#include "ipp/dynamics.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "ipp/error.hpp"

namespace ipp {

namespace {

constexpr double kPi = std::numbers::pi;

// Grouped coefficients of the drift, in the order they appear in the model.
struct Coefficients {
    double drag;      // pi rho D^3 / (8 m)
    double spin_drive; // pi rho D^4 CDD / (8 Ixx)
    double spin_damp;  // pi rho D^5 CLP / (16 Ixx)
    double magnus;     // pi rho D^4 RMCM CYPA / (16 Iyy)
    double pitch_damp; // pi rho D^5 CMQ / (16 Iyy)
    double restoring;  // pi rho D^3 RMCP CNA / (8 Iyy)
    double gyro;       // Ixx D / Iyy

    explicit Coefficients(const ProjectileParams& p) {
        const double D = p.D;
        const double D3 = D * D * D;
        drag = kPi * p.rho * D3 / (8.0 * p.m);
        spin_drive = kPi * p.rho * D3 * D * p.CDD / (8.0 * p.Ixx);
        spin_damp = kPi * p.rho * D3 * D * D * p.CLP / (16.0 * p.Ixx);
        magnus = kPi * p.rho * D3 * D * p.RMCM * p.CYPA / (16.0 * p.Iyy);
        pitch_damp = kPi * p.rho * D3 * D * D * p.CMQ / (16.0 * p.Iyy);
        restoring = kPi * p.rho * D3 * p.RMCP * p.CNA / (8.0 * p.Iyy);
        gyro = p.Ixx * D / p.Iyy;
    }
};

void check_domain(const MlmState& s, double speed) {
    if (!(std::abs(std::cos(s.theta)) > 1e-12)) {
        throw SingularityError("1/cos(theta)", "pitch angle reached +-pi/2 in the yaw equation");
    }
    if (!(speed > 1e-12)) {
        throw SingularityError("1/V", "total speed is not positive");
    }
}

} // namespace

StateVector mlm_drift(const MlmState& s, const ProjectileParams& params, const WindModel& wind,
                      std::optional<double> frozen_speed) {
    const double speed = frozen_speed.value_or(s.V);
    check_domain(s, speed);
    const Coefficients k(params);
    const double D = params.D;
    const double g = params.g;
    const double inv_v = 1.0 / speed;
    const double ct = std::cos(s.theta);
    const double st = std::sin(s.theta);
    const double vr = s.v_t - wind.vw;
    const double wr = s.w_t - wind.ww;

    StateVector f;
    f[kX] = D * ct;
    f[kY] = D * ct * s.psi + D * inv_v * s.v_t;
    f[kZ] = -D * st + D * ct * inv_v * s.w_t;
    f[kPhi] = D * inv_v * s.p_t;
    f[kTheta] = D * inv_v * s.q_t;
    f[kPsi] = D * inv_v * s.r_t / ct;
    f[kSpeed] = -k.drag * params.CX0 * s.V - D * g * st * inv_v;
    f[kVt] = -k.drag * params.CNA * vr - D * s.r_t;
    f[kWt] = -k.drag * params.CNA * wr + D * s.q_t + D * g * ct * inv_v;
    f[kPt] = k.spin_drive * s.V + k.spin_damp * s.p_t;
    f[kQt] = k.magnus * s.p_t * vr * inv_v + k.pitch_damp * s.q_t + k.restoring * wr -
             k.gyro * s.p_t * s.r_t * inv_v;
    f[kRt] = k.magnus * s.p_t * wr * inv_v + k.pitch_damp * s.r_t - k.restoring * vr +
             k.gyro * s.p_t * s.q_t * inv_v;
    return f;
}

StateMatrix mlm_jacobian(const MlmState& s, const ProjectileParams& params, const WindModel& wind,
                         std::optional<double> frozen_speed) {
    const double speed = frozen_speed.value_or(s.V);
    check_domain(s, speed);
    const Coefficients k(params);
    const double D = params.D;
    const double g = params.g;
    const double inv_v = 1.0 / speed;
    // d(1/V)/dV, zero when the reciprocal speed is frozen.
    const double dinv = frozen_speed ? 0.0 : -inv_v * inv_v;
    const double ct = std::cos(s.theta);
    const double st = std::sin(s.theta);
    const double vr = s.v_t - wind.vw;
    const double wr = s.w_t - wind.ww;

    StateMatrix J = StateMatrix::Zero();
    J(kX, kTheta) = -D * st;

    J(kY, kTheta) = -D * st * s.psi;
    J(kY, kPsi) = D * ct;
    J(kY, kSpeed) = D * dinv * s.v_t;
    J(kY, kVt) = D * inv_v;

    J(kZ, kTheta) = -D * ct - D * st * inv_v * s.w_t;
    J(kZ, kSpeed) = D * ct * dinv * s.w_t;
    J(kZ, kWt) = D * ct * inv_v;

    J(kPhi, kSpeed) = D * dinv * s.p_t;
    J(kPhi, kPt) = D * inv_v;

    J(kTheta, kSpeed) = D * dinv * s.q_t;
    J(kTheta, kQt) = D * inv_v;

    J(kPsi, kTheta) = D * inv_v * s.r_t * st / (ct * ct);
    J(kPsi, kSpeed) = D * dinv * s.r_t / ct;
    J(kPsi, kRt) = D * inv_v / ct;

    J(kSpeed, kTheta) = -D * g * ct * inv_v;
    J(kSpeed, kSpeed) = -k.drag * params.CX0 - D * g * st * dinv;

    J(kVt, kVt) = -k.drag * params.CNA;
    J(kVt, kRt) = -D;

    J(kWt, kTheta) = -D * g * st * inv_v;
    J(kWt, kSpeed) = D * g * ct * dinv;
    J(kWt, kWt) = -k.drag * params.CNA;
    J(kWt, kQt) = D;

    J(kPt, kSpeed) = k.spin_drive;
    J(kPt, kPt) = k.spin_damp;

    J(kQt, kSpeed) = (k.magnus * s.p_t * vr - k.gyro * s.p_t * s.r_t) * dinv;
    J(kQt, kVt) = k.magnus * s.p_t * inv_v;
    J(kQt, kWt) = k.restoring;
    J(kQt, kPt) = (k.magnus * vr - k.gyro * s.r_t) * inv_v;
    J(kQt, kQt) = k.pitch_damp;
    J(kQt, kRt) = -k.gyro * s.p_t * inv_v;

    J(kRt, kSpeed) = (k.magnus * s.p_t * wr + k.gyro * s.p_t * s.q_t) * dinv;
    J(kRt, kVt) = -k.restoring;
    J(kRt, kWt) = k.magnus * s.p_t * inv_v;
    J(kRt, kPt) = (k.magnus * wr + k.gyro * s.q_t) * inv_v;
    J(kRt, kQt) = k.gyro * s.p_t * inv_v;
    J(kRt, kRt) = k.pitch_damp;
    return J;
}

Vector3 CanardForces::total_force() const {
    Vector3 sum = Vector3::Zero();
    for (const CanardLoad& c : canards) {
        sum += c.force;
    }
    return sum;
}

Vector3 CanardForces::total_moment() const {
    Vector3 sum = Vector3::Zero();
    for (const CanardLoad& c : canards) {
        sum += c.moment;
    }
    return sum;
}

Vector3 canard_local_flow(const MlmState& s, int index, const CanardConfig& cfg,
                          const ProjectileParams& /*params*/, const WindModel& wind) {
    if (index < 0 || index > 3) {
        throw std::out_of_range("canard index must be 0..3");
    }
    const CanardSurface& c = cfg.surfaces[static_cast<std::size_t>(index)];
    const Vector3 omega(cfg.spin_coupled ? s.p_t : 0.0, s.q_t, s.r_t);
    const Vector3 arm(c.rx, c.ry, c.rz);
    return Vector3(s.V, s.v_t - wind.vw, s.w_t - wind.ww) + omega.cross(arm);
}

CanardForces canard_forces(const MlmState& s, const CanardAngles& lambdas, const CanardConfig& cfg,
                           const ProjectileParams& params, const WindModel& wind) {
    CanardForces out;
    for (int i = 0; i < 4; ++i) {
        const CanardSurface& surf = cfg.surfaces[static_cast<std::size_t>(i)];
        CanardLoad& load = out.canards[static_cast<std::size_t>(i)];
        load.flow = canard_local_flow(s, i, cfg, params, wind);
        const double u = load.flow.x();
        const double v = load.flow.y();
        const double w = load.flow.z();
        if (!(u > 0.0)) {
            throw SingularityError("atan(w/u)", "reversed axial inflow at canard " +
                                                    std::to_string(i + 1));
        }
        // Canards 1 and 3 (y-parallel) see the w inflow, 2 and 4 the v inflow.
        const bool y_pair = (i % 2 == 0);
        const double cross = y_pair ? w : v;
        load.alpha = lambdas[static_cast<std::size_t>(i)] + surf.alpha_sign * std::atan(cross / u);
        const double cl = cfg.c_l_alpha * load.alpha;
        const double cd = cfg.c_d0 + cfg.c_d2 * load.alpha * load.alpha + cfg.c_i * cl * cl;
        const double speed2 = load.flow.squaredNorm();
        const double qs = 0.5 * params.rho * speed2 * kPi * surf.diameter * surf.diameter / 4.0;
        load.lift = qs * cl;
        load.drag = qs * cd;
        load.mach = std::sqrt(speed2) / cfg.speed_of_sound;

        const double n = std::hypot(u, cross);
        if (y_pair) {
            load.force = Vector3(load.lift * w / n - load.drag * u / n, 0.0,
                                 -load.lift * u / n - load.drag * w / n);
        } else {
            load.force = Vector3(-load.lift * v / n - load.drag * u / n,
                                 load.lift * u / n - load.drag * v / n, 0.0);
        }
        Eigen::Matrix3d arm;
        arm << 0.0, -surf.rz, surf.ry,
            surf.rz, 0.0, -surf.rx,
            -surf.ry, surf.rx, 0.0;
        load.moment = arm * load.force;
    }
    return out;
}

StateVector apply_canards(const StateVector& drift, const CanardForces& f,
                          const ProjectileParams& params, const MlmState& s) {
    const double scale = params.D / s.V;
    const Vector3 force = f.total_force();
    const Vector3 moment = f.total_moment();
    StateVector out = drift;
    out[kSpeed] += scale * force.x() / params.m;
    out[kVt] += scale * force.y() / params.m;
    out[kWt] += scale * force.z() / params.m;
    out[kPt] += scale * moment.x() / params.Ixx;
    out[kQt] += scale * moment.y() / params.Iyy;
    out[kRt] += scale * moment.z() / params.Iyy;
    return out;
}

} // namespace ipp
