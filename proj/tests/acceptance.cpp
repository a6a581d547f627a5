#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipp/control.hpp"
#include "ipp/kinematics.hpp"
#include "ipp/moments.hpp"
#include "ipp/sde.hpp"

namespace fs = std::filesystem;
using namespace ipp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0, double e = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d, e);
    return buf;
}

Outcome moment_mean_vs_deterministic() {
    const auto t0 = Clock::now();
    Scenario sc = nominal_scenario().without_noise();
    sc.canards.reset();
    sc.init = sc.init.point_mass();
    MomentOptions opts;
    opts.record_every = 80;
    const double h = sc.integration.moment_step;
    const MomentSeries series = integrate_moments(sc, opts);
    const auto ref = deterministic_reference(sc, h, static_cast<std::size_t>(80) * (series.samples.size() - 1), 80);
    const double secs = seconds_since(t0);

    Eigen::Array<double, kStateDim, 1> scale = Eigen::Array<double, kStateDim, 1>::Zero();
    for (const StateVector& r : ref) {
        scale = scale.max(r.array().abs());
    }
    double worst = 0.0;
    std::size_t compared = 0;
    for (std::size_t k = 0; k < series.samples.size() && k < ref.size(); ++k) {
        // The landing sample is interpolated off the step grid.
        if (std::abs(series.tau[k] - static_cast<double>(k) * 80.0 * h) > 1e-9) {
            continue;
        }
        ++compared;
        for (int a = 0; a < kStateDim; ++a) {
            if (scale[a] == 0.0) {
                continue;
            }
            const double m = series.samples[k].mean(a).real();
            worst = std::max(worst, std::abs(m - ref[k][a]) / scale[a]);
        }
    }
    return {worst <= 1e-6 && secs < 1.0 && compared > 100,
            fmt("max relative error %.3g over %.0f samples, %.3f s", worst,
                double(compared), secs)};
}

Outcome kinematic_identities() {
    const auto t0 = Clock::now();
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> ang(-3.14159, 3.14159), pitch(-1.4, 1.4);
    double orth = 0.0, det = 0.0, inv = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double phi = ang(gen), th = pitch(gen), psi = ang(gen);
        const Matrix3 R = rotation_matrix(phi, th, psi);
        orth = std::max(orth, (R.transpose() * R - Matrix3::Identity()).cwiseAbs().maxCoeff());
        det = std::max(det, std::abs(R.determinant() - 1.0));
        const Matrix3 P = euler_rate_matrix(phi, th) * body_rate_matrix(phi, th);
        inv = std::max(inv, (P - Matrix3::Identity()).cwiseAbs().maxCoeff());
    }
    const double secs = seconds_since(t0);
    return {orth <= 1e-12 && det <= 1e-12 && inv <= 1e-10 && secs < 1.0,
            fmt("orthonormality %.2g, det %.2g, rate inverse %.2g, %.3f s", orth, det, inv, secs)};
}

Outcome wiener_statistics() {
    RandomStream rs(12345);
    const double dt = 0.01;
    const int n = 1000000;
    double s[3] = {0, 0, 0}, q[3] = {0, 0, 0}, c12 = 0, c13 = 0, c23 = 0;
    for (int i = 0; i < n; ++i) {
        const WienerIncrement w = wiener_increments(rs, dt);
        const double d[3] = {w.dW1, w.dW2, w.dW3};
        for (int k = 0; k < 3; ++k) {
            s[k] += d[k];
            q[k] += d[k] * d[k];
        }
        c12 += d[0] * d[1];
        c13 += d[0] * d[2];
        c23 += d[1] * d[2];
    }
    double worst_var = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double m = s[k] / n;
        worst_var = std::max(worst_var, std::abs(q[k] / n - m * m - dt) / dt);
    }
    const double se = dt / std::sqrt(double(n));
    auto cov = [&](double c, int a, int b) { return std::abs(c / n - (s[a] / n) * (s[b] / n)) / se; };
    const double worst_cov = std::max({cov(c12, 0, 1), cov(c13, 0, 2), cov(c23, 1, 2)});
    return {worst_var <= 0.01 && worst_cov <= 3.0,
            fmt("variance error %.3f%%, cross-covariance %.2f SE", 100 * worst_var, worst_cov)};
}

Outcome nominal_agreement() {
    const auto t0 = Clock::now();
    const Scenario sc = nominal_scenario();
    const EnsembleResult mc = run_ensemble(sc, 1000, 42);
    Scenario pm = sc;
    pm.init = sc.init.point_mass();
    const MomentImpactPrediction p = *integrate_moments(pm).impact;
    const double secs = seconds_since(t0);
    const double range = std::abs(mc.stats.mean_x);
    const double mean_gap = std::hypot(p.mean_x - mc.stats.mean_x, p.mean_y - mc.stats.mean_y) / range;
    const double gx = std::abs(p.sd_x - mc.stats.sd_x) / mc.stats.sd_x;
    const double gy = std::abs(p.sd_y - mc.stats.sd_y) / mc.stats.sd_y;
    return {mean_gap <= 0.05 && gx <= 0.2 && gy <= 0.2 && secs < 10.0,
            fmt("mean gap %.2f%% of range, sd_x gap %.1f%%, sd_y gap %.1f%%, %.2f s", 100 * mean_gap,
                100 * gx, 100 * gy, secs)};
}

Outcome random_ic_widens() {
    const Scenario sc = nominal_scenario();
    EnsembleOptions ric;
    ric.random_ic = true;
    const EnsembleResult fixed = run_ensemble(sc, 1000, 5);
    const EnsembleResult random = run_ensemble(sc, 1000, 5, ric);
    Scenario pm = sc;
    pm.init = sc.init.point_mass();
    const MomentImpactPrediction mf = *integrate_moments(pm).impact;
    const MomentImpactPrediction mr = *integrate_moments(sc).impact;
    const bool ok = random.stats.sd_x > fixed.stats.sd_x && random.stats.sd_y > fixed.stats.sd_y &&
                    mr.sd_x > mf.sd_x && mr.sd_y > mf.sd_y;
    return {ok, fmt("MC sd %.2f/%.2f vs %.2f/%.2f; moments sd %.2f/", random.stats.sd_x,
                    random.stats.sd_y, fixed.stats.sd_x, fixed.stats.sd_y, mr.sd_x) +
                    fmt("%.2f vs %.2f/%.2f", mr.sd_y, mf.sd_x, mf.sd_y)};
}

Outcome control_tightens() {
    const auto t0 = Clock::now();
    const ClosedLoopResult r = closed_loop_simulate(nominal_scenario(), 1, 500);
    const double secs = seconds_since(t0);
    return {r.trace_ratio < 0.7 && secs < 15.0,
            fmt("trace ratio %.4f (controlled %.1f, uncontrolled %.1f), %.2f s", r.trace_ratio,
                r.controlled.stats.cov.trace(), r.uncontrolled.stats.cov.trace(), secs)};
}

Outcome integrator_order() {
    Scenario sc = nominal_scenario().without_noise();
    sc.canards.reset();
    auto impact_x = [&](double dt) {
        Scenario s = sc;
        s.integration.step = dt;
        s.integration.record_every = 1000000;
        RandomStream rs(1);
        return simulate_trajectory(s, rs).impact.value().x;
    };
    const double dt0 = 1.0;
    const double reference = 2.0 * impact_x(dt0 / 32.0) - impact_x(dt0 / 16.0);
    std::vector<double> err;
    for (double dt = dt0; dt >= dt0 / 8.0; dt /= 2.0) {
        err.push_back(std::abs(impact_x(dt) - reference));
    }
    bool ok = true;
    std::string detail = "error ratios";
    for (std::size_t i = 1; i < err.size(); ++i) {
        const double ratio = err[i - 1] / err[i];
        ok = ok && ratio >= 1.5 && ratio <= 2.5;
        detail += fmt(" %.3f", ratio);
    }
    return {ok, detail};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome thread_invariance() {
    const fs::path root = fs::temp_directory_path() / "ipp_acceptance_threads";
    fs::remove_all(root);
    std::vector<std::string> mc, ctl;
    for (const char* threads : {"1", "2", "4"}) {
        const fs::path dir = root / threads;
        setenv("IPP_THREADS", threads, 1);
        const std::string base = std::string(IPP_CLI_PATH) + " ";
        const std::string tail = " --seed 3 --out " + dir.string() + " >/dev/null 2>&1";
        if (std::system((base + "montecarlo --runs 200" + tail).c_str()) != 0 ||
            std::system((base + "control --runs 100" + tail).c_str()) != 0) {
            unsetenv("IPP_THREADS");
            return {false, "CLI run failed"};
        }
        mc.push_back(slurp(dir / "impacts.csv"));
        ctl.push_back(slurp(dir / "impacts_controlled.csv") + slurp(dir / "impacts_uncontrolled.csv") +
                      slurp(dir / "control_log.csv"));
    }
    unsetenv("IPP_THREADS");
    const bool ok = !mc[0].empty() && mc[0] == mc[1] && mc[0] == mc[2] && ctl[0] == ctl[1] &&
                    ctl[0] == ctl[2];
    return {ok, "montecarlo and control outputs compared for 1, 2 and 4 threads"};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"moment mean tracks the deterministic path", moment_mean_vs_deterministic},
        {"rotation and rate-matrix identities", kinematic_identities},
        {"Wiener increment statistics", wiener_statistics},
        {"nominal moment prediction vs Monte Carlo", nominal_agreement},
        {"random launch states widen the spread", random_ic_widens},
        {"guidance shrinks the impact covariance", control_tightens},
        {"first-order convergence of the SDE scheme", integrator_order},
        {"outputs independent of thread count", thread_invariance},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("[%s] criterion %zu: %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
