#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ipp/control.hpp"
#include "ipp/error.hpp"
#include "ipp/export.hpp"
#include "ipp/moments.hpp"
#include "ipp/sde.hpp"
#include "ipp/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Thrown for problems the user must fix on the command line (exit code 2).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string scenario;
    std::uint64_t seed = 1;
    std::string out = ".";
    std::size_t runs = 0;
    std::optional<double> step;
    bool random_ic = false;
    bool deterministic = false;
};

ipp::Scenario prepare_scenario(const CommonOptions& o) {
    ipp::Scenario sc = ipp::nominal_scenario();
    if (!o.scenario.empty()) {
        if (!fs::exists(o.scenario)) {
            throw UsageError("scenario file not found: " + o.scenario);
        }
        sc = ipp::load_scenario_file(o.scenario);
    }
    if (o.step) {
        sc.integration.step = *o.step;
        ipp::validate(sc);
    }
    if (o.deterministic) {
        sc = sc.without_noise();
    }
    return sc;
}

fs::path output_dir(const CommonOptions& o) {
    fs::path dir(o.out);
    fs::create_directories(dir);
    return dir;
}

ordered_json stats_json(const ipp::ImpactStats& s) {
    return ordered_json{{"n", s.n},
                        {"mean_x", s.mean_x},
                        {"mean_y", s.mean_y},
                        {"sd_x", s.sd_x},
                        {"sd_y", s.sd_y},
                        {"cov", {{s.cov(0, 0), s.cov(0, 1)}, {s.cov(1, 0), s.cov(1, 1)}}},
                        {"ellipse",
                         {{"cx", s.ellipse.cx},
                          {"cy", s.ellipse.cy},
                          {"semi_major", s.ellipse.semi_major},
                          {"semi_minor", s.ellipse.semi_minor},
                          {"angle", s.ellipse.angle}}}};
}

ordered_json prediction_json(const ipp::MomentImpactPrediction& p) {
    return ordered_json{{"tau", p.tau},   {"mean_x", p.mean_x},     {"mean_y", p.mean_y},
                        {"sd_x", p.sd_x}, {"sd_y", p.sd_y},         {"raw_sd_x", p.raw_sd_x},
                        {"raw_sd_y", p.raw_sd_y}};
}

ordered_json report_header(const std::string& command, const ipp::Scenario& sc,
                           const CommonOptions& o) {
    return ordered_json{{"command", command},
                        {"scenario_digest", ipp::scenario_digest(sc)},
                        {"seed", o.seed}};
}

ipp::Ellipse moment_ellipse(const ipp::MomentImpactPrediction& p) {
    return ipp::impact_stats(p.mean_x, p.mean_y, p.cov, 0).ellipse;
}

ipp::Scenario moment_scenario(const ipp::Scenario& sc, bool random_ic) {
    ipp::Scenario m = sc;
    if (!random_ic) {
        m.init = sc.init.point_mass();
    }
    return m;
}

int cmd_simulate(const CommonOptions& o) {
    const ipp::Scenario sc = prepare_scenario(o);
    const fs::path dir = output_dir(o);
    ipp::RandomStream stream(o.seed);
    ipp::SimulationOptions sim;
    sim.random_ic = o.random_ic;
    const ipp::Trajectory t = ipp::simulate_trajectory(sc, stream, nullptr, sim);
    ipp::write_atomic(dir / "trajectory.csv", ipp::trajectory_csv(t));

    ordered_json report = report_header("simulate", sc, o);
    report["samples"] = t.states.size();
    if (t.impact) {
        report["impact"] = {{"tau", t.impact->tau}, {"x", t.impact->x}, {"y", t.impact->y}};
    } else {
        report["impact"] = nullptr;
    }
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_montecarlo(const CommonOptions& o) {
    const ipp::Scenario sc = prepare_scenario(o);
    const fs::path dir = output_dir(o);
    ipp::EnsembleOptions eo;
    eo.random_ic = o.random_ic;
    const ipp::EnsembleResult e = ipp::run_ensemble(sc, o.runs, o.seed, eo);
    ipp::write_atomic(dir / "impacts.csv", ipp::impacts_csv(e));
    ipp::write_atomic(dir / "montecarlo.svg",
                      ipp::render_impact_svg("Monte Carlo impact points",
                                             {{e.impacts, "#1f77b4", "impacts"}},
                                             {{e.stats.ellipse, "#d62728", "1-sigma ellipse"}}));
    ordered_json report = report_header("montecarlo", sc, o);
    report["runs"] = o.runs;
    report["impacts"] = e.impacts.size();
    report["non_impacting"] = e.non_impacting;
    report["failed"] = e.failed;
    report["montecarlo"] = stats_json(e.stats);
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_moments(const CommonOptions& o) {
    const ipp::Scenario sc = moment_scenario(prepare_scenario(o), o.random_ic);
    const fs::path dir = output_dir(o);
    const ipp::MomentSeries m = ipp::integrate_moments(sc);
    ipp::write_atomic(dir / "moments.csv", ipp::moments_csv(m));
    ordered_json report = report_header("moments", sc, o);
    report["moments"] = prediction_json(*m.impact);
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_compare(const CommonOptions& o) {
    const ipp::Scenario sc = prepare_scenario(o);
    const fs::path dir = output_dir(o);
    ipp::EnsembleOptions eo;
    eo.random_ic = o.random_ic;
    const ipp::EnsembleResult e = ipp::run_ensemble(sc, o.runs, o.seed, eo);
    const ipp::MomentSeries m = ipp::integrate_moments(moment_scenario(sc, o.random_ic));
    const ipp::MomentImpactPrediction& p = *m.impact;

    ipp::write_atomic(dir / "compare.svg",
                      ipp::render_impact_svg("Monte Carlo vs moment prediction",
                                             {{e.impacts, "#1f77b4", "Monte Carlo impacts"}},
                                             {{e.stats.ellipse, "#d62728", "Monte Carlo 1-sigma"},
                                              {moment_ellipse(p), "#2ca02c", "moment 1-sigma"}}));

    auto rel = [](double a, double b) { return b != 0.0 ? (a - b) / b : 0.0; };
    const double range = std::abs(e.stats.mean_x);
    const double mean_gap = range > 0.0 ? std::abs(p.mean_x - e.stats.mean_x) / range : 0.0;
    const double gap_x = rel(p.sd_x, e.stats.sd_x);
    const double gap_y = rel(p.sd_y, e.stats.sd_y);
    ordered_json report = report_header("compare", sc, o);
    report["runs"] = o.runs;
    report["montecarlo"] = stats_json(e.stats);
    report["moments"] = prediction_json(p);
    report["relative_mean_gap"] = mean_gap;
    report["relative_sd_gap"] = {{"x", gap_x}, {"y", gap_y}};
    report["warn"] = mean_gap > 0.05 || std::abs(gap_x) > 0.2 || std::abs(gap_y) > 0.2;
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_control(const CommonOptions& o) {
    const ipp::Scenario sc = prepare_scenario(o);
    if (!sc.canards || !sc.gains) {
        throw UsageError("the control command needs a scenario with canards and gains");
    }
    const fs::path dir = output_dir(o);
    ipp::EnsembleOptions eo;
    eo.random_ic = o.random_ic;
    const ipp::ClosedLoopResult r = ipp::closed_loop_simulate(sc, o.seed, o.runs, eo);

    // Guidance history of run 0, replayed on its own substream.
    const ipp::DesiredTrajectory desired = ipp::desired_trajectory(sc);
    ipp::GuidanceController logger(desired, *sc.gains, *sc.canards, ipp::Allocation::Priority, true);
    ipp::RandomStream stream(o.seed, 0);
    ipp::SimulationOptions sim;
    sim.random_ic = o.random_ic;
    sim.record = false;
    ipp::simulate_trajectory(sc, stream, &logger, sim);

    ipp::write_atomic(dir / "impacts_controlled.csv", ipp::impacts_csv(r.controlled));
    ipp::write_atomic(dir / "impacts_uncontrolled.csv", ipp::impacts_csv(r.uncontrolled));
    ipp::write_atomic(dir / "control_log.csv", ipp::control_log_csv(logger.log()));
    ipp::write_atomic(
        dir / "control.svg",
        ipp::render_impact_svg("Impact points with and without guidance",
                               {{r.uncontrolled.impacts, "#1f77b4", "uncontrolled"},
                                {r.controlled.impacts, "#ff7f0e", "controlled"}},
                               {{r.uncontrolled.stats.ellipse, "#1f77b4", "uncontrolled 1-sigma"},
                                {r.controlled.stats.ellipse, "#d62728", "controlled 1-sigma"}}));

    ordered_json report = report_header("control", sc, o);
    report["runs"] = o.runs;
    report["uncontrolled"] = stats_json(r.uncontrolled.stats);
    report["controlled"] = stats_json(r.controlled.stats);
    report["failed_controlled"] = r.controlled.failed;
    report["trace_ratio"] = r.trace_ratio;
    std::cout << report.dump(2) << '\n';
    return 0;
}

void add_common(CLI::App* sub, CommonOptions& o, bool ensemble, std::size_t default_runs) {
    sub->add_option("--scenario", o.scenario, "scenario JSON (built-in nominal when omitted)");
    sub->add_option("--seed", o.seed, "base random seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--step", o.step, "SDE step in calibers")->check(CLI::PositiveNumber);
    sub->add_flag("--random-ic", o.random_ic, "draw launch states from the initial distribution");
    sub->add_flag("--deterministic", o.deterministic, "zero the diffusion amplitudes");
    if (ensemble) {
        o.runs = default_runs;
        sub->add_option("--runs", o.runs, "ensemble size")->check(CLI::Range(std::size_t{2}, std::size_t{10000000}));
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic projectile impact-point prediction"};
    app.require_subcommand(1);

    CommonOptions o;
    auto* simulate = app.add_subcommand("simulate", "integrate one sample path");
    auto* montecarlo = app.add_subcommand("montecarlo", "Monte Carlo impact ensemble");
    auto* moments = app.add_subcommand("moments", "propagate moments and predict the impact");
    auto* compare = app.add_subcommand("compare", "Monte Carlo against the moment prediction");
    auto* control = app.add_subcommand("control", "paired guided and unguided ensembles");
    add_common(simulate, o, false, 0);
    add_common(montecarlo, o, true, 1000);
    add_common(moments, o, false, 0);
    add_common(compare, o, true, 1000);
    add_common(control, o, true, 500);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        int rc = 0;
        if (*simulate) {
            rc = cmd_simulate(o);
        } else if (*montecarlo) {
            rc = cmd_montecarlo(o);
        } else if (*moments) {
            rc = cmd_moments(o);
        } else if (*compare) {
            rc = cmd_compare(o);
        } else if (*control) {
            rc = cmd_control(o);
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cerr << "elapsed " << secs << " s\n";
        return rc;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ipp::ParseError& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return 2;
    } catch (const ipp::ValidationError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return 2;
    } catch (const ipp::SingularityError& e) {
        std::cerr << "model error (" << e.term() << "): " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
