#include "ipp/export.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace ipp {

std::string format_number(double value, int digits) {
    if (value == 0.0) {
        return "0"; // also folds -0
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out << content;
        out.flush();
        if (!out) {
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                                 ec.message());
    }
}

namespace {

void row(std::ostringstream& out, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) {
            out << ',';
        }
        out << format_number(v);
        first = false;
    }
    out << '\n';
}

} // namespace

std::string trajectory_csv(const Trajectory& trajectory) {
    std::ostringstream out;
    out << "tau,x,y,z,phi,theta,psi,V,vt,wt,pt,qt,rt\n";
    for (std::size_t i = 0; i < trajectory.states.size(); ++i) {
        const MlmState& s = trajectory.states[i];
        row(out, {trajectory.tau[i], s.x, s.y, s.z, s.phi, s.theta, s.psi, s.V, s.v_t, s.w_t, s.p_t,
                  s.q_t, s.r_t});
    }
    return out.str();
}

std::string impacts_csv(const EnsembleResult& ensemble) {
    std::ostringstream out;
    out << "run,tau,x,y\n";
    for (std::size_t i = 0; i < ensemble.runs.size(); ++i) {
        if (const auto& p = ensemble.runs[i]) {
            out << i << ',' << format_number(p->tau) << ',' << format_number(p->x) << ','
                << format_number(p->y) << '\n';
        }
    }
    return out.str();
}

std::string moments_csv(const MomentSeries& series) {
    const MomentLayout& layout = MomentLayout::instance();
    std::ostringstream out;
    out << "tau,mean_x,mean_y,mean_z,sd_x,sd_y,sd_z";
    for (int k = 0; k < layout.size(); ++k) {
        out << ",re_" << layout.name(k) << ",im_" << layout.name(k);
    }
    out << '\n';
    for (std::size_t i = 0; i < series.samples.size(); ++i) {
        const TransformedMoments& m = series.samples[i];
        auto sd = [&m](int a) { return std::sqrt(std::max(0.0, m.variance(a))); };
        out << format_number(series.tau[i]);
        for (double v : {m.mean(kMx).real(), m.mean(kMy).real(), m.mean(kMz).real(), sd(kMx), sd(kMy),
                         sd(kMz)}) {
            out << ',' << format_number(v);
        }
        for (int k = 0; k < layout.size(); ++k) {
            out << ',' << format_number(m.values[k].real()) << ',' << format_number(m.values[k].imag());
        }
        out << '\n';
    }
    return out.str();
}

std::string control_log_csv(const std::vector<ControlLogEntry>& log) {
    std::ostringstream out;
    out << "tau,e1,e2,e3,thetaE,psiE,l1,l2,l3,l4,saturated\n";
    for (const ControlLogEntry& e : log) {
        const GuidanceErrors& g = e.errors;
        out << format_number(e.tau);
        for (double v : {g.e1, g.e2, g.e3, g.theta_E, g.psi_E, e.lambda[0], e.lambda[1], e.lambda[2],
                         e.lambda[3]}) {
            out << ',' << format_number(v);
        }
        out << ',' << (e.saturated ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string scenario_digest(const Scenario& scenario) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize_scenario(scenario)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace ipp
