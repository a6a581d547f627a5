#include "ipp/moments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ipp/dynamics.hpp"
#include "ipp/error.hpp"

namespace ipp {

namespace {

constexpr Complex kJ{0.0, 1.0};
constexpr int kNone = -1;

// One monomial of the transformed drift: c * (1/V)^inv_v * sec^sec * s_v1 * s_v2.
struct DriftTerm {
    Complex c;
    int inv_v = 0;
    int sec = 0;
    int v1 = kNone;
    int v2 = kNone;
};

using DriftTable = std::array<std::vector<DriftTerm>, kMomentStates>;

// The model drift with cos(theta) = (d+ + d-)/2, sin(theta) = (d+ - d-)/(2j),
// 1/cos(theta) replaced by the scalar `sec` and 1/V by the scalar `inv_v`.
DriftTable drift_table(const Scenario& sc) {
    const ProjectileParams& p = sc.params;
    const double pi = std::numbers::pi;
    const double D = p.D;
    const double D3 = D * D * D;
    const double drag = pi * p.rho * D3 / (8.0 * p.m);
    const double spin_drive = pi * p.rho * D3 * D * p.CDD / (8.0 * p.Ixx);
    const double spin_damp = pi * p.rho * D3 * D * D * p.CLP / (16.0 * p.Ixx);
    const double magnus = pi * p.rho * D3 * D * p.RMCM * p.CYPA / (16.0 * p.Iyy);
    const double pitch_damp = pi * p.rho * D3 * D * D * p.CMQ / (16.0 * p.Iyy);
    const double restoring = pi * p.rho * D3 * p.RMCP * p.CNA / (8.0 * p.Iyy);
    const double gyro = p.Ixx * D / p.Iyy;
    const double vw = sc.wind.vw;
    const double ww = sc.wind.ww;
    const Complex half_sin = 1.0 / (2.0 * kJ); // sin = half_sin * (d+ - d-)

    DriftTable t;
    t[kMx] = {{D / 2, 0, 0, kMdp}, {D / 2, 0, 0, kMdm}};
    t[kMy] = {{D / 2, 0, 0, kMdp, kMpsi}, {D / 2, 0, 0, kMdm, kMpsi}, {D, 1, 0, kMvt}};
    t[kMz] = {{-D * half_sin, 0, 0, kMdp},
              {D * half_sin, 0, 0, kMdm},
              {D / 2, 1, 0, kMdp, kMwt},
              {D / 2, 1, 0, kMdm, kMwt}};
    t[kMphi] = {{D, 1, 0, kMpt}};
    t[kMtheta] = {{D, 1, 0, kMqt}};
    t[kMpsi] = {{D, 1, 1, kMrt}};
    t[kMV] = {{-drag * p.CX0, 0, 0, kMV},
              {-D * p.g * half_sin, 1, 0, kMdp},
              {D * p.g * half_sin, 1, 0, kMdm}};
    t[kMvt] = {{-drag * p.CNA, 0, 0, kMvt}, {drag * p.CNA * vw}, {-D, 0, 0, kMrt}};
    t[kMwt] = {{-drag * p.CNA, 0, 0, kMwt},
               {drag * p.CNA * ww},
               {D, 0, 0, kMqt},
               {D * p.g / 2, 1, 0, kMdp},
               {D * p.g / 2, 1, 0, kMdm}};
    t[kMpt] = {{spin_drive, 0, 0, kMV}, {spin_damp, 0, 0, kMpt}};
    t[kMqt] = {{magnus, 1, 0, kMpt, kMvt},
               {-magnus * vw, 1, 0, kMpt},
               {pitch_damp, 0, 0, kMqt},
               {restoring, 0, 0, kMwt},
               {-restoring * ww},
               {-gyro, 1, 0, kMpt, kMrt}};
    t[kMrt] = {{magnus, 1, 0, kMpt, kMwt},
               {-magnus * ww, 1, 0, kMpt},
               {pitch_damp, 0, 0, kMrt},
               {-restoring, 0, 0, kMvt},
               {restoring * vw},
               {gyro, 1, 0, kMpt, kMqt}};
    t[kMdp] = {{D * kJ, 1, 0, kMdp, kMqt}};
    t[kMdm] = {{-D * kJ, 1, 0, kMdm, kMqt}};
    return t;
}

MultiIndex cancel_deltas(MultiIndex m) {
    std::sort(m.begin(), m.end());
    for (;;) {
        auto p = std::find(m.begin(), m.end(), kMdp);
        auto q = std::find(m.begin(), m.end(), kMdm);
        if (p == m.end() || q == m.end()) {
            return m;
        }
        // Erase the later iterator first so the earlier stays valid.
        if (p < q) {
            m.erase(q);
            m.erase(p);
        } else {
            m.erase(p);
            m.erase(q);
        }
    }
}

// Pair extraction order for third-order moments.
const std::vector<std::pair<int, int>>& priority_pairs() {
    static const std::vector<std::pair<int, int>> order = [] {
        std::vector<std::pair<int, int>> v = {
            {kMpt, kMvt}, {kMpt, kMwt}, {kMpt, kMqt}, {kMpt, kMrt}};
        for (int a = 0; a < kMomentStates; ++a) {
            v.emplace_back(a, a);
        }
        for (int s : {kMx, kMy, kMz, kMpsi, kMwt, kMqt}) {
            v.emplace_back(s, kMdp);
            v.emplace_back(s, kMdm);
        }
        for (auto pr : {std::pair{kMy, kMvt}, {kMz, kMwt}, {kMx, kMy}, {kMx, kMz}, {kMy, kMz}}) {
            v.push_back(pr);
        }
        return v;
    }();
    return order;
}

// A drift term multiplied out and closed: c * factor[kind] * v[s0] v[s1] v[s2].
struct CompiledTerm {
    Complex c;
    int kind = 0; // inv_v + 2 * sec
    std::array<int, 3> slots{};
};

class CompiledRhs {
public:
    explicit CompiledRhs(const Scenario& sc) {
        const MomentLayout& layout = MomentLayout::instance();
        one_ = layout.size();
        const DriftTable table = drift_table(sc);
        rows_.resize(static_cast<std::size_t>(layout.size()));
        for (int a = 0; a < kMomentStates; ++a) {
            for (const DriftTerm& t : table[a]) {
                add(layout.mean_slot(a), t, kNone, 1.0);
            }
        }
        const std::array<double, 3> diffusion = {sc.noise.a1, sc.noise.a2, sc.noise.a3};
        for (const auto& [a, b] : layout.pairs()) {
            const int slot = layout.pair_slot(a, b);
            if (a == b) {
                for (const DriftTerm& t : table[a]) {
                    add(slot, t, b, 2.0);
                }
                if (a <= kMz) {
                    const double g = diffusion[static_cast<std::size_t>(a)];
                    rows_[static_cast<std::size_t>(slot)].push_back(
                        CompiledTerm{Complex(g * g), 0, {one_, one_, one_}});
                }
            } else {
                for (const DriftTerm& t : table[a]) {
                    add(slot, t, b, 1.0);
                }
                for (const DriftTerm& t : table[b]) {
                    add(slot, t, a, 1.0);
                }
            }
        }
    }

    void eval(const Eigen::VectorXcd& v, double inv_v, Eigen::VectorXcd& out) const {
        const Complex denom = v[kMdp] + v[kMdm];
        if (std::abs(denom) < 1e-9) {
            throw SingularityError("1/cos(theta)",
                                   "mean-field 1/cos(theta) closure is singular: |<d+> + <d->| < 1e-9");
        }
        const Complex sec = 2.0 / denom;
        const std::array<Complex, 4> factor = {Complex(1.0), Complex(inv_v), sec, inv_v * sec};
        if (flat_.empty()) {
            flatten();
        }
        work_.resize(one_ + 1);
        work_.head(one_) = v;
        work_[one_] = 1.0;
        out.resize(one_);
        const Complex* w = work_.data();
        for (std::size_t r = 0; r + 1 < offsets_.size(); ++r) {
            Complex acc = 0.0;
            for (std::size_t i = offsets_[r]; i < offsets_[r + 1]; ++i) {
                const CompiledTerm& t = flat_[i];
                const Complex prod = mul(mul(t.c, factor[static_cast<std::size_t>(t.kind)]),
                                         mul(w[t.slots[0]], mul(w[t.slots[1]], w[t.slots[2]])));
                acc += prod;
            }
            out[static_cast<Eigen::Index>(r)] = acc;
        }
    }

private:
    void add(int slot, const DriftTerm& t, int extra, double scale) {
        MultiIndex m;
        for (int v : {t.v1, t.v2, extra}) {
            if (v != kNone) {
                m.push_back(v);
            }
        }
        CompiledTerm ct{scale * t.c, t.inv_v + 2 * t.sec, {one_, one_, one_}};
        const MomentLayout& layout = MomentLayout::instance();
        const std::vector<MultiIndex> plan = closure_plan(m);
        for (std::size_t i = 0; i < plan.size(); ++i) {
            ct.slots[i] = layout.slot(plan[i]);
        }
        std::sort(ct.slots.begin(), ct.slots.end());
        // Terms closing to the same product of stored moments are merged.
        auto& row = rows_[static_cast<std::size_t>(slot)];
        for (CompiledTerm& existing : row) {
            if (existing.kind == ct.kind && existing.slots == ct.slots) {
                existing.c += ct.c;
                return;
            }
        }
        row.push_back(ct);
    }

    // Plain complex product; every operand here is finite, so the IEEE
    // special-case handling of operator* is not needed.
    static Complex mul(const Complex& a, const Complex& b) {
        return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
    }

    void flatten() const {
        offsets_.assign(1, 0);
        for (const auto& row : rows_) {
            flat_.insert(flat_.end(), row.begin(), row.end());
            offsets_.push_back(flat_.size());
        }
    }

    int one_ = 0;
    std::vector<std::vector<CompiledTerm>> rows_;
    mutable std::vector<CompiledTerm> flat_;
    mutable std::vector<std::size_t> offsets_;
    mutable Eigen::VectorXcd work_;
};

double speed_reciprocal(const Eigen::VectorXcd& v, double V0, SpeedClosure speed) {
    const double vbar = speed == SpeedClosure::FrozenV0 ? V0 : v[kMV].real();
    if (!(vbar > 0.0)) {
        throw SingularityError("1/V", "mean speed is not positive");
    }
    return 1.0 / vbar;
}

} // namespace

const char* MomentLayout::state_name(int a) {
    static const char* names[kMomentStates] = {"x",  "y",  "z",  "phi", "theta", "psi", "V",
                                               "vt", "wt", "pt", "qt",  "rt",    "dp",  "dm"};
    return names[a];
}

MomentLayout::MomentLayout() {
    for (auto& row : table_) {
        std::fill(std::begin(row), std::end(row), -1);
    }
    auto add = [this](int a, int b) {
        if (a > b) {
            std::swap(a, b);
        }
        pairs_.emplace_back(a, b);
        table_[a][b] = table_[b][a] = kMomentStates + static_cast<int>(pairs_.size()) - 1;
    };
    for (int a = 0; a < kMomentStates; ++a) {
        add(a, a);
    }
    for (int s : {kMx, kMy, kMz, kMpsi, kMwt, kMqt}) {
        add(s, kMdp);
        add(s, kMdm);
    }
    add(kMy, kMvt);
    add(kMz, kMwt);
    add(kMpt, kMvt);
    add(kMpt, kMwt);
    add(kMpt, kMqt);
    add(kMpt, kMrt);
    add(kMx, kMy);
    add(kMx, kMz);
    add(kMy, kMz);
}

const MomentLayout& MomentLayout::instance() {
    static const MomentLayout layout;
    return layout;
}

int MomentLayout::slot(const MultiIndex& m) const {
    if (m.size() == 1) {
        return mean_slot(m[0]);
    }
    if (m.size() == 2) {
        return pair_slot(m[0], m[1]);
    }
    return -1;
}

std::string MomentLayout::name(int slot) const {
    if (slot < kMomentStates) {
        return state_name(slot);
    }
    const auto& [a, b] = pairs_[static_cast<std::size_t>(slot - kMomentStates)];
    return std::string(state_name(a)) + "_" + state_name(b);
}

Complex TransformedMoments::pair(int a, int b) const {
    const int slot = MomentLayout::instance().pair_slot(a, b);
    if (slot < 0) {
        throw std::out_of_range(std::string("moment <") + MomentLayout::state_name(a) + " " +
                                MomentLayout::state_name(b) + "> is not retained");
    }
    return values[slot];
}

double TransformedMoments::variance(int a) const { return covariance(a, a); }

double TransformedMoments::covariance(int a, int b) const {
    return pair(a, b).real() - values[a].real() * values[b].real();
}

std::vector<MultiIndex> closure_plan(const MultiIndex& moment) {
    if (moment.size() > 3) {
        throw std::invalid_argument("closure supports moments of order <= 3, got order " +
                                    std::to_string(moment.size()));
    }
    for (int a : moment) {
        if (a < 0 || a >= kMomentStates) {
            throw std::invalid_argument("moment index out of range");
        }
    }
    const MultiIndex m = cancel_deltas(moment);
    const MomentLayout& layout = MomentLayout::instance();
    if (m.empty()) {
        return {};
    }
    if (layout.slot(m) >= 0) {
        return {m};
    }
    if (m.size() == 3) {
        for (const auto& [a, b] : priority_pairs()) {
            MultiIndex rest = m;
            auto ia = std::find(rest.begin(), rest.end(), a);
            if (ia == rest.end()) {
                continue;
            }
            rest.erase(ia);
            auto ib = std::find(rest.begin(), rest.end(), b);
            if (ib == rest.end()) {
                continue;
            }
            rest.erase(ib);
            return {MultiIndex{std::min(a, b), std::max(a, b)}, rest};
        }
    }
    std::vector<MultiIndex> singles;
    for (int a : m) {
        singles.push_back({a});
    }
    return singles;
}

Complex closure_factorize(const MultiIndex& moment, const TransformedMoments& current) {
    const MomentLayout& layout = MomentLayout::instance();
    Complex value = 1.0;
    for (const MultiIndex& f : closure_plan(moment)) {
        value *= current.values[layout.slot(f)];
    }
    return value;
}

TransformedMoments init_moments(const InitialDistribution& dist, const Scenario& /*scenario*/) {
    const MomentLayout& layout = MomentLayout::instance();
    TransformedMoments mu;

    const double ux = dist.u.mean, vx = dist.v.mean, wx = dist.w.mean;
    const double vbar = std::sqrt(ux * ux + vx * vx + wx * wx);
    const double var_v = (ux * ux * dist.u.sd * dist.u.sd + vx * vx * dist.v.sd * dist.v.sd +
                          wx * wx * dist.w.sd * dist.w.sd) /
                         (vbar * vbar);
    mu.V0 = vbar;

    const double th = dist.theta.mean;
    const double sth2 = dist.theta.sd * dist.theta.sd;
    std::array<Complex, kMomentStates> mean{};
    std::array<double, kMomentStates> var{};
    const GaussianComponent* comps[12] = {&dist.x,   &dist.y, &dist.z,  &dist.phi,
                                          &dist.theta, &dist.psi, nullptr, &dist.v,
                                          &dist.w,   &dist.p, &dist.q,  &dist.r};
    for (int a = 0; a < 12; ++a) {
        if (comps[a] != nullptr) {
            mean[a] = comps[a]->mean;
            var[a] = comps[a]->sd * comps[a]->sd;
        }
    }
    mean[kMV] = vbar;
    var[kMV] = var_v;
    mean[kMdp] = std::exp(kJ * th - sth2 / 2.0);
    mean[kMdm] = std::exp(-kJ * th - sth2 / 2.0);

    for (int a = 0; a < kMomentStates; ++a) {
        mu.values[layout.mean_slot(a)] = mean[a];
    }
    for (const auto& [a, b] : layout.pairs()) {
        Complex v;
        if (a == b && a == kMdp) {
            v = std::exp(2.0 * kJ * th - 2.0 * sth2);
        } else if (a == b && a == kMdm) {
            v = std::exp(-2.0 * kJ * th - 2.0 * sth2);
        } else if (a == b) {
            v = mean[a] * mean[a] + var[a];
        } else {
            v = mean[a] * mean[b];
        }
        mu.values[layout.pair_slot(a, b)] = v;
    }
    return mu;
}

TransformedMoments moment_rhs(const TransformedMoments& mu, const Scenario& scenario,
                              SpeedClosure speed) {
    const CompiledRhs rhs(scenario);
    TransformedMoments out;
    out.V0 = mu.V0;
    rhs.eval(mu.values, speed_reciprocal(mu.values, mu.V0, speed), out.values);
    return out;
}

MomentSeries integrate_moments(const Scenario& scenario, const MomentOptions& options) {
    const double h = options.step.value_or(scenario.integration.moment_step);
    if (!(h > 0.0)) {
        throw ValidationError("integration.moment_step", "must be positive");
    }
    if (options.record_every < 1) {
        throw ValidationError("record_every", "must be >= 1");
    }
    const CompiledRhs rhs(scenario);
    const TransformedMoments init = init_moments(scenario.init, scenario);
    const double V0 = init.V0;
    auto f = [&](const Eigen::VectorXcd& v, Eigen::VectorXcd& out) {
        rhs.eval(v, speed_reciprocal(v, V0, options.speed), out);
    };

    MomentSeries series;
    auto record = [&](double tau, const Eigen::VectorXcd& v) {
        TransformedMoments m;
        m.values = v;
        m.V0 = V0;
        series.tau.push_back(tau);
        series.samples.push_back(std::move(m));
    };

    Eigen::VectorXcd v = init.values;
    Eigen::VectorXcd k1, k2, k3, k4, next;
    const auto steps = static_cast<long long>(std::ceil(scenario.integration.max_span / h));
    record(0.0, v);
    bool descending = false;
    for (long long k = 0; k < steps; ++k) {
        const double tau = static_cast<double>(k) * h;
        try {
            f(v, k1);
            f(v + 0.5 * h * k1, k2);
            f(v + 0.5 * h * k2, k3);
            f(v + h * k3, k4);
        } catch (const SingularityError& e) {
            throw SingularityError(e.term(), std::string(e.what()) + " at tau = " + std::to_string(tau));
        }
        next = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        descending = descending || k1[kMz].real() > 0.0;
        const double z0 = v[kMz].real();
        const double z1 = next[kMz].real();
        if (descending && z0 < 0.0 && z1 >= 0.0) {
            const double frac = -z0 / (z1 - z0);
            TransformedMoments hit;
            hit.V0 = V0;
            hit.values = v + frac * (next - v);
            Eigen::VectorXcd rate;
            f(hit.values, rate);

            MomentImpactPrediction pred;
            pred.tau = tau + frac * h;
            pred.mean_x = hit.values[kMx].real();
            pred.mean_y = hit.values[kMy].real();
            Eigen::Matrix3d cov;
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    cov(a, b) = hit.covariance(a, b);
                }
            }
            // Linearized ground crossing: a perturbation dz shifts the
            // crossing by -dz / zdot in time, moving x and y along the mean
            // velocity.
            const double zdot = rate[kMz].real();
            Eigen::Matrix<double, 2, 3> P;
            P << 1.0, 0.0, -rate[kMx].real() / zdot, 0.0, 1.0, -rate[kMy].real() / zdot;
            pred.cov = P * cov * P.transpose();
            pred.sd_x = std::sqrt(std::max(0.0, pred.cov(0, 0)));
            pred.sd_y = std::sqrt(std::max(0.0, pred.cov(1, 1)));
            pred.raw_sd_x = std::sqrt(std::max(0.0, cov(0, 0)));
            pred.raw_sd_y = std::sqrt(std::max(0.0, cov(1, 1)));
            series.impact = pred;
            record(pred.tau, hit.values);
            return series;
        }
        v = next;
        if ((k + 1) % options.record_every == 0) {
            record(tau + h, v);
        }
    }
    throw HorizonError("mean altitude did not return to the ground within " +
                       std::to_string(scenario.integration.max_span) + " calibers");
}

std::vector<StateVector> deterministic_reference(const Scenario& scenario, double step,
                                                 std::size_t steps, int record_every,
                                                 std::optional<double> frozen_speed) {
    auto f = [&](const StateVector& x) {
        return mlm_drift(MlmState::from_vector(x), scenario.params, scenario.wind, frozen_speed);
    };
    std::vector<StateVector> out;
    StateVector x = scenario.init.mean_state().to_vector();
    out.push_back(x);
    for (std::size_t k = 0; k < steps; ++k) {
        const StateVector k1 = f(x);
        const StateVector k2 = f(x + 0.5 * step * k1);
        const StateVector k3 = f(x + 0.5 * step * k2);
        const StateVector k4 = f(x + step * k3);
        x += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if ((k + 1) % static_cast<std::size_t>(record_every) == 0) {
            out.push_back(x);
        }
    }
    return out;
}

} // namespace ipp
