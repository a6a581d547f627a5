#include "ipp/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ipp/error.hpp"

namespace ipp {

namespace {

using nlohmann::json;

// Reads the members of one JSON object, remembering which keys were used so
// that leftovers (usually misspelled coefficient names) can be rejected.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) {
            throw ParseError(path_ + ": expected an object");
        }
    }

    double number(const std::string& key) {
        const json& v = member(key);
        if (!v.is_number()) {
            throw ParseError(where(key) + ": expected a number");
        }
        return v.get<double>();
    }

    double number_or(const std::string& key, double fallback) {
        return has(key) ? number(key) : fallback;
    }

    bool boolean_or(const std::string& key, bool fallback) {
        if (!has(key)) {
            return fallback;
        }
        const json& v = member(key);
        if (!v.is_boolean()) {
            throw ParseError(where(key) + ": expected true or false");
        }
        return v.get<bool>();
    }

    int integer_or(const std::string& key, int fallback) {
        if (!has(key)) {
            return fallback;
        }
        const json& v = member(key);
        if (!v.is_number_integer()) {
            throw ParseError(where(key) + ": expected an integer");
        }
        return v.get<int>();
    }

    const json& member(const std::string& key) {
        auto it = obj_.find(key);
        if (it == obj_.end()) {
            throw ParseError(where(key) + ": missing required key");
        }
        used_.insert(key);
        return *it;
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    std::string where(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() const {
        for (const auto& [key, value] : obj_.items()) {
            if (!used_.contains(key)) {
                throw ParseError(where(key) + ": unknown key");
            }
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> used_;
};

GaussianComponent read_component(ObjectReader& parent, const std::string& key) {
    ObjectReader r(parent.member(key), parent.where(key));
    GaussianComponent c{r.number("mean"), r.number("sd")};
    r.finish();
    return c;
}

ProjectileParams read_projectile(const json& j) {
    ObjectReader r(j, "projectile");
    ProjectileParams p;
    p.D = r.number("D");
    p.m = r.number("m");
    p.rho = r.number("rho");
    p.g = r.number("g");
    p.Ixx = r.number("Ixx");
    p.Iyy = r.number("Iyy");
    p.CX0 = r.number("CX0");
    p.CDD = r.number("CDD");
    p.CLP = r.number("CLP");
    p.CNA = r.number("CNA");
    p.CYPA = r.number("CYPA");
    p.CMQ = r.number("CMQ");
    p.RMCP = r.number("RMCP");
    p.RMCM = r.number("RMCM");
    r.finish();
    return p;
}

InitialDistribution read_initial(const json& j) {
    ObjectReader r(j, "initial");
    InitialDistribution d;
    d.x = read_component(r, "x");
    d.y = read_component(r, "y");
    d.z = read_component(r, "z");
    d.phi = read_component(r, "phi");
    d.theta = read_component(r, "theta");
    d.psi = read_component(r, "psi");
    d.u = read_component(r, "u");
    d.v = read_component(r, "v");
    d.w = read_component(r, "w");
    d.p = read_component(r, "p");
    d.q = read_component(r, "q");
    d.r = read_component(r, "r");
    r.finish();
    return d;
}

CanardConfig read_canards(const json& surfaces, const json* aero) {
    if (!surfaces.is_array()) {
        throw ParseError("canards: expected an array of 4 objects");
    }
    if (surfaces.size() != 4) {
        throw ValidationError("canards", "exactly 4 canards are required");
    }
    CanardConfig cfg;
    for (std::size_t i = 0; i < 4; ++i) {
        ObjectReader r(surfaces[i], "canards[" + std::to_string(i) + "]");
        CanardSurface& s = cfg.surfaces[i];
        s.diameter = r.number("diameter");
        s.area = r.number("area");
        s.rx = r.number("rx");
        s.ry = r.number("ry");
        s.rz = r.number("rz");
        s.alpha_sign = r.number_or("alpha_sign", i < 2 ? 1.0 : -1.0);
        r.finish();
    }
    if (aero == nullptr) {
        throw ParseError("canard_aero: required when canards are present");
    }
    ObjectReader a(*aero, "canard_aero");
    cfg.c_l_alpha = a.number("c_l_alpha");
    cfg.c_d0 = a.number("c_d0");
    cfg.c_d2 = a.number("c_d2");
    cfg.c_i = a.number("c_i");
    cfg.speed_of_sound = a.number_or("speed_of_sound", 1116.45);
    cfg.deflection_limit = a.number_or("deflection_limit", 0.35);
    cfg.spin_coupled = a.boolean_or("spin_coupled", false);
    a.finish();
    return cfg;
}

json component_json(const GaussianComponent& c) { return json{{"mean", c.mean}, {"sd", c.sd}}; }

void require(bool ok, const char* field, const char* what) {
    if (!ok) {
        throw ValidationError(field, what);
    }
}

void require_finite(double v, const char* field) {
    require(std::isfinite(v), field, "must be finite");
}

} // namespace

InitialDistribution InitialDistribution::point_mass() const {
    InitialDistribution d = *this;
    for (GaussianComponent* c : {&d.x, &d.y, &d.z, &d.phi, &d.theta, &d.psi, &d.u, &d.v, &d.w,
                                 &d.p, &d.q, &d.r}) {
        c->sd = 0.0;
    }
    return d;
}

MlmState InitialDistribution::mean_state() const {
    MlmState s;
    s.x = x.mean;
    s.y = y.mean;
    s.z = z.mean;
    s.phi = phi.mean;
    s.theta = theta.mean;
    s.psi = psi.mean;
    s.V = std::sqrt(u.mean * u.mean + v.mean * v.mean + w.mean * w.mean);
    s.v_t = v.mean;
    s.w_t = w.mean;
    s.p_t = p.mean;
    s.q_t = q.mean;
    s.r_t = r.mean;
    return s;
}

Scenario Scenario::without_noise() const {
    Scenario s = *this;
    s.noise = NoiseModel{0.0, 0.0, 0.0};
    return s;
}

void validate(const Scenario& sc) {
    const ProjectileParams& p = sc.params;
    for (auto [v, name] : {std::pair{p.D, "projectile.D"}, {p.m, "projectile.m"},
                           {p.rho, "projectile.rho"}, {p.g, "projectile.g"},
                           {p.Ixx, "projectile.Ixx"}, {p.Iyy, "projectile.Iyy"}}) {
        require(std::isfinite(v) && v > 0.0, name, "must be positive");
    }
    for (auto [v, name] : {std::pair{p.CX0, "projectile.CX0"}, {p.CDD, "projectile.CDD"},
                           {p.CLP, "projectile.CLP"}, {p.CNA, "projectile.CNA"},
                           {p.CYPA, "projectile.CYPA"}, {p.CMQ, "projectile.CMQ"},
                           {p.RMCP, "projectile.RMCP"}, {p.RMCM, "projectile.RMCM"},
                           {sc.wind.vw, "wind.vw"}, {sc.wind.ww, "wind.ww"}}) {
        require_finite(v, name);
    }
    for (auto [v, name] : {std::pair{sc.noise.a1, "noise.a1"}, {sc.noise.a2, "noise.a2"},
                           {sc.noise.a3, "noise.a3"}}) {
        require(std::isfinite(v) && v >= 0.0, name, "must be non-negative");
    }

    const InitialDistribution& d = sc.init;
    const std::pair<const GaussianComponent*, const char*> comps[] = {
        {&d.x, "initial.x"},       {&d.y, "initial.y"},     {&d.z, "initial.z"},
        {&d.phi, "initial.phi"},   {&d.theta, "initial.theta"}, {&d.psi, "initial.psi"},
        {&d.u, "initial.u"},       {&d.v, "initial.v"},     {&d.w, "initial.w"},
        {&d.p, "initial.p"},       {&d.q, "initial.q"},     {&d.r, "initial.r"}};
    for (const auto& [c, name] : comps) {
        require_finite(c->mean, name);
        require(std::isfinite(c->sd) && c->sd >= 0.0, name, "standard deviation must be >= 0");
    }
    require(d.mean_state().V > 0.0, "initial.u", "mean launch speed must be positive");
    require(std::abs(d.theta.mean) < std::numbers::pi / 2, "initial.theta",
            "mean pitch must satisfy |theta| < pi/2");

    if (sc.canards) {
        const CanardConfig& c = *sc.canards;
        for (std::size_t i = 0; i < 4; ++i) {
            const CanardSurface& s = c.surfaces[i];
            const std::string base = "canards[" + std::to_string(i) + "]";
            if (!(s.area > 0.0) || !std::isfinite(s.area)) {
                throw ValidationError(base + ".area", "must be positive");
            }
            const double expected = std::numbers::pi * s.diameter * s.diameter / 4.0;
            if (std::abs(s.area - expected) > 1e-9 * s.area) {
                throw ValidationError(base + ".area", "must equal pi*diameter^2/4");
            }
            if (std::abs(s.alpha_sign) != 1.0) {
                throw ValidationError(base + ".alpha_sign", "must be +1 or -1");
            }
            for (double v : {s.rx, s.ry, s.rz}) {
                if (!std::isfinite(v)) {
                    throw ValidationError(base, "lever arm must be finite");
                }
            }
        }
        for (auto [v, name] : {std::pair{c.c_l_alpha, "canard_aero.c_l_alpha"},
                               {c.c_d0, "canard_aero.c_d0"}, {c.c_d2, "canard_aero.c_d2"},
                               {c.c_i, "canard_aero.c_i"}}) {
            require_finite(v, name);
        }
        require(c.speed_of_sound > 0.0, "canard_aero.speed_of_sound", "must be positive");
        require(c.deflection_limit > 0.0 && c.deflection_limit < std::numbers::pi / 2,
                "canard_aero.deflection_limit", "must lie in (0, pi/2)");
    }
    if (sc.gains) {
        const ControlGains& g = *sc.gains;
        for (auto [v, name] : {std::pair{g.Kp, "gains.Kp"}, {g.Kphi, "gains.Kphi"},
                               {g.Ktheta, "gains.Ktheta"}, {g.Kpsi, "gains.Kpsi"}}) {
            require_finite(v, name);
        }
        require(std::isfinite(g.lookahead) && g.lookahead > 0.0, "gains.lookahead",
                "must be positive");
    }

    const IntegrationSettings& in = sc.integration;
    require(std::isfinite(in.step) && in.step > 0.0, "integration.step", "must be positive");
    require(std::isfinite(in.max_span) && in.max_span > in.step, "integration.max_span",
            "must exceed the step");
    require(std::isfinite(in.moment_step) && in.moment_step > 0.0, "integration.moment_step",
            "must be positive");
    require(in.record_every >= 1, "integration.record_every", "must be >= 1");
}

Scenario load_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
    }

    ObjectReader top(doc, "");
    Scenario sc;
    sc.params = read_projectile(top.member("projectile"));
    {
        ObjectReader r(top.member("wind"), "wind");
        sc.wind = WindModel{r.number("vw"), r.number("ww")};
        r.finish();
    }
    if (top.has("noise")) {
        ObjectReader r(top.member("noise"), "noise");
        sc.noise = NoiseModel{r.number_or("a1", 1.0), r.number_or("a2", 1.0),
                              r.number_or("a3", 1.0)};
        r.finish();
    }
    sc.init = read_initial(top.member("initial"));
    if (top.has("canards")) {
        const json* aero = top.has("canard_aero") ? &top.member("canard_aero") : nullptr;
        sc.canards = read_canards(top.member("canards"), aero);
    } else if (top.has("canard_aero")) {
        throw ParseError("canard_aero: given without canards");
    }
    if (top.has("gains")) {
        ObjectReader r(top.member("gains"), "gains");
        ControlGains g;
        g.Kp = r.number("Kp");
        g.Kphi = r.number("Kphi");
        g.Ktheta = r.number("Ktheta");
        g.Kpsi = r.number("Kpsi");
        g.lookahead = r.number_or("lookahead", 50.0 * sc.params.D);
        r.finish();
        sc.gains = g;
    }
    {
        ObjectReader r(top.member("integration"), "integration");
        IntegrationSettings in;
        in.step = r.number("step");
        in.max_span = r.number("max_span");
        in.moment_step = r.number_or("moment_step", in.moment_step);
        in.record_every = r.integer_or("record_every", in.record_every);
        r.finish();
        sc.integration = in;
    }
    top.finish();

    validate(sc);
    return sc;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open scenario file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& sc) {
    const ProjectileParams& p = sc.params;
    json doc;
    doc["projectile"] = {{"D", p.D},       {"m", p.m},       {"rho", p.rho},   {"g", p.g},
                         {"Ixx", p.Ixx},   {"Iyy", p.Iyy},   {"CX0", p.CX0},   {"CDD", p.CDD},
                         {"CLP", p.CLP},   {"CNA", p.CNA},   {"CYPA", p.CYPA}, {"CMQ", p.CMQ},
                         {"RMCP", p.RMCP}, {"RMCM", p.RMCM}};
    doc["wind"] = {{"vw", sc.wind.vw}, {"ww", sc.wind.ww}};
    doc["noise"] = {{"a1", sc.noise.a1}, {"a2", sc.noise.a2}, {"a3", sc.noise.a3}};
    const InitialDistribution& d = sc.init;
    doc["initial"] = {{"x", component_json(d.x)},         {"y", component_json(d.y)},
                      {"z", component_json(d.z)},         {"phi", component_json(d.phi)},
                      {"theta", component_json(d.theta)}, {"psi", component_json(d.psi)},
                      {"u", component_json(d.u)},         {"v", component_json(d.v)},
                      {"w", component_json(d.w)},         {"p", component_json(d.p)},
                      {"q", component_json(d.q)},         {"r", component_json(d.r)}};
    if (sc.canards) {
        const CanardConfig& c = *sc.canards;
        json arr = json::array();
        for (const CanardSurface& s : c.surfaces) {
            arr.push_back({{"diameter", s.diameter}, {"area", s.area}, {"rx", s.rx},
                           {"ry", s.ry},             {"rz", s.rz},     {"alpha_sign", s.alpha_sign}});
        }
        doc["canards"] = arr;
        doc["canard_aero"] = {{"c_l_alpha", c.c_l_alpha},
                              {"c_d0", c.c_d0},
                              {"c_d2", c.c_d2},
                              {"c_i", c.c_i},
                              {"speed_of_sound", c.speed_of_sound},
                              {"deflection_limit", c.deflection_limit},
                              {"spin_coupled", c.spin_coupled}};
    }
    if (sc.gains) {
        const ControlGains& g = *sc.gains;
        doc["gains"] = {{"Kp", g.Kp},         {"Kphi", g.Kphi},        {"Ktheta", g.Ktheta},
                        {"Kpsi", g.Kpsi},     {"lookahead", g.lookahead}};
    }
    const IntegrationSettings& in = sc.integration;
    doc["integration"] = {{"step", in.step},
                          {"max_span", in.max_span},
                          {"moment_step", in.moment_step},
                          {"record_every", in.record_every}};
    return doc.dump(2);
}

Scenario nominal_scenario() {
    Scenario sc;
    ProjectileParams& p = sc.params;
    p.D = 0.343521;
    p.m = 0.0116;
    p.rho = 0.00238;
    p.g = 32.174;
    p.Ixx = 2.85e-5;
    p.Iyy = 2.72e-5;
    p.CX0 = 0.279;
    p.CDD = 2.672;
    p.CLP = -0.042;
    p.CNA = 2.329;
    p.CYPA = -0.295;
    p.CMQ = -1.800;
    p.RMCP = -0.1657;
    p.RMCM = -0.1677;

    sc.wind = WindModel{15.0, 15.0};
    sc.noise = NoiseModel{1.0, 1.0, 1.0};

    // Launch means with the dispersions used by the random-IC variant.
    InitialDistribution& d = sc.init;
    d.x = {0.0, 3.0};
    d.y = {0.0, 3.0};
    d.z = {0.0, 0.0};
    d.phi = {2.9, 1.0};
    d.theta = {0.267, 0.017};
    d.psi = {-0.007, 0.002};
    d.u = {400.0, 2.0};
    d.v = {0.0, 0.01};
    d.w = {0.0, 0.001};
    d.p = {399.7, 3.0};
    d.q = {0.43, 0.01};
    d.r = {-1.54, 0.01};

    CanardConfig c;
    const double area = 0.02104;
    const double diameter = std::sqrt(4.0 * area / std::numbers::pi);
    const double arm = 0.102;
    const std::array<std::array<double, 3>, 4> arms = {
        {{0.474, arm, 0.0}, {0.474, 0.0, arm}, {0.474, -arm, 0.0}, {0.474, 0.0, -arm}}};
    for (std::size_t i = 0; i < 4; ++i) {
        c.surfaces[i] = CanardSurface{diameter, area, arms[i][0], arms[i][1], arms[i][2],
                                      i < 2 ? 1.0 : -1.0};
    }
    c.c_l_alpha = 2.0 * std::numbers::pi;
    c.c_d0 = 0.0;
    c.c_d2 = 0.0;
    c.c_i = 0.0;
    sc.canards = c;

    sc.gains = ControlGains{-2.0, -1.5, 0.01, 0.015, 50.0 * p.D};

    sc.integration = IntegrationSettings{};
    return sc;
}

MlmState sample_initial_state(const InitialDistribution& dist, RandomStream& stream) {
    auto draw = [&stream](const GaussianComponent& c) {
        // The draw is consumed even for sd == 0 so that stream positions do
        // not depend on which components are degenerate.
        const double n = stream.normal();
        return c.mean + c.sd * n;
    };
    MlmState s;
    s.x = draw(dist.x);
    s.y = draw(dist.y);
    s.z = draw(dist.z);
    s.phi = draw(dist.phi);
    s.theta = draw(dist.theta);
    s.psi = draw(dist.psi);
    const double u = draw(dist.u);
    s.v_t = draw(dist.v);
    s.w_t = draw(dist.w);
    s.V = std::sqrt(u * u + s.v_t * s.v_t + s.w_t * s.w_t);
    s.p_t = draw(dist.p);
    s.q_t = draw(dist.q);
    s.r_t = draw(dist.r);
    return s;
}

} // namespace ipp
