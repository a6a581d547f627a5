#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include <Eigen/LU>

#include "ipp/dynamics.hpp"
#include "ipp/error.hpp"
#include "ipp/moments.hpp"

using namespace ipp;

namespace {

const MomentLayout& L() { return MomentLayout::instance(); }

Scenario level_scenario() {
    Scenario sc = nominal_scenario().without_noise();
    sc.canards.reset();
    sc.gains.reset();
    sc.init = sc.init.point_mass();
    sc.init.theta.mean = 0.0;
    sc.init.psi.mean = 0.0;
    sc.init.phi.mean = 0.0;
    sc.init.v.mean = 0.0;
    sc.init.w.mean = 0.0;
    sc.init.q.mean = 0.0;
    sc.init.r.mean = 0.0;
    return sc;
}

} // namespace

TEST_CASE("layout lists every diagonal and is symmetric") {
    CHECK(L().size() == kMomentStates + static_cast<int>(L().pairs().size()));
    for (int a = 0; a < kMomentStates; ++a) {
        CHECK(L().pair_slot(a, a) >= kMomentStates);
        for (int b = 0; b < kMomentStates; ++b) {
            CHECK(L().pair_slot(a, b) == L().pair_slot(b, a));
        }
    }
    std::set<std::string> names;
    for (int s = 0; s < L().size(); ++s) {
        names.insert(L().name(s));
    }
    CHECK(names.size() == static_cast<std::size_t>(L().size()));
    CHECK(L().slot({kMx, kMdp}) >= 0);
    CHECK(L().slot({kMx, kMy}) >= 0);
    CHECK(L().slot({kMx, kMvt}) == -1);
}

TEST_CASE("point-mass initial moments") {
    const Scenario sc = nominal_scenario();
    const InitialDistribution pm = sc.init.point_mass();
    const TransformedMoments mu = init_moments(pm, sc);
    const MlmState s = pm.mean_state();
    const StateVector v = s.to_vector();
    for (int a = 0; a < kStateDim; ++a) {
        CHECK(mu.mean(a).real() == doctest::Approx(v[a]));
        CHECK(mu.mean(a).imag() == 0.0);
        CHECK(mu.variance(a) == doctest::Approx(0.0).epsilon(1e-9));
    }
    const Complex dp = std::polar(1.0, s.theta);
    CHECK(std::abs(mu.mean(kMdp) - dp) < 1e-15);
    CHECK(std::abs(mu.mean(kMdm) - std::conj(dp)) < 1e-15);
    CHECK(std::abs(mu.pair(kMdp, kMdp) - dp * dp) < 1e-15);
    CHECK(std::abs(mu.pair(kMx, kMdp) - v[kX] * dp) < 1e-15);
    CHECK(mu.V0 == doctest::Approx(s.V));
}

TEST_CASE("dispersed initial moments") {
    const Scenario sc = nominal_scenario();
    InitialDistribution d = sc.init;
    d.x.sd = 3.0;
    d.theta.sd = 0.1;
    const TransformedMoments mu = init_moments(d, sc);
    CHECK(mu.variance(kMx) == doctest::Approx(9.0));
    CHECK(std::abs(mu.mean(kMdp)) == doctest::Approx(std::exp(-0.005)));
    CHECK(std::arg(mu.mean(kMdp)) == doctest::Approx(d.theta.mean));
    CHECK(std::abs(mu.pair(kMdp, kMdp)) == doctest::Approx(std::exp(-0.02)));
    CHECK(mu.covariance(kMx, kMy) == doctest::Approx(0.0));
    CHECK_THROWS_AS(mu.pair(kMx, kMvt), std::out_of_range);
}

TEST_CASE("closure rules") {
    const Scenario sc = nominal_scenario();
    InitialDistribution d = sc.init;
    d.x.sd = 2.0;
    d.y.sd = 1.5;
    d.theta.sd = 0.05;
    TransformedMoments mu = init_moments(d, sc);
    mu.values[L().pair_slot(kMx, kMdp)] += Complex(0.3, -0.2);

    SUBCASE("retained moments are returned as stored") {
        CHECK(closure_factorize({kMx}, mu) == mu.mean(kMx));
        CHECK(closure_factorize({kMx, kMx}, mu) == mu.pair(kMx, kMx));
        CHECK(closure_factorize({kMdp, kMx}, mu) == mu.pair(kMx, kMdp));
    }
    SUBCASE("delta pairs cancel") {
        CHECK(closure_factorize({kMdp, kMdm}, mu) == Complex(1.0, 0.0));
        CHECK(closure_factorize({kMx, kMdp, kMdm}, mu) == mu.mean(kMx));
        CHECK(closure_factorize({kMdm, kMdp, kMdp}, mu) == mu.mean(kMdp));
    }
    SUBCASE("unretained pairs become products of means") {
        CHECK(closure_factorize({kMx, kMvt}, mu) == mu.mean(kMx) * mu.mean(kMvt));
    }
    SUBCASE("third-order moments use a retained pair") {
        const Complex v = closure_factorize({kMx, kMdp, kMqt}, mu);
        CHECK(v == mu.pair(kMx, kMdp) * mu.mean(kMqt));
        const Complex sq = closure_factorize({kMx, kMx, kMdp}, mu);
        CHECK(sq == mu.pair(kMx, kMx) * mu.mean(kMdp));
    }
    SUBCASE("plans consist of retained factors and reproduce the value") {
        const std::vector<MultiIndex> cases = {
            {kMx, kMdp, kMqt}, {kMpt, kMvt, kMdm}, {kMy, kMz, kMV}, {kMwt, kMwt, kMwt},
            {kMdp, kMdp, kMpsi}, {kMx, kMphi}, {kMtheta}};
        for (const MultiIndex& m : cases) {
            Complex prod = 1.0;
            for (const MultiIndex& f : closure_plan(m)) {
                REQUIRE(L().slot(f) >= 0);
                prod *= mu.values[L().slot(f)];
                // A retained factor closes onto itself.
                CHECK(closure_factorize(f, mu) == mu.values[L().slot(f)]);
            }
            CHECK(std::abs(prod - closure_factorize(m, mu)) == 0.0);
        }
    }
    SUBCASE("order four is rejected") {
        CHECK_THROWS_AS(closure_factorize({kMx, kMx, kMy, kMz}, mu), std::invalid_argument);
    }
}

TEST_CASE("drift of the level point mass") {
    Scenario sc = level_scenario();
    sc.noise = NoiseModel{0.7, 0.0, 0.0};
    const TransformedMoments mu = init_moments(sc.init, sc);
    const TransformedMoments d = moment_rhs(mu, sc);
    CHECK(d.mean(kMx).real() == doctest::Approx(sc.params.D));
    CHECK(std::abs(d.mean(kMy)) < 1e-14);
    CHECK(std::abs(d.mean(kMz)) < 1e-14);
    CHECK(d.pair(kMx, kMx).real() == doctest::Approx(0.49));
    CHECK(std::abs(d.pair(kMy, kMy)) < 1e-14);
    CHECK(std::abs(d.mean(kMdp)) < 1e-14);
}

TEST_CASE("moment drift of a point mass equals the state drift") {
    Scenario sc = nominal_scenario().without_noise();
    sc.init = sc.init.point_mass();
    const TransformedMoments mu = init_moments(sc.init, sc);
    const TransformedMoments d = moment_rhs(mu, sc, SpeedClosure::FrozenV0);
    const MlmState s = sc.init.mean_state();
    const StateVector f = mlm_drift(s, sc.params, sc.wind, s.V);
    for (int a = 0; a < kStateDim; ++a) {
        CHECK(d.mean(a).real() == doctest::Approx(f[a]).epsilon(1e-10).scale(1e-10));
        CHECK(std::abs(d.mean(a).imag()) < 1e-10 * std::max(1.0, std::abs(f[a])));
    }
    const Complex expected_dp = Complex(0.0, 1.0) * std::polar(1.0, s.theta) * f[kTheta];
    CHECK(std::abs(d.mean(kMdp) - expected_dp) < 1e-12 * std::max(1.0, std::abs(expected_dp)));
}

TEST_CASE("frozen-speed moments follow the frozen deterministic path") {
    Scenario sc = nominal_scenario().without_noise();
    sc.canards.reset();
    sc.init = sc.init.point_mass();
    const double h = sc.integration.moment_step;
    const int steps = 800;
    TransformedMoments mu = init_moments(sc.init, sc);
    const auto ref = deterministic_reference(sc, h, steps, 1, mu.V0);
    auto f = [&](const Eigen::VectorXcd& v) {
        TransformedMoments m = mu;
        m.values = v;
        return moment_rhs(m, sc, SpeedClosure::FrozenV0).values;
    };
    Eigen::ArrayXd scale = Eigen::ArrayXd::Zero(kStateDim);
    for (const StateVector& r : ref) {
        scale = scale.max(r.array().abs());
    }
    Eigen::VectorXcd v = mu.values;
    double worst = 0.0;
    for (int k = 0; k <= steps; ++k) {
        for (int a = 0; a < kStateDim; ++a) {
            if (scale[a] > 0.0) {
                worst = std::max(worst, std::abs(v[a].real() - ref[k][a]) / scale[a]);
            }
        }
        const Eigen::VectorXcd k1 = f(v);
        const Eigen::VectorXcd k2 = f(v + 0.5 * h * k1);
        const Eigen::VectorXcd k3 = f(v + 0.5 * h * k2);
        const Eigen::VectorXcd k4 = f(v + h * k3);
        v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    CHECK(worst < 1e-7);
}

TEST_CASE("conjugate symmetry and real moments along the nominal run") {
    Scenario sc = nominal_scenario();
    MomentOptions opts;
    opts.record_every = 400;
    const MomentSeries series = integrate_moments(sc, opts);
    REQUIRE(series.impact);
    for (const TransformedMoments& m : series.samples) {
        CHECK(std::abs(m.mean(kMdp) - std::conj(m.mean(kMdm))) < 1e-9);
        CHECK(std::abs(m.pair(kMdp, kMdp) - std::conj(m.pair(kMdm, kMdm))) < 1e-9);
        for (int a = 0; a < kStateDim; ++a) {
            CHECK(std::abs(m.mean(a).imag()) <= 1e-9 * std::max(1.0, std::abs(m.mean(a))));
        }
        CHECK(std::abs(m.pair(kMx, kMx).imag()) <= 1e-9 * std::max(1.0, std::abs(m.pair(kMx, kMx))));
        CHECK(m.variance(kMx) >= -1e-9);
        CHECK(m.variance(kMy) >= -1e-9);
    }
}

TEST_CASE("x diffusion adds a linear variance ramp") {
    Scenario base = nominal_scenario().without_noise();
    base.canards.reset();
    base.init = base.init.point_mass();
    Scenario noisy = base;
    noisy.noise.a1 = 1.5;
    MomentOptions opts;
    opts.record_every = 800;
    const MomentSeries a = integrate_moments(base, opts);
    const MomentSeries b = integrate_moments(noisy, opts);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        const double dv = b.samples[k].variance(kMx) - a.samples[k].variance(kMx);
        CHECK(dv == doctest::Approx(2.25 * a.tau[k]).epsilon(1e-6).scale(1.0));
        CHECK(b.samples[k].mean(kMx).real() == doctest::Approx(a.samples[k].mean(kMx).real()));
        CHECK(b.samples[k].variance(kMy) == doctest::Approx(a.samples[k].variance(kMy)).scale(1e-9));
    }
}

TEST_CASE("vertical launch makes the secant singular") {
    Scenario sc = level_scenario();
    sc.init.theta.mean = std::numbers::pi / 2.0;
    const TransformedMoments mu = init_moments(sc.init, sc);
    try {
        moment_rhs(mu, sc);
        FAIL("expected a singularity");
    } catch (const SingularityError& e) {
        CHECK(e.term() == "1/cos(theta)");
    }
    CHECK_THROWS_AS(integrate_moments(sc), SingularityError);
}

TEST_CASE("short horizon reports no landing") {
    Scenario sc = nominal_scenario();
    sc.integration.max_span = 50.0;
    CHECK_THROWS_AS(integrate_moments(sc), HorizonError);
}

TEST_CASE("nominal prediction") {
    const Scenario sc = nominal_scenario();
    const MomentSeries s = integrate_moments(sc);
    REQUIRE(s.impact);
    const MomentImpactPrediction& p = *s.impact;
    CHECK(p.mean_x > 500.0);
    CHECK(p.mean_x < 750.0);
    CHECK(p.sd_x > 0.0);
    CHECK(p.sd_y > 0.0);
    CHECK(p.cov(0, 1) == doctest::Approx(p.cov(1, 0)));
    CHECK(p.cov.determinant() > 0.0);
    CHECK(p.sd_x == doctest::Approx(std::sqrt(p.cov(0, 0))));

    Scenario pm = sc;
    pm.init = pm.init.point_mass();
    const MomentSeries fixed = integrate_moments(pm);
    REQUIRE(fixed.impact);
    CHECK(p.sd_x > fixed.impact->sd_x);
    CHECK(p.sd_y > fixed.impact->sd_y);
}
