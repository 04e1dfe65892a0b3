#include <doctest.h>

#include "frameflow/paths.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>

using namespace frameflow;

namespace {

Vec vec2(double a, double b) {
    Vec x(2);
    x << a, b;
    return x;
}

ConnectionField flat(int n, double nu) { return ConnectionField(MetricModel::flat(n), nu, TraceTorsion::zero(n)); }

ConnectionField shear_flow(double nu) {
    return ConnectionField(MetricModel::flat(2), nu,
                           TraceTorsion::from_velocity(
                               2, [](double, const Vec& x) { return vec2(1.0 + x(1), -0.3 * std::sin(x(0))); }, nu));
}

}  // namespace

TEST_CASE("skorokhod reflection rule") {
    const Reflection a = skorokhod_reflect(0.5);
    CHECK(a.xn == 0.5);
    CHECK(a.dphi == 0.0);
    const Reflection b = skorokhod_reflect(-0.3);
    CHECK(b.xn == 0.3);
    CHECK(b.dphi == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("interior increments have variance 2 nu dt") {
    const double nu = 0.7, dt = 1e-3;
    const ConnectionField conn = flat(2, nu);
    PathState st(standard_frame(conn.metric(), nu, vec2(0.0, 10.0)));
    PathRng rng(derive_seed(3, {0}));
    const int m = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < m; ++i) {
        const double y0 = st.frame.x(1);
        step_forward(st, conn, dt, rng);
        const double q = std::pow(st.frame.x(1) - y0, 2) / dt;
        s += q;
        s2 += q * q;
        st.frame.x(1) = 10.0;  // stay far from the wall
    }
    const double mean = s / m, se = std::sqrt((s2 / m - mean * mean) / (m - 1));
    CHECK(std::abs(mean - 2 * nu) < 3 * se);
}

TEST_CASE("zero increment leaves the state unchanged except time") {
    const ConnectionField conn = flat(2, 0.5);
    PathState st(standard_frame(conn.metric(), 0.5, vec2(0.4, 0.9)));
    const PathState before = st;
    const StepRecord rec = heun_step(st, conn, 0.0, 1e-3, 1e-3, Vec::Zero(2), nullptr, {});
    CHECK(st.frame.x == before.frame.x);
    CHECK(st.frame.e == before.frame.e);
    CHECK(st.phi == 0.0);
    CHECK(st.t == doctest::Approx(1e-3));
    CHECK_FALSE(rec.killed());
}

TEST_CASE("constant flow produces drift -u") {
    const double nu = 0.5, dt = 1e-3, tau = 0.05;
    const ConnectionField conn(MetricModel::flat(2), nu,
                               TraceTorsion::from_velocity(2, [](double, const Vec&) { return vec2(1.0, 0.0); }, nu));
    const int paths = 100000;
    double s = 0, s2 = 0, sy = 0, sy2 = 0;
    for (int p = 0; p < paths; ++p) {
        PathRng rng(derive_seed(17, {std::uint64_t(p)}));
        PathState st(standard_frame(conn.metric(), nu, vec2(0.0, 5.0)));
        for (int k = 0; k < 50; ++k) step_forward(st, conn, dt, rng);
        const double vx = st.frame.x(0) / tau, vy = (st.frame.x(1) - 5.0) / tau;
        s += vx;
        s2 += vx * vx;
        sy += vy;
        sy2 += vy * vy;
    }
    const double mx = s / paths, sex = std::sqrt((s2 / paths - mx * mx) / (paths - 1));
    const double my = sy / paths, sey = std::sqrt((sy2 / paths - my * my) / (paths - 1));
    CHECK(std::abs(mx + 1.0) < 3 * sex);
    CHECK(std::abs(my) < 3 * sey);
}

TEST_CASE("forward and backward steppers coincide for steady connections") {
    const ConnectionField conn = shear_flow(0.5);
    PathState a(standard_frame(conn.metric(), 0.5, vec2(0.1, 0.05)));
    PathState b = a;
    PathRng ra(99), rb(99);
    for (int k = 0; k < 500; ++k) {
        const StepRecord x = step_forward(a, conn, 1e-3, ra);
        const StepRecord y = step_backward_timedep(b, conn, 0.5, 1e-3, rb);
        CHECK(x.dphi == y.dphi);
        CHECK(x.bridge_hit == y.bridge_hit);
    }
    CHECK(a.frame.x == b.frame.x);
    CHECK(a.frame.e == b.frame.e);
    CHECK(a.phi == b.phi);
}

TEST_CASE("backward step outside the torsion time range throws") {
    const ConnectionField conn(
        MetricModel::flat(2), 0.5,
        TraceTorsion::from_velocity(2, [](double t, const Vec&) { return vec2(t, 0.0); }, 0.5, 0.0, 1.0));
    PathState st(standard_frame(conn.metric(), 0.5, vec2(0.0, 1.0)));
    PathRng rng(1);
    CHECK_THROWS_AS(step_backward_timedep(st, conn, 1.5, 1e-2, rng), OutOfRange);
    CHECK_NOTHROW(step_backward_timedep(st, conn, 1.0, 1e-2, rng));
}

TEST_CASE("one Heun step with time-dependent torsion matches the hand computation") {
    // u(tau) = tau (1, 0.5), nu = 0.5, anchor 0.6, dt 0.1, dB = (0.3, -0.2).
    const ConnectionField conn(
        MetricModel::flat(2), 0.5,
        TraceTorsion::from_velocity(2, [](double t, const Vec&) { return vec2(t, 0.5 * t); }, 0.5, 0.0, 1.0));
    PathState st(standard_frame(conn.metric(), 0.5, vec2(0.2, 1.0)));
    heun_step(st, conn, 0.6, 0.5, 0.1, vec2(0.3, -0.2), nullptr, {});
    CHECK(std::abs(st.frame.x(0) - 0.458) < 1e-14);
    CHECK(std::abs(st.frame.x(1) - 0.737) < 1e-14);
    Mat want(2, 2);
    want << 0.9050866401505626, 0.42522720258817664, -0.42522720258817664, 0.9050866401505625;
    CHECK((st.frame.e - want).cwiseAbs().maxCoeff() < 1e-12);

    // The backward stepper evaluates at anchor and anchor - dt.
    PathState a(standard_frame(conn.metric(), 0.5, vec2(0.2, 1.0)));
    PathState b = a;
    PathRng r1(5), r2(5);
    step_backward_timedep(a, conn, 0.6, 0.1, r1);
    Vec dB(2);
    dB(0) = std::sqrt(0.1) * r2.normal();
    dB(1) = std::sqrt(0.1) * r2.normal();
    heun_step(b, conn, 0.6, 0.5, 0.1, dB, nullptr, {});
    CHECK(a.frame.x == b.frame.x);
    CHECK(a.frame.e == b.frame.e);
}

TEST_CASE("local time of reflected Brownian motion") {
    const ConnectionField conn = flat(2, 0.5);
    const int paths = 100000;
    double s = 0, s2 = 0;
    for (int p = 0; p < paths; ++p) {
        PathRng rng(derive_seed(21, {std::uint64_t(p)}));
        PathState st(standard_frame(conn.metric(), 0.5, vec2(0.0, 0.0)));
        for (int k = 0; k < 1000; ++k) step_forward(st, conn, 1e-3, rng);
        s += st.phi;
        s2 += st.phi * st.phi;
    }
    const double mean = s / paths, se = std::sqrt((s2 / paths - mean * mean) / (paths - 1));
    CHECK(std::abs(mean - std::sqrt(2.0 / M_PI)) < 3 * se);
}

TEST_CASE("trajectory hit indices") {
    const ConnectionField conn = flat(2, 0.5);
    PathRng rng(4);
    const TrajectoryBuffer on = simulate_path(standard_frame(conn.metric(), 0.5, vec2(0.0, 0.0)), 0.01, 1e-3, conn,
                                              Direction::forward, 0.0, rng);
    REQUIRE(on.first_hit_index.has_value());
    CHECK(*on.first_hit_index == 0);

    const TrajectoryBuffer far = simulate_path(standard_frame(conn.metric(), 0.5, vec2(0.0, 50.0)), 0.1, 1e-3, conn,
                                               Direction::forward, 0.0, rng);
    CHECK_FALSE(far.first_hit_index.has_value());
    for (const StepRecord& r : far.steps) CHECK(r.dphi == 0.0);
    CHECK(far.steps.size() == 100);
    CHECK_THROWS_AS(step_count(0.1, 0.03), ContractViolation);
}

TEST_CASE("wall hitting probability matches the reflection principle") {
    const double nu = 0.5, y0 = 0.1, tau = 1.0;
    const ConnectionField conn = flat(2, nu);
    const int paths = 100000;
    int hits = 0;
    for (int p = 0; p < paths; ++p) {
        PathRng rng(derive_seed(8, {std::uint64_t(p)}));
        PathState st(standard_frame(conn.metric(), nu, vec2(0.0, y0)));
        for (int k = 0; k < 1000; ++k)
            if (step_forward(st, conn, 1e-3, rng).killed()) {
                ++hits;
                break;
            }
    }
    const boost::math::normal_distribution<double> Z;
    const double expect = 2.0 * boost::math::cdf(boost::math::complement(Z, y0 / std::sqrt(2 * nu * tau)));
    CHECK(std::abs(double(hits) / paths - expect) / expect < 0.02);
}

TEST_CASE("per-step invariants along curved-flow paths") {
    const double nu = 0.5;
    const ConnectionField conn = shear_flow(nu);
    double worst = 0.0;
    for (int p = 0; p < 200; ++p) {
        PathRng rng(derive_seed(2, {std::uint64_t(p)}));
        PathState st(standard_frame(conn.metric(), nu, vec2(0.3, 0.02)));
        double phi = 0.0;
        for (int k = 0; k < 500; ++k) {
            const StepRecord r = step_forward(st, conn, 1e-3, rng);
            CHECK(r.dphi >= 0.0);
            if (r.dphi > 0.0) CHECK(r.boundary_hit);
            CHECK(st.phi >= phi);
            phi = st.phi;
            const Mat d = st.frame.e.transpose() * st.frame.e / (2 * nu) - Mat::Identity(2, 2);
            worst = std::max(worst, d.cwiseAbs().maxCoeff());
        }
    }
    CHECK(worst <= 1e-9);
}
