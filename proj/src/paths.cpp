#include "frameflow/paths.hpp"

#include <cmath>

namespace frameflow {

PathState::PathState(FramePoint r) : frame(std::move(r)) {
    require(frame.x(frame.x.size() - 1) >= 0.0, "path must start in the closed half-space");
    on_boundary = frame.x(frame.x.size() - 1) == 0.0;
}

Reflection skorokhod_reflect(double xn) {
    if (xn >= 0.0) return {xn, 0.0};
    return {-xn, -2.0 * xn};
}

StepRecord heun_step(PathState& st, const ConnectionField& conn, double s0, double s1, double dt, const Vec& dB,
                     PathRng* rng, const StepOptions& opt) {
    const int n = conn.dim();
    const Mat& E = st.frame.e;
    StepRecord rec;
    rec.dB = dB;
    rec.x_pre = st.frame.x;
    rec.theta_pre = st.frame.theta;

    const Vec dX0 = E * dB;
    Vec x = st.frame.x;
    Mat En = E;
    if (conn.is_trivial()) {
        x += dX0;
    } else {
        const Mat A0 = conn.transport(s0, x, dX0);
        const Mat A0E = A0 * E;
        const Vec xp = x + dX0;
        const Mat Ep = E + A0E;
        const Vec dX1 = Ep * dB;
        const Mat A1 = conn.transport(s1, xp, dX1);
        x += 0.5 * (dX0 + dX1);
        En = E + 0.5 * (A0E + A1 * Ep);
    }

    const double pre_n = rec.x_pre(n - 1);
    const double prop_n = x(n - 1);
    const Reflection refl = skorokhod_reflect(prop_n);
    if (refl.dphi > 0.0) {
        x(n - 1) = refl.xn;
        if (!conn.is_trivial()) {
            Vec xb = x;
            xb(n - 1) = 0.0;
            Vec v = Vec::Zero(n);
            v(n - 1) = refl.dphi;
            En += conn.transport(s1, xb, v) * E;
        }
    } else if (opt.bridge && rng != nullptr) {
        // Probability that the Brownian bridge between the two grid points
        // touched the wall.
        const double var = E.row(n - 1).squaredNorm() * dt;
        const double expo = 2.0 * pre_n * prop_n / var;
        if (expo < 40.0 && rng->uniform() < std::exp(-expo)) rec.bridge_hit = true;
    }
    if (x(n - 1) > opt.strip_height) x(n - 1) = std::max(0.0, 2.0 * opt.strip_height - x(n - 1));

    if (!conn.is_trivial()) {
        const Mat G = conn.metric().is_flat() ? Mat(Mat::Identity(n, n) / (2.0 * conn.nu()))
                                              : Mat(conn.metric().g(x) / (2.0 * conn.nu()));
        En = orthonormalize(En, G);
        st.frame.theta = small_inverse(En);
        if (!st.frame.theta.allFinite()) throw FrameCollapse("frame inversion failed");
    }
    rec.de = En - E;
    st.frame.e = En;
    st.frame.x = x;
    st.phi += refl.dphi;
    st.t += dt;
    st.on_boundary = refl.dphi > 0.0 || x(n - 1) == 0.0;

    rec.dphi = refl.dphi;
    rec.x_post = x;
    rec.e_post = En;
    rec.theta_post = st.frame.theta;
    rec.boundary_hit = st.on_boundary;
    return rec;
}

namespace {

Vec draw_increment(int n, double dt, PathRng& rng) {
    Vec dB(n);
    const double s = std::sqrt(dt);
    for (int k = 0; k < n; ++k) dB(k) = s * rng.normal();
    return dB;
}

}  // namespace

StepRecord step_forward(PathState& st, const ConnectionField& conn, double dt, PathRng& rng, const StepOptions& opt) {
    require(dt > 0.0, "dt must be positive");
    const Vec dB = draw_increment(conn.dim(), dt, rng);
    return heun_step(st, conn, st.t, st.t + dt, dt, dB, &rng, opt);
}

StepRecord step_backward_timedep(PathState& st, const ConnectionField& conn, double tau_anchor, double dt,
                                 PathRng& rng, const StepOptions& opt) {
    require(dt > 0.0, "dt must be positive");
    const double s0 = tau_anchor - st.t;
    const double s1 = tau_anchor - st.t - dt;
    const auto& q = conn.torsion();
    if (!q.is_zero()) {
        const double slack = 1e-9 * dt;
        if (s0 > q.t_max() + slack || s1 < q.t_min() - slack)
            throw OutOfRange("backward step leaves the stored torsion time range");
    }
    const Vec dB = draw_increment(conn.dim(), dt, rng);
    return heun_step(st, conn, s0, std::max(s1, q.t_min()), dt, dB, &rng, opt);
}

std::size_t step_count(double horizon, double dt) {
    require(dt > 0.0 && horizon >= 0.0, "horizon and dt must be non-negative, dt positive");
    const double m = horizon / dt;
    const double r = std::round(m);
    require(std::abs(m - r) <= 1e-9 * std::max(1.0, m), "horizon must be an integer multiple of dt");
    return static_cast<std::size_t>(r);
}

TrajectoryBuffer simulate_path(const FramePoint& r0, double horizon, double dt, const ConnectionField& conn,
                               Direction direction, double tau_anchor, PathRng& rng, const StepOptions& opt) {
    const std::size_t m = step_count(horizon, dt);
    TrajectoryBuffer tb;
    tb.start = r0;
    tb.dt = dt;
    tb.steps.reserve(m);
    PathState st(r0);
    if (st.on_boundary) tb.first_hit_index = tb.last_exit_index = 0;
    for (std::size_t i = 0; i < m; ++i) {
        StepRecord rec = direction == Direction::forward ? step_forward(st, conn, dt, rng, opt)
                                                         : step_backward_timedep(st, conn, tau_anchor, dt, rng, opt);
        if (rec.killed()) {
            if (!tb.first_hit_index) tb.first_hit_index = i + 1;
            tb.last_exit_index = i + 1;
        }
        tb.steps.push_back(std::move(rec));
    }
    tb.final_state = st;
    return tb;
}

}  // namespace frameflow
