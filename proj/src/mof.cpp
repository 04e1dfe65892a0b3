#include "frameflow/mof.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace frameflow {

ProjectorPair::ProjectorPair(int n) : P(Mat::Zero(n, n)), Q(Mat::Identity(n, n)) {
    P(n - 1, n - 1) = 1.0;
    Q(n - 1, n - 1) = 0.0;
}

Mat expm(const Mat& A) { return A.exp(); }

MofState mof_init(const FramePoint& r0) {
    const int n = static_cast<int>(r0.x.size());
    const ProjectorPair pq(n);
    const bool interior = r0.x(n - 1) > 0.0;
    const Mat Et = r0.e.transpose();
    MofState s;
    s.K1 = interior ? Mat(Et * pq.P) : Mat(Mat::Zero(n, n));
    s.K2 = Et * pq.Q;
    s.M = s.K() * r0.theta.transpose();
    return s;
}

Mat curvature_coupling(const CurvaturePack& pack, const CouplingScale& scale) {
    const int n = static_cast<int>(pack.ric.rows());
    Mat Rn(n, n);
    for (int g = 0; g < n; ++g)
        for (int b = 0; b < n; ++b) Rn(g, b) = pack.rr(g, n - 1, b, n - 1);
    return (scale.ric * pack.ric - scale.riem * Rn).transpose();
}

Mat frame_coupling(const Mat& coord_coupling, const FramePoint& r) {
    return r.e.transpose() * coord_coupling * r.theta.transpose();
}

MofState mof_step(const MofState& s, const StepRecord& rec, const Mat& theta_new, const CurvaturePack* pack,
                  const CouplingScale& scale, double dt) {
    const int n = static_cast<int>(s.K1.rows());
    const ProjectorPair pq(n);
    Mat K = s.K();
    if (rec.killed()) {
        // Normal block dies at the wall; the tangential block is frozen.
        K = K * pq.Q;
    } else {
        const Mat e_new = rec.e_post;
        K = K * (rec.theta_pre.transpose() * e_new.transpose());
        if (pack != nullptr) K = K * expm(curvature_coupling(*pack, scale) * dt);
    }
    if (!K.allFinite()) throw PathDiscarded("non-finite functional");
    MofState out;
    out.K1 = K * pq.P;
    out.K2 = K * pq.Q;
    out.M = K * theta_new.transpose();
    return out;
}

Mat mof_boundaryless_step(const Mat& M, const Mat& coupling_flat, double dt) {
    return M * expm(coupling_flat * dt);
}

std::vector<Mat> mof_along(const TrajectoryBuffer& traj, const PackProvider& packs, const CouplingScale& scale) {
    std::vector<Mat> out;
    out.reserve(traj.steps.size() + 1);
    MofState s = mof_init(traj.start);
    out.push_back(s.M);
    for (const auto& rec : traj.steps) {
        if (packs) {
            const CurvaturePack p = packs(rec.x_post);
            s = mof_step(s, rec, rec.theta_post, &p, scale, traj.dt);
        } else {
            s = mof_step(s, rec, rec.theta_post, nullptr, scale, traj.dt);
        }
        out.push_back(s.M);
    }
    return out;
}

double mof_multiplicativity_check(const TrajectoryBuffer& traj, std::size_t split, const PackProvider& packs,
                                  const CouplingScale& scale) {
    require(split <= traj.steps.size(), "split outside trajectory");
    const std::vector<Mat> full = mof_along(traj, packs, scale);
    // Restarted path: shifted trajectory starting from the frame at the split.
    TrajectoryBuffer shifted;
    shifted.dt = traj.dt;
    if (split == 0) {
        shifted.start = traj.start;
    } else {
        const StepRecord& r = traj.steps[split - 1];
        shifted.start.x = r.x_post;
        shifted.start.e = r.e_post;
        shifted.start.theta = r.theta_post;
    }
    shifted.steps.assign(traj.steps.begin() + static_cast<std::ptrdiff_t>(split), traj.steps.end());
    const std::vector<Mat> rest = mof_along(shifted, packs, scale);
    double defect = 0.0;
    for (std::size_t s = 0; s < rest.size(); ++s)
        defect = std::max(defect, (full[split + s] - full[split] * rest[s]).norm());
    return defect;
}

double equivariance_check(const TrajectoryBuffer& traj, const ConnectionField& conn, const Mat& A,
                          Direction direction, double tau_anchor, const StepOptions& opt) {
    const int n = conn.dim();
    require((A.transpose() * A - Mat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12, "A must be orthogonal");
    const std::vector<Mat> base = mof_along(traj, {}, CouplingScale::unit());

    PathState st(FramePoint(traj.start.x, traj.start.e * A.transpose()));
    TrajectoryBuffer rot;
    rot.start = st.frame;
    rot.dt = traj.dt;
    // Replays the recorded boundary-crossing decisions so that both runs see
    // the same kill events.
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        const StepRecord& r = traj.steps[i];
        const double s0 = direction == Direction::forward ? st.t : tau_anchor - st.t;
        const double s1 = direction == Direction::forward ? st.t + traj.dt : tau_anchor - st.t - traj.dt;
        StepOptions o = opt;
        o.bridge = false;
        StepRecord rec = heun_step(st, conn, s0, s1, traj.dt, A * r.dB, nullptr, o);
        rec.bridge_hit = r.bridge_hit;
        rot.steps.push_back(std::move(rec));
    }
    const std::vector<Mat> turned = mof_along(rot, {}, CouplingScale::unit());
    double defect = 0.0;
    for (std::size_t k = 0; k < base.size(); ++k)
        defect = std::max(defect, (turned[k] - A * base[k] * A.transpose()).norm());
    return defect;
}

double boundary_start_defect(const TrajectoryBuffer& traj) {
    const int n = static_cast<int>(traj.start.x.size());
    const ProjectorPair pq(n);
    const std::vector<Mat> ms = mof_along(traj, {}, CouplingScale::unit());
    double d = 0.0;
    for (const Mat& M : ms) d = std::max(d, (pq.P * traj.start.theta.transpose() * M).norm());
    return d;
}

}  // namespace frameflow
