#pragma once

#include "frameflow/paths.hpp"

namespace frameflow {

struct ProjectorPair {
    Mat P;  // selects the wall-normal coordinate
    Mat Q;
    explicit ProjectorPair(int n);
};

// Curvature coefficients (Ricci, normal curvature): unit {1/2, 1}, NS {nu, 2nu}.
struct CouplingScale {
    double ric = 0.5;
    double riem = 1.0;
    static CouplingScale unit() { return {0.5, 1.0}; }
    static CouplingScale navier_stokes(double nu) { return {nu, 2.0 * nu}; }
};

// K has rows indexed by the starting frame slot and columns by the current
// coordinate index; K1 = K P (normal block), K2 = K Q (tangential block).
struct MofState {
    Mat K1;
    Mat K2;
    Mat M;  // (K1 + K2) theta^T
    Mat K() const { return K1 + K2; }
};

MofState mof_init(const FramePoint& r0);

// Coordinate-index coupling c_ric Ric - c_riem Rn, transposed for right action.
Mat curvature_coupling(const CurvaturePack& pack, const CouplingScale& scale);

// Frame-index (flat) contraction of a coordinate coupling at frame r.
Mat frame_coupling(const Mat& coord_coupling, const FramePoint& r);

// One step of the functional. pack may be null (zero curvature).
MofState mof_step(const MofState& state, const StepRecord& rec, const Mat& theta_new, const CurvaturePack* pack,
                  const CouplingScale& scale, double dt);

// dM = M C dt with C the frame-contracted coupling; exact exponential step.
Mat mof_boundaryless_step(const Mat& M, const Mat& coupling_flat, double dt);

// Functional values along a recorded trajectory, M(0) .. M(m).
using PackProvider = std::function<CurvaturePack(const Vec&)>;
std::vector<Mat> mof_along(const TrajectoryBuffer& traj, const PackProvider& packs, const CouplingScale& scale);

// || M(split + s) - M(split) M_restarted(s) || maximised over s.
double mof_multiplicativity_check(const TrajectoryBuffer& traj, std::size_t split, const PackProvider& packs = {},
                                  const CouplingScale& scale = CouplingScale::unit());

// Re-simulates the path with frame e A^T and increments A dB, returns
// max over time of || M_rot - A M A^T ||.
double equivariance_check(const TrajectoryBuffer& traj, const ConnectionField& conn, const Mat& A,
                          Direction direction = Direction::forward, double tau_anchor = 0.0,
                          const StepOptions& opt = {});

// max over time of || P theta(0)^T M(t) ||.
double boundary_start_defect(const TrajectoryBuffer& traj);

Mat expm(const Mat& A);

}  // namespace frameflow
