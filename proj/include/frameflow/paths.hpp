#pragma once

#include "frameflow/frame_bundle.hpp"
#include "frameflow/rng.hpp"

#include <limits>
#include <optional>

namespace frameflow {

struct PathState {
    FramePoint frame;
    double phi = 0.0;  // accumulated local time (length units)
    double t = 0.0;
    bool on_boundary = false;

    PathState() = default;
    explicit PathState(FramePoint r);
};

struct StepRecord {
    Vec dB;
    double dphi = 0.0;
    Mat de;
    Vec x_pre, x_post;
    Mat theta_pre, e_post, theta_post;
    bool boundary_hit = false;  // reflected, or ended on the wall
    bool bridge_hit = false;    // wall crossing detected between grid times
    bool killed() const { return boundary_hit || bridge_hit; }
};

struct StepOptions {
    double strip_height = std::numeric_limits<double>::infinity();
    bool bridge = true;
};

// One Stratonovich-Heun step with reflection, Christoffels evaluated at s0
// (predictor) and s1 (corrector). dB is the Brownian increment.
StepRecord heun_step(PathState& state, const ConnectionField& conn, double s0, double s1, double dt, const Vec& dB,
                     PathRng* rng, const StepOptions& opt);

StepRecord step_forward(PathState& state, const ConnectionField& conn, double dt, PathRng& rng,
                        const StepOptions& opt = {});
// Christoffels at tau_anchor - t.
StepRecord step_backward_timedep(PathState& state, const ConnectionField& conn, double tau_anchor, double dt,
                                 PathRng& rng, const StepOptions& opt = {});

struct Reflection {
    double xn;
    double dphi;
};
Reflection skorokhod_reflect(double xn_proposed);

enum class Direction { forward, backward };

struct TrajectoryBuffer {
    FramePoint start;
    std::vector<StepRecord> steps;
    std::optional<std::size_t> first_hit_index;  // time index of first wall contact
    std::optional<std::size_t> last_exit_index;  // time index of last wall contact
    PathState final_state;
    double dt = 0.0;
};

TrajectoryBuffer simulate_path(const FramePoint& r0, double horizon, double dt, const ConnectionField& conn,
                               Direction direction, double tau_anchor, PathRng& rng, const StepOptions& opt = {});

// Number of steps m with horizon = m * dt; throws if not an integer multiple.
std::size_t step_count(double horizon, double dt);

}  // namespace frameflow
