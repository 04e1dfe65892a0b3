#pragma once

#include "frameflow/grid.hpp"

#include <functional>

namespace frameflow {

enum class Parity { even, odd };

// Half-line heat kernel solution of f_t = nu f_yy on y > 0 with f(0, y) = f0(y):
// even parity is the Neumann wall, odd parity the Dirichlet wall.
double images_kernel_solution(const std::function<double(double)>& f0, double nu, double tau, double x,
                              Parity parity);

enum class WallBc { dirichlet, neumann };

struct FdOptions {
    // Optional zeroth-order coupling: df/dt += R(t, x) f (ncomp x ncomp).
    std::function<Eigen::MatrixXd(double, const Vec&)> reaction;
    double max_steps = 1e8;
};

// Explicit finite differences for f_t = nu Lap f - u . grad f on the strip:
// periodic tangentially, per-component wall condition, Neumann at the top.
// Advection is central where the cell Peclet number is at most 2, upwind otherwise.
FormField fd_advdiff(const FormField& f0, const VelocityFn& u, double nu, double T, const std::vector<WallBc>& bc,
                     const FdOptions& opt = {});

// Time step the solver will use for a given velocity bound.
double fd_stable_dt(const StripGrid& g, double umax, double nu, double T);

// 2D vorticity-stream-function oracle; returns slices at the requested times.
std::vector<FormField> fd_ns2d_vorticity(const FormField& omega0, double nu, const std::vector<double>& times);

}  // namespace frameflow
