#pragma once

#include "frameflow/estimator.hpp"

namespace frameflow {

// Solves Lap psi = -omega on a 2D strip, psi = 0 at the wall and the top,
// periodic tangentially. Values are node-indexed.
std::vector<double> poisson_strip_2d(const StripGrid& g, const std::vector<double>& omega);

// u = (d psi/dy, -d psi/dx), node * 2 + component.
std::vector<double> velocity_from_vorticity_2d(const FormField& omega);

// Centred-difference exterior derivative of a velocity slice.
FormField vorticity_from_velocity(const StripGrid& g, const std::vector<double>& u);

// Max centred-difference divergence over interior nodes.
double divergence_max(const StripGrid& g, const std::vector<double>& u);
// Max |tangential velocity| on wall nodes.
double wall_slip_max(const StripGrid& g, const std::vector<double>& u);

struct NsOptions {
    int probe_stride = 1;
    int picard_sweeps = 2;
    double picard_tol = 0.5;
};

struct NsSlice {
    double tau = 0.0;
    FormField omega;
    std::vector<double> u;
    std::vector<double> picard_residuals;
    BcResidual bc;
    double wall_slip = 0.0;
    double divergence = 0.0;
    std::size_t discarded = 0;
};

std::vector<NsSlice> ns2d_solve(const FormSource& omega0, double nu, double T, double dtau, const StripGrid& grid,
                                const McConfig& cfg, const NsOptions& opt = {});

// Hodge duality in flat 3D: i_B mu with components (W12, W13, W23) = (B3, -B2, B1).
std::array<double, 3> b_to_2form(const Vec& B);
Vec two_form_to_b(const double* comps);

struct DynamoSlice {
    double tau = 0.0;
    FormField omega;  // dual 2-form
    FormField B;      // components B1, B2, B3 with stderr
    BcResidual bc;
    std::size_t discarded = 0;
};

std::vector<DynamoSlice> dynamo3d_solve(const std::function<Vec(const Vec&)>& B0, const VelocityFn& u, double nu_m,
                                        double T, double dtau, const StripGrid& grid, const McConfig& cfg);

}  // namespace frameflow
