#pragma once

#include "frameflow/mof.hpp"

#include <cstdint>
#include <functional>

namespace frameflow {

struct McConfig {
    std::size_t n_paths = 1000;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    double strip_height = std::numeric_limits<double>::infinity();
    bool antithetic = false;
    bool bridge = true;
    int workers = 1;
    double max_discard_fraction = 1e-3;

    void validate() const;
};

struct EstimatorResult {
    std::vector<double> value;
    std::vector<double> stderr_;
    std::size_t n_effective = 0;
    std::size_t n_discarded = 0;
};

// Initial data: a p-form evaluated at base points, components in storage order.
struct FormSource {
    int dim = 2;
    int degree = 0;
    std::function<void(const Vec&, double*)> eval;

    int ncomp() const { return form_components(dim, degree); }
    Mat matrix(const Vec& x) const;  // 1x1, n x 1 or antisymmetric n x n

    static FormSource scalar(int dim, std::function<double(const Vec&)> f);
    static FormSource one_form(int dim, std::function<Vec(const Vec&)> f);
    static FormSource two_form(int dim, std::function<void(const Vec&, double*)> f);
    // Multilinear interpolation of a grid field.
    static FormSource from_field(const FormField& f);
};

struct FormOptions {
    // Frame-bundle curvature; defaults to the metric's own curvature when it is curved.
    PackProvider packs;
    std::optional<CouplingScale> scale;  // default: navier_stokes(nu)
    std::uint64_t key_offset = 0;
};

// Mean and standard error with a fixed pairwise summation order.
EstimatorResult reduce_statistics(const std::vector<std::vector<double>>& samples);

// Feynman-Kac estimates at several points. Paths run backward from tau with
// Christoffels at tau - t; key[i] selects the random substreams of point i.
std::vector<EstimatorResult> estimate_points(const FormSource& src, const std::vector<Vec>& points,
                                             const std::vector<std::uint64_t>& keys, double tau,
                                             const ConnectionField& conn, const McConfig& cfg,
                                             const FormOptions& opt = {});

EstimatorResult heat_scalar_estimate(const std::function<double(const Vec&)>& f, const Vec& x0, double tau,
                                     const ConnectionField& conn, const McConfig& cfg, std::uint64_t key = 0);

EstimatorResult heat_form_estimate(const FormSource& omega, const Vec& x0, double tau, const ConnectionField& conn,
                                   const McConfig& cfg, const FormOptions& opt = {}, std::uint64_t key = 0);

FormField grid_field_estimate(const FormSource& omega, const StripGrid& grid, double tau,
                              const ConnectionField& conn, const McConfig& cfg, const FormOptions& opt = {});

struct LocalTimeResult {
    EstimatorResult phi;       // E[phi(tau)]
    EstimatorResult hit;       // fraction of paths touching the wall
};

LocalTimeResult localtime_estimate(const Vec& x0, double tau, const ConnectionField& conn, const McConfig& cfg,
                                   std::uint64_t key = 0);

// Runs body(i) for i in [0, n) on the requested number of threads. The first
// exception thrown by any body is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

}  // namespace frameflow
