#pragma once

#include "frameflow/types.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace frameflow {

// Uniform lattice on [0, L_0] x ... x [0, L_{n-1}]. Axis n-1 is the wall
// normal with x_n = 0 the boundary; the other axes are periodic, so their
// last node duplicates the first. Node order: axis 0 fastest, normal slowest.
struct StripGrid {
    int dim = 2;
    std::array<int, kMaxDim> npts{};
    std::array<double, kMaxDim> length{};

    StripGrid() = default;
    StripGrid(int n, std::array<int, kMaxDim> pts, std::array<double, kMaxDim> len);

    double h(int axis) const { return length[axis] / (npts[axis] - 1); }
    std::size_t size() const;
    std::size_t index(const std::array<int, kMaxDim>& ijk) const;
    std::array<int, kMaxDim> unravel(std::size_t node) const;
    Vec point(std::size_t node) const;
    bool on_wall(std::size_t node) const { return unravel(node)[dim - 1] == 0; }
    // Node that carries the value of a periodic duplicate (itself if not a duplicate).
    std::size_t canonical(std::size_t node) const;
};

int form_components(int dim, int degree);
// Index pairs (a, b), a < b, in storage order (12, 13, 23).
std::vector<std::pair<int, int>> form_pairs(int dim);
std::vector<std::string> form_component_names(int dim, int degree);

// Antisymmetric matrix from stored 2-form components and back.
Mat pack_2form(int dim, const double* comps);
void unpack_2form(const Mat& m, double* comps);

struct FormField {
    StripGrid grid;
    int degree = 2;
    int ncomp = 1;
    double tau = 0.0;
    std::vector<double> value;   // node * ncomp + c
    std::vector<double> stderr_;
    std::vector<std::string> names;
    std::size_t discarded = 0;  // Monte Carlo paths dropped while producing this field

    FormField() = default;
    FormField(const StripGrid& g, int deg, double t = 0.0);
    FormField(const StripGrid& g, int deg, std::vector<std::string> comp_names, double t);

    double& at(std::size_t node, int c) { return value[node * ncomp + c]; }
    double at(std::size_t node, int c) const { return value[node * ncomp + c]; }
    double& err(std::size_t node, int c) { return stderr_[node * ncomp + c]; }
    double err(std::size_t node, int c) const { return stderr_[node * ncomp + c]; }
};

// Multilinear interpolation of one component, periodic tangentially and
// clamped in the normal direction.
double interpolate(const StripGrid& g, const std::vector<double>& data, int stride, int comp, const Vec& x);

using VelocityFn = std::function<Vec(double, const Vec&)>;

// Velocity time slices on a grid. Linear in time between slices; a single
// slice is treated as steady.
class VelocityField {
public:
    VelocityField() = default;
    explicit VelocityField(const StripGrid& g) : grid_(g) {}

    void add_slice(double tau, std::vector<double> u);
    void set_last(std::vector<double> u);
    std::size_t slices() const { return times_.size(); }
    double time(std::size_t k) const { return times_[k]; }
    const std::vector<double>& slice(std::size_t k) const { return data_[k]; }
    const StripGrid& grid() const { return grid_; }
    double t_min() const;
    double t_max() const;

    Vec eval(double tau, const Vec& x) const;

private:
    StripGrid grid_;
    std::vector<double> times_;
    std::vector<std::vector<double>> data_;
};

}  // namespace frameflow
