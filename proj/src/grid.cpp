#include "frameflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace frameflow {

StripGrid::StripGrid(int n, std::array<int, kMaxDim> pts, std::array<double, kMaxDim> len)
    : dim(n), npts(pts), length(len) {
    require(n >= 2 && n <= kMaxDim, "grid dimension must be 2 or 3");
    for (int a = 0; a < n; ++a) {
        require(npts[a] >= 2, "grid needs at least two nodes per axis");
        require(length[a] > 0.0, "grid extents must be positive");
    }
    for (int a = n; a < kMaxDim; ++a) {
        npts[a] = 1;
        length[a] = 0.0;
    }
}

std::size_t StripGrid::size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(npts[a]);
    return s;
}

std::size_t StripGrid::index(const std::array<int, kMaxDim>& ijk) const {
    std::size_t idx = 0;
    for (int a = dim - 1; a >= 0; --a) idx = idx * npts[a] + ijk[a];
    return idx;
}

std::array<int, kMaxDim> StripGrid::unravel(std::size_t node) const {
    std::array<int, kMaxDim> ijk{};
    for (int a = 0; a < dim; ++a) {
        ijk[a] = static_cast<int>(node % npts[a]);
        node /= npts[a];
    }
    return ijk;
}

Vec StripGrid::point(std::size_t node) const {
    const auto ijk = unravel(node);
    Vec x(dim);
    for (int a = 0; a < dim; ++a) x(a) = ijk[a] * h(a);
    return x;
}

std::size_t StripGrid::canonical(std::size_t node) const {
    auto ijk = unravel(node);
    for (int a = 0; a < dim - 1; ++a)
        if (ijk[a] == npts[a] - 1) ijk[a] = 0;
    return index(ijk);
}

int form_components(int dim, int degree) {
    switch (degree) {
        case 0:
            return 1;
        case 1:
            return dim;
        case 2:
            return dim * (dim - 1) / 2;
        default:
            throw ContractViolation("form degree must be 0, 1 or 2");
    }
}

std::vector<std::pair<int, int>> form_pairs(int dim) {
    std::vector<std::pair<int, int>> p;
    for (int a = 0; a < dim; ++a)
        for (int b = a + 1; b < dim; ++b) p.emplace_back(a, b);
    return p;
}

std::vector<std::string> form_component_names(int dim, int degree) {
    std::vector<std::string> names;
    if (degree == 0) {
        names.push_back("f");
    } else if (degree == 1) {
        for (int a = 0; a < dim; ++a) names.push_back("w" + std::to_string(a + 1));
    } else {
        for (auto [a, b] : form_pairs(dim)) names.push_back("W" + std::to_string(a + 1) + std::to_string(b + 1));
    }
    return names;
}

Mat pack_2form(int dim, const double* comps) {
    Mat m = Mat::Zero(dim, dim);
    int c = 0;
    for (auto [a, b] : form_pairs(dim)) {
        m(a, b) = comps[c];
        m(b, a) = -comps[c];
        ++c;
    }
    return m;
}

void unpack_2form(const Mat& m, double* comps) {
    int c = 0;
    for (auto [a, b] : form_pairs(static_cast<int>(m.rows()))) comps[c++] = 0.5 * (m(a, b) - m(b, a));
}

FormField::FormField(const StripGrid& g, int deg, double t)
    : FormField(g, deg, form_component_names(g.dim, deg), t) {}

FormField::FormField(const StripGrid& g, int deg, std::vector<std::string> comp_names, double t)
    : grid(g), degree(deg), ncomp(static_cast<int>(comp_names.size())), tau(t), names(std::move(comp_names)) {
    value.assign(grid.size() * ncomp, 0.0);
    stderr_.assign(grid.size() * ncomp, 0.0);
}

namespace {

// Corner node indices and weights of the multilinear stencil around x.
int stencil(const StripGrid& g, const Vec& x, std::array<std::size_t, 8>& idx, std::array<double, 8>& wt) {
    const int n = g.dim;
    std::array<int, kMaxDim> i0{};
    std::array<double, kMaxDim> w{};
    for (int a = 0; a < n; ++a) {
        const int cells = g.npts[a] - 1;
        double s = x(a) / g.h(a);
        if (a < n - 1) {
            s = s - cells * std::floor(s / cells);
        } else {
            s = std::clamp(s, 0.0, static_cast<double>(cells));
        }
        const int i = std::min(static_cast<int>(s), cells - 1);
        i0[a] = i;
        w[a] = s - i;
    }
    const int corners = 1 << n;
    for (int corner = 0; corner < corners; ++corner) {
        std::array<int, kMaxDim> ijk{};
        double c = 1.0;
        for (int a = 0; a < n; ++a) {
            const int bit = (corner >> a) & 1;
            ijk[a] = i0[a] + bit;
            c *= bit ? w[a] : 1.0 - w[a];
        }
        idx[corner] = g.index(ijk);
        wt[corner] = c;
    }
    return corners;
}

}  // namespace

double interpolate(const StripGrid& g, const std::vector<double>& data, int stride, int comp, const Vec& x) {
    std::array<std::size_t, 8> idx;
    std::array<double, 8> wt;
    const int m = stencil(g, x, idx, wt);
    double v = 0.0;
    for (int k = 0; k < m; ++k) v += wt[k] * data[idx[k] * stride + comp];
    return v;
}

void VelocityField::add_slice(double tau, std::vector<double> u) {
    require(u.size() == grid_.size() * grid_.dim, "velocity slice size mismatch");
    require(times_.empty() || tau > times_.back(), "velocity slices must be added in increasing time");
    times_.push_back(tau);
    data_.push_back(std::move(u));
}

void VelocityField::set_last(std::vector<double> u) {
    require(!data_.empty() && u.size() == data_.back().size(), "velocity slice size mismatch");
    data_.back() = std::move(u);
}

double VelocityField::t_min() const {
    if (times_.size() <= 1) return -std::numeric_limits<double>::infinity();
    return times_.front();
}

double VelocityField::t_max() const {
    if (times_.size() <= 1) return std::numeric_limits<double>::infinity();
    return times_.back();
}

Vec VelocityField::eval(double tau, const Vec& x) const {
    const int n = grid_.dim;
    Vec u = Vec::Zero(n);
    if (times_.empty()) return u;
    std::array<std::size_t, 8> idx;
    std::array<double, 8> wt;
    const int m = stencil(grid_, x, idx, wt);
    auto accumulate = [&](const std::vector<double>& d, double scale) {
        for (int k = 0; k < m; ++k) {
            const double w = scale * wt[k];
            for (int c = 0; c < n; ++c) u(c) += w * d[idx[k] * n + c];
        }
    };
    if (times_.size() == 1) {
        accumulate(data_[0], 1.0);
        return u;
    }
    const double slack = 1e-12 * (1.0 + std::abs(tau));
    if (tau < times_.front() - slack || tau > times_.back() + slack)
        throw OutOfRange("velocity queried outside stored time range");
    auto it = std::upper_bound(times_.begin(), times_.end(), tau);
    const auto k = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(it - times_.begin(), 1, static_cast<std::ptrdiff_t>(times_.size()) - 1));
    const double s = std::clamp((tau - times_[k - 1]) / (times_[k] - times_[k - 1]), 0.0, 1.0);
    if (s < 1.0) accumulate(data_[k - 1], 1.0 - s);
    if (s > 0.0) accumulate(data_[k], s);
    return u;
}

}  // namespace frameflow
