#include "frameflow/fluids.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>

namespace frameflow {

namespace {

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
std::unique_ptr<T[], FftwFree> fftw_buffer(std::size_t n) {
    return std::unique_ptr<T[], FftwFree>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

}  // namespace

std::vector<double> poisson_strip_2d(const StripGrid& g, const std::vector<double>& omega) {
    require(g.dim == 2, "2D grid required");
    require(omega.size() == g.size(), "vorticity size mismatch");
    const int nx = g.npts[0], ny = g.npts[1];
    const int m = nx - 1;  // unique periodic points
    const int rows = ny - 2;
    std::vector<double> psi(g.size(), 0.0);
    if (rows <= 0) return psi;
    const int modes = m / 2 + 1;
    const double hx = g.h(0), hy = g.h(1);

    auto real = fftw_buffer<double>(static_cast<std::size_t>(rows) * m);
    auto spec = fftw_buffer<fftw_complex>(static_cast<std::size_t>(rows) * modes);
    for (int j = 0; j < rows; ++j)
        for (int i = 0; i < m; ++i) real[j * m + i] = omega[static_cast<std::size_t>(j + 1) * nx + i];

    int len[1] = {m};
    fftw_plan fwd = fftw_plan_many_dft_r2c(1, len, rows, real.get(), nullptr, 1, m, spec.get(), nullptr, 1, modes,
                                           FFTW_ESTIMATE);
    fftw_plan bwd = fftw_plan_many_dft_c2r(1, len, rows, spec.get(), nullptr, 1, modes, real.get(), nullptr, 1, m,
                                           FFTW_ESTIMATE);
    if (fwd == nullptr || bwd == nullptr) throw NumericError("FFT planning failed");
    fftw_execute(fwd);

    // Per mode: (psi_{j+1} - 2 psi_j + psi_{j-1}) / hy^2 - lambda psi_j = -w_j.
    std::vector<double> cp(rows);
    std::vector<std::complex<double>> dp(rows);
    const double off = 1.0 / (hy * hy);
    for (int k = 0; k < modes; ++k) {
        const double s = std::sin(M_PI * k / m);
        const double lambda = 4.0 * s * s / (hx * hx);
        const double diag = -2.0 * off - lambda;
        for (int j = 0; j < rows; ++j) {
            const std::complex<double> rhs(-spec[j * modes + k][0], -spec[j * modes + k][1]);
            const double denom = diag - (j > 0 ? off * cp[j - 1] : 0.0);
            cp[j] = off / denom;
            dp[j] = (rhs - (j > 0 ? off * dp[j - 1] : 0.0)) / denom;
        }
        for (int j = rows - 2; j >= 0; --j) dp[j] -= cp[j] * dp[j + 1];
        for (int j = 0; j < rows; ++j) {
            spec[j * modes + k][0] = dp[j].real();
            spec[j * modes + k][1] = dp[j].imag();
        }
    }
    fftw_execute(bwd);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);

    for (int j = 0; j < rows; ++j) {
        for (int i = 0; i < m; ++i) psi[static_cast<std::size_t>(j + 1) * nx + i] = real[j * m + i] / m;
        psi[static_cast<std::size_t>(j + 1) * nx + m] = psi[static_cast<std::size_t>(j + 1) * nx];
    }
    for (double v : psi)
        if (!std::isfinite(v)) throw NumericError("Poisson solve produced non-finite values");
    return psi;
}

std::vector<double> velocity_from_vorticity_2d(const FormField& omega) {
    const StripGrid& g = omega.grid;
    require(g.dim == 2 && omega.degree == 2, "2D vorticity field required");
    const std::vector<double> psi = poisson_strip_2d(g, omega.value);
    const int nx = g.npts[0], ny = g.npts[1], m = nx - 1;
    const double hx = g.h(0), hy = g.h(1);
    std::vector<double> u(g.size() * 2, 0.0);
    auto P = [&](int i, int j) { return psi[static_cast<std::size_t>(j) * nx + i]; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int ic = i % m;
            double dy;
            if (j == 0) {
                dy = ny >= 3 ? (-3.0 * P(ic, 0) + 4.0 * P(ic, 1) - P(ic, 2)) / (2.0 * hy) : (P(ic, 1) - P(ic, 0)) / hy;
            } else if (j == ny - 1) {
                dy = ny >= 3 ? (3.0 * P(ic, j) - 4.0 * P(ic, j - 1) + P(ic, j - 2)) / (2.0 * hy)
                             : (P(ic, j) - P(ic, j - 1)) / hy;
            } else {
                dy = (P(ic, j + 1) - P(ic, j - 1)) / (2.0 * hy);
            }
            const double dx = (P((ic + 1) % m, j) - P((ic - 1 + m) % m, j)) / (2.0 * hx);
            const std::size_t node = static_cast<std::size_t>(j) * nx + i;
            u[node * 2] = dy;
            u[node * 2 + 1] = -dx;
        }
    return u;
}

namespace {

// d u_c / d x^a at a node: centred, periodic tangentially, one-sided at the
// normal ends.
double partial(const StripGrid& g, const std::vector<double>& u, std::size_t node, int c, int a) {
    const int n = g.dim;
    const auto ijk = g.unravel(node);
    auto val = [&](std::array<int, kMaxDim> q) { return u[g.index(q) * n + c]; };
    const double h = g.h(a);
    if (a < n - 1) {
        const int cells = g.npts[a] - 1;
        if (cells < 2) return 0.0;
        auto p = ijk, q = ijk;
        p[a] = (ijk[a] + 1) % cells;
        q[a] = (ijk[a] - 1 + cells) % cells;
        return (val(p) - val(q)) / (2.0 * h);
    }
    const int ny = g.npts[a];
    auto at = [&](int j) {
        auto q = ijk;
        q[a] = j;
        return val(q);
    };
    const int j = ijk[a];
    if (ny < 3) return (at(1) - at(0)) / h;
    if (j == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    if (j == ny - 1) return (3.0 * at(j) - 4.0 * at(j - 1) + at(j - 2)) / (2.0 * h);
    return (at(j + 1) - at(j - 1)) / (2.0 * h);
}

}  // namespace

FormField vorticity_from_velocity(const StripGrid& g, const std::vector<double>& u) {
    require(u.size() == g.size() * g.dim, "velocity size mismatch");
    FormField w(g, 2);
    const auto pairs = form_pairs(g.dim);
    for (std::size_t node = 0; node < g.size(); ++node) {
        int c = 0;
        for (auto [a, b] : pairs) w.at(node, c++) = partial(g, u, node, b, a) - partial(g, u, node, a, b);
    }
    return w;
}

double divergence_max(const StripGrid& g, const std::vector<double>& u) {
    double m = 0.0;
    for (std::size_t node = 0; node < g.size(); ++node) {
        const auto ijk = g.unravel(node);
        if (ijk[g.dim - 1] == 0 || ijk[g.dim - 1] == g.npts[g.dim - 1] - 1) continue;
        double d = 0.0;
        for (int a = 0; a < g.dim; ++a) d += partial(g, u, node, a, a);
        m = std::max(m, std::abs(d));
    }
    return m;
}

double wall_slip_max(const StripGrid& g, const std::vector<double>& u) {
    double m = 0.0;
    for (std::size_t node = 0; node < g.size(); ++node) {
        if (!g.on_wall(node)) continue;
        for (int a = 0; a < g.dim - 1; ++a) m = std::max(m, std::abs(u[node * g.dim + a]));
    }
    return m;
}

namespace {

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += a[i] * a[i];
    }
    if (den <= 0.0) return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return std::sqrt(num / den);
}

FormField to_full_grid(const FormField& probe, const StripGrid& full) {
    FormField out(full, probe.degree, probe.tau);
    for (std::size_t node = 0; node < full.size(); ++node) {
        const Vec x = full.point(node);
        for (int c = 0; c < out.ncomp; ++c) {
            out.at(node, c) = interpolate(probe.grid, probe.value, probe.ncomp, c, x);
            out.err(node, c) = interpolate(probe.grid, probe.stderr_, probe.ncomp, c, x);
        }
    }
    return out;
}

}  // namespace

std::vector<NsSlice> ns2d_solve(const FormSource& omega0, double nu, double T, double dtau, const StripGrid& grid,
                                const McConfig& cfg, const NsOptions& opt) {
    require(grid.dim == 2 && omega0.dim == 2 && omega0.degree == 2, "ns2d needs a 2D vorticity 2-form");
    require(nu > 0.0 && T > 0.0 && dtau > 0.0, "nu, T and dtau must be positive");
    require(opt.probe_stride >= 1 && opt.picard_sweeps >= 1, "invalid probe stride or Picard depth");
    const int s = opt.probe_stride;
    require((grid.npts[0] - 1) % s == 0 && (grid.npts[1] - 1) % s == 0, "probe stride must divide the grid cells");
    const StripGrid probe(2, {(grid.npts[0] - 1) / s + 1, (grid.npts[1] - 1) / s + 1, 1},
                          {grid.length[0], grid.length[1], 0.0});
    const std::size_t steps = step_count(T, dtau);

    std::vector<NsSlice> out;
    NsSlice first;
    first.omega = FormField(grid, 2, 0.0);
    for (std::size_t node = 0; node < grid.size(); ++node) omega0.eval(grid.point(node), &first.omega.at(node, 0));
    first.u = velocity_from_vorticity_2d(first.omega);
    first.bc = absolute_bc_residual(first.omega);
    first.wall_slip = wall_slip_max(grid, first.u);
    first.divergence = divergence_max(grid, first.u);
    out.push_back(first);

    VelocityField history(grid);
    history.add_slice(0.0, first.u);

    for (std::size_t k = 1; k <= steps; ++k) {
        const double tau = k * dtau;
        std::vector<double> u_guess = out.back().u;
        VelocityField trial = history;
        trial.add_slice(tau, u_guess);
        NsSlice slice;
        slice.tau = tau;
        for (int sweep = 0; sweep < opt.picard_sweeps; ++sweep) {
            auto field = std::make_shared<const VelocityField>(trial);
            const ConnectionField conn(
                MetricModel::flat(2), nu,
                TraceTorsion::from_velocity(
                    2, [field](double t, const Vec& x) { return field->eval(t, x); }, nu, 0.0, tau));
            FormOptions fo;
            fo.key_offset = static_cast<std::uint64_t>(k) << 32;
            const FormField est = grid_field_estimate(omega0, probe, tau, conn, cfg, fo);
            slice.omega = to_full_grid(est, grid);
            slice.discarded = est.discarded;
            slice.u = velocity_from_vorticity_2d(slice.omega);
            slice.picard_residuals.push_back(rel_l2(slice.u, u_guess));
            u_guess = slice.u;
            trial.set_last(u_guess);
        }
        if (slice.picard_residuals.back() > opt.picard_tol)
            throw ConvergenceFailure("Picard residual above tolerance at tau=" + std::to_string(tau),
                                     slice.picard_residuals);
        history.add_slice(tau, slice.u);
        slice.bc = absolute_bc_residual(slice.omega);
        slice.wall_slip = wall_slip_max(grid, slice.u);
        slice.divergence = divergence_max(grid, slice.u);
        out.push_back(std::move(slice));
    }
    return out;
}

std::array<double, 3> b_to_2form(const Vec& B) { return {B(2), -B(1), B(0)}; }

Vec two_form_to_b(const double* w) {
    Vec B(3);
    B << w[2], -w[1], w[0];
    return B;
}

std::vector<DynamoSlice> dynamo3d_solve(const std::function<Vec(const Vec&)>& B0, const VelocityFn& u, double nu_m,
                                        double T, double dtau, const StripGrid& grid, const McConfig& cfg) {
    require(grid.dim == 3, "dynamo needs a 3D grid");
    require(nu_m > 0.0 && T > 0.0 && dtau > 0.0, "nu_m, T and dtau must be positive");
    const std::size_t steps = step_count(T, dtau);
    const FormSource omega0 = FormSource::two_form(3, [B0](const Vec& x, double* out) {
        const auto w = b_to_2form(B0(x));
        std::copy(w.begin(), w.end(), out);
    });
    const TraceTorsion q = u ? TraceTorsion::from_velocity(3, u, nu_m) : TraceTorsion::zero(3);
    const ConnectionField conn(MetricModel::flat(3), nu_m, q);
    const std::vector<std::string> bnames{"B1", "B2", "B3"};

    std::vector<DynamoSlice> out;
    for (std::size_t k = 0; k <= steps; ++k) {
        DynamoSlice sl;
        sl.tau = k * dtau;
        if (k == 0) {
            sl.omega = FormField(grid, 2, 0.0);
            for (std::size_t node = 0; node < grid.size(); ++node) omega0.eval(grid.point(node), &sl.omega.at(node, 0));
        } else {
            FormOptions fo;
            fo.key_offset = static_cast<std::uint64_t>(k) << 32;
            sl.omega = grid_field_estimate(omega0, grid, sl.tau, conn, cfg, fo);
            sl.discarded = sl.omega.discarded;
        }
        sl.B = FormField(grid, 1, bnames, sl.tau);
        for (std::size_t node = 0; node < grid.size(); ++node) {
            const Vec B = two_form_to_b(&sl.omega.at(node, 0));
            for (int c = 0; c < 3; ++c) sl.B.at(node, c) = B(c);
            sl.B.err(node, 0) = sl.omega.err(node, 2);
            sl.B.err(node, 1) = sl.omega.err(node, 1);
            sl.B.err(node, 2) = sl.omega.err(node, 0);
        }
        sl.bc = absolute_bc_residual(sl.omega);
        out.push_back(std::move(sl));
    }
    return out;
}

}  // namespace frameflow
