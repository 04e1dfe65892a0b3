#include "frameflow/oracle.hpp"

#include "frameflow/fluids.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

namespace frameflow {

double images_kernel_solution(const std::function<double(double)>& f0, double nu, double tau, double x,
                              Parity parity) {
    require(tau > 0.0, "tau must be positive");
    require(nu > 0.0, "nu must be positive");
    const double var4 = 4.0 * nu * tau;
    const double norm = 1.0 / std::sqrt(M_PI * var4);
    const double sign = parity == Parity::even ? 1.0 : -1.0;
    auto integrand = [&](double y) {
        const double a = x - y, b = x + y;
        return f0(y) * norm * (std::exp(-a * a / var4) + sign * std::exp(-b * b / var4));
    };
    const double sigma = std::sqrt(2.0 * nu * tau);
    const double reach = 14.0 * sigma;
    const double lo = std::max(0.0, std::abs(x) - reach);
    const double hi = std::abs(x) + reach;
    const int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / (0.5 * sigma))));
    const double w = (hi - lo) / pieces;
    double total = 0.0;
    for (int k = 0; k < pieces; ++k)
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo + k * w, lo + (k + 1) * w,
                                                                               8, 1e-14);
    return total;
}

double fd_stable_dt(const StripGrid& g, double umax, double nu, double T) {
    double hmin = std::numeric_limits<double>::infinity();
    for (int a = 0; a < g.dim; ++a)
        if (g.npts[a] > 2 || a == g.dim - 1) hmin = std::min(hmin, g.h(a));
    double dt = 0.125 * hmin * hmin / nu;
    if (umax > 0.0) dt = std::min(dt, 0.5 * hmin / umax);
    if (T <= 0.0) return dt;
    const double n = std::ceil(T / dt - 1e-9);
    return T / n;
}

namespace {

// One explicit Euler step on all unique nodes; duplicates are refreshed.
void fd_advance(const StripGrid& g, int nc, std::vector<double>& f, const std::vector<double>& u, double nu,
                double dt, const std::vector<WallBc>& bc, const FdOptions& opt, double t) {
    const int n = g.dim;
    std::vector<double> out(f.size(), 0.0);
    std::array<double, kMaxDim> h{};
    for (int a = 0; a < n; ++a) h[a] = g.h(a);
    const int ny = g.npts[n - 1];
    for (std::size_t node = 0; node < g.size(); ++node) {
        if (g.canonical(node) != node) continue;
        const auto ijk = g.unravel(node);
        const bool wall = ijk[n - 1] == 0;
        Eigen::MatrixXd R;
        if (opt.reaction) R = opt.reaction(t, g.point(node));
        for (int c = 0; c < nc; ++c) {
            if (wall && bc[c] == WallBc::dirichlet) {
                out[node * nc + c] = 0.0;
                continue;
            }
            const double f0 = f[node * nc + c];
            double lap = 0.0, adv = 0.0;
            for (int a = 0; a < n; ++a) {
                auto nb = ijk, pb = ijk;
                if (a < n - 1) {
                    const int cells = g.npts[a] - 1;
                    nb[a] = (ijk[a] - 1 + cells) % cells;
                    pb[a] = (ijk[a] + 1) % cells;
                } else {
                    nb[a] = ijk[a] == 0 ? 1 : ijk[a] - 1;             // ghost mirror at the wall
                    pb[a] = ijk[a] == ny - 1 ? ny - 2 : ijk[a] + 1;   // Neumann top
                }
                const double fm = f[g.index(nb) * nc + c];
                const double fp = f[g.index(pb) * nc + c];
                lap += (fp - 2.0 * f0 + fm) / (h[a] * h[a]);
                const double ua = u[node * n + a];
                if (ua == 0.0) continue;
                if (std::abs(ua) * h[a] <= 2.0 * nu) {
                    adv += ua * (fp - fm) / (2.0 * h[a]);
                } else {
                    adv += ua > 0.0 ? ua * (f0 - fm) / h[a] : ua * (fp - f0) / h[a];
                }
            }
            double react = 0.0;
            if (opt.reaction)
                for (int d = 0; d < nc; ++d) react += R(c, d) * f[node * nc + d];
            out[node * nc + c] = f0 + dt * (nu * lap - adv + react);
        }
    }
    for (std::size_t node = 0; node < g.size(); ++node) {
        const std::size_t src = g.canonical(node);
        if (src != node)
            for (int c = 0; c < nc; ++c) out[node * nc + c] = out[src * nc + c];
    }
    f.swap(out);
}

double max_speed(const std::vector<double>& u) {
    double m = 0.0;
    for (double v : u) m = std::max(m, std::abs(v));
    return m;
}

void check_cfl(const StripGrid& g, const std::vector<double>& u, double nu, double dt) {
    const int n = g.dim;
    for (std::size_t node = 0; node < g.size(); ++node)
        for (int a = 0; a < n; ++a)
            if (std::abs(u[node * n + a]) * dt / g.h(a) > 0.5 + 1e-9)
                throw NumericError("advection CFL limit exceeded");
    for (int a = 0; a < n; ++a)
        if ((g.npts[a] > 2 || a == n - 1) && 2.0 * nu * dt / (g.h(a) * g.h(a)) > 0.25 + 1e-9)
            throw NumericError("diffusion stability limit exceeded");
}

std::vector<double> sample_velocity(const StripGrid& g, const VelocityFn& u, double t) {
    const int n = g.dim;
    std::vector<double> out(g.size() * n, 0.0);
    if (!u) return out;
    for (std::size_t node = 0; node < g.size(); ++node) {
        const Vec v = u(t, g.point(node));
        for (int a = 0; a < n; ++a) out[node * n + a] = v(a);
    }
    return out;
}

}  // namespace

FormField fd_advdiff(const FormField& f0, const VelocityFn& u, double nu, double T, const std::vector<WallBc>& bc,
                     const FdOptions& opt) {
    require(nu >= 0.0 && T >= 0.0, "nu and T must be non-negative");
    require(static_cast<int>(bc.size()) == f0.ncomp, "one boundary condition per component");
    const StripGrid& g = f0.grid;
    FormField out = f0;
    out.tau = f0.tau + T;
    if (T == 0.0) return out;
    std::vector<double> u0 = sample_velocity(g, u, 0.0);
    double dt;
    if (nu > 0.0) {
        dt = fd_stable_dt(g, max_speed(u0), nu, T);
    } else {
        const double umax = max_speed(u0);
        require(umax > 0.0, "pure transport needs a velocity");
        double hmin = std::numeric_limits<double>::infinity();
        for (int a = 0; a < g.dim; ++a) hmin = std::min(hmin, g.h(a));
        dt = T / std::ceil(T / (0.5 * hmin / umax) - 1e-9);
    }
    const double steps = std::round(T / dt);
    if (steps > opt.max_steps) throw NumericError("time step floor reached");
    const auto m = static_cast<std::size_t>(steps);
    for (std::size_t k = 0; k < m; ++k) {
        const double t = k * dt;
        const std::vector<double> uk = k == 0 ? u0 : sample_velocity(g, u, t);
        check_cfl(g, uk, nu, dt);
        fd_advance(g, out.ncomp, out.value, uk, nu, dt, bc, opt, t);
    }
    std::fill(out.stderr_.begin(), out.stderr_.end(), 0.0);
    return out;
}

std::vector<FormField> fd_ns2d_vorticity(const FormField& omega0, double nu, const std::vector<double>& times) {
    require(omega0.grid.dim == 2 && omega0.degree == 2, "2D vorticity field required");
    require(nu > 0.0, "nu must be positive");
    const StripGrid& g = omega0.grid;
    FormField w = omega0;
    const std::vector<WallBc> bc{WallBc::dirichlet};
    std::vector<double> u = velocity_from_vorticity_2d(w);
    const double dt0 = fd_stable_dt(g, max_speed(u), nu, 0.0);
    std::vector<FormField> out;
    double t = omega0.tau;
    for (double target : times) {
        require(target >= t, "output times must be increasing");
        const double span = target - t;
        const auto m = static_cast<std::size_t>(std::ceil(span / dt0 - 1e-9));
        const double dt = m > 0 ? span / m : 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            u = velocity_from_vorticity_2d(w);
            check_cfl(g, u, nu, dt);
            fd_advance(g, 1, w.value, u, nu, dt, bc, FdOptions{}, t + k * dt);
        }
        t = target;
        w.tau = t;
        out.push_back(w);
    }
    return out;
}

}  // namespace frameflow
