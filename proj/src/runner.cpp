#include "frameflow/config.hpp"
#include "frameflow/oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#ifndef FRAMEFLOW_GIT_DESCRIBE
#define FRAMEFLOW_GIT_DESCRIBE "unknown"
#endif

namespace frameflow {

using nlohmann::json;
namespace fs = std::filesystem;

const char* git_describe() { return FRAMEFLOW_GIT_DESCRIBE; }

namespace {

json bc_json(const BcResidual& bc) {
    return json{{"dirichlet", bc.dirichlet}, {"neumann", bc.neumann}, {"normal_derivative", bc.normal_derivative}};
}

std::string out_path(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.output_dir) / name).string(); }

ConnectionField make_connection(const RunConfig& cfg, double nu) {
    const VelocityFn u = make_velocity(cfg);
    const int n = cfg.grid.dim;
    TraceTorsion q = u ? TraceTorsion::from_velocity(n, u, nu) : TraceTorsion::zero(n);
    return ConnectionField(make_metric(cfg), nu, q);
}

std::vector<double> slice_times(const RunConfig& cfg) {
    const std::size_t K = step_count(cfg.T, cfg.dtau_outer);
    std::vector<double> t(K + 1);
    for (std::size_t k = 0; k <= K; ++k) t[k] = static_cast<double>(k) * cfg.dtau_outer;
    return t;
}

json run_heat(const RunConfig& cfg, int degree, const std::string& stem) {
    const StripGrid grid = cfg.grid.build();
    const FormSource src = make_initial_form(cfg, degree);
    const ConnectionField conn = make_connection(cfg, cfg.nu);
    json slices = json::array();
    for (double tau : slice_times(cfg)) {
        const FormField f = grid_field_estimate(src, grid, tau, conn, cfg.mc);
        const std::string name = slice_filename(stem, tau);
        write_field_csv(out_path(cfg, name), f);
        json s{{"tau", tau}, {"file", name}, {"discarded", f.discarded}};
        if (degree > 0) s["bc"] = bc_json(absolute_bc_residual(f));
        slices.push_back(s);
    }
    return slices;
}

void write_velocity_csv(const std::string& path, const StripGrid& g, const std::vector<double>& u, double tau) {
    FormField f(g, 1, {"u1", "u2"}, tau);
    f.value = u;
    write_field_csv(path, f, false);
}

json run_ns2d(const RunConfig& cfg) {
    const StripGrid grid = cfg.grid.build();
    require(grid.dim == 2, "ns2d needs a 2D grid");
    const FormSource w0 = make_initial_form(cfg, 2);
    const NsOptions opt{cfg.probe_stride, cfg.picard_sweeps, cfg.picard_tol};
    const auto out = ns2d_solve(w0, cfg.nu, cfg.T, cfg.dtau_outer, grid, cfg.mc, opt);
    json slices = json::array();
    for (const NsSlice& s : out) {
        const std::string name = slice_filename("ns2d_vorticity", s.tau);
        const std::string vname = slice_filename("ns2d_velocity", s.tau);
        write_field_csv(out_path(cfg, name), s.omega);
        write_velocity_csv(out_path(cfg, vname), grid, s.u, s.tau);
        slices.push_back(json{{"tau", s.tau},
                              {"file", name},
                              {"velocity_file", vname},
                              {"discarded", s.discarded},
                              {"picard_residuals", s.picard_residuals},
                              {"bc", bc_json(s.bc)},
                              {"wall_slip", s.wall_slip},
                              {"divergence", s.divergence}});
    }
    return slices;
}

json run_dynamo(const RunConfig& cfg) {
    const StripGrid grid = cfg.grid.build();
    const auto B0 = make_initial_b(cfg);
    const auto out = dynamo3d_solve(B0, make_velocity(cfg), cfg.nu_m, cfg.T, cfg.dtau_outer, grid, cfg.mc);
    json slices = json::array();
    for (const DynamoSlice& s : out) {
        const std::string name = slice_filename("dynamo3d_B", s.tau);
        write_field_csv(out_path(cfg, name), s.B);
        slices.push_back(json{{"tau", s.tau}, {"file", name}, {"discarded", s.discarded}, {"bc", bc_json(s.bc)}});
    }
    return slices;
}

json run_localtime(const RunConfig& cfg) {
    const int n = cfg.grid.dim;
    Vec x0 = Vec::Zero(n);
    if (!cfg.start.empty()) {
        require(static_cast<int>(cfg.start.size()) == n, "start needs one coordinate per axis");
        for (int a = 0; a < n; ++a) x0(a) = cfg.start[a];
    }
    const ConnectionField conn(make_metric(cfg), cfg.nu, TraceTorsion::zero(n));
    const LocalTimeResult r = localtime_estimate(x0, cfg.T, conn, cfg.mc);
    json j{{"tau", cfg.T}, {"mean_phi", r.phi.value[0]}, {"stderr", r.phi.stderr_[0]}, {"hit_fraction", r.hit.value[0]}};
    // Closed form only for a wall start: E[phi] = E|sigma B_tau| with sigma^2 = 2 nu.
    if (x0(n - 1) == 0.0 && cfg.metric.kind == "flat") {
        const double expected = std::sqrt(2.0 * cfg.nu) * std::sqrt(2.0 * cfg.T / M_PI);
        const double z = (r.phi.value[0] - expected) / r.phi.stderr_[0];
        j["expected"] = expected;
        j["z"] = z;
        std::printf("E[phi(%g)] = %.6f +- %.6f, expected %.6f, z = %.3f\n", cfg.T, r.phi.value[0], r.phi.stderr_[0],
                    expected, z);
    } else {
        std::printf("E[phi(%g)] = %.6f +- %.6f\n", cfg.T, r.phi.value[0], r.phi.stderr_[0]);
    }
    std::ofstream out(out_path(cfg, "localtime.csv"));
    char buf[256];
    std::snprintf(buf, sizeof buf, "tau,phi,phi_stderr,hit,hit_stderr\n%.17g,%.17g,%.17g,%.17g,%.17g\n", cfg.T,
                  r.phi.value[0], r.phi.stderr_[0], r.hit.value[0], r.hit.stderr_[0]);
    out << buf;
    return j;
}

// Small oracle cross-checks: Monte Carlo against the image-kernel solution on
// both wall conditions, and the finite-difference solver against the same kernel.
json run_validate(const RunConfig& cfg, bool& ok) {
    McConfig mc = cfg.mc;
    mc.n_paths = std::max<std::size_t>(mc.n_paths, 4000);
    const double nu = 0.5, tau = 0.25, c = 0.6, w = 0.2;
    auto f0 = [=](double y) { return std::exp(-0.5 * (y - c) * (y - c) / (w * w)); };
    const ConnectionField conn(MetricModel::flat(2), nu, TraceTorsion::zero(2));
    const auto src = FormSource::one_form(2, [&](const Vec& x) {
        Vec v(2);
        v << f0(x(1)), f0(x(1));
        return v;
    });
    json checks = json::array();
    ok = true;
    std::uint64_t key = 0;
    for (double y : {0.1, 0.4, 0.8}) {
        Vec x(2);
        x << 0.3, y;
        const EstimatorResult r = heat_form_estimate(src, x, tau, conn, mc, {}, key++);
        const double neu = images_kernel_solution(f0, nu, tau, y, Parity::even);
        const double dir = images_kernel_solution(f0, nu, tau, y, Parity::odd);
        const double zn = (r.value[0] - neu) / std::max(r.stderr_[0], 1e-12);
        const double zd = (r.value[1] - dir) / std::max(r.stderr_[1], 1e-12);
        const bool pass = std::abs(zn) < 4.0 && std::abs(zd) < 4.0;
        ok = ok && pass;
        checks.push_back({{"check", "mc_vs_images"}, {"y", y}, {"z_neumann", zn}, {"z_dirichlet", zd}, {"pass", pass}});
    }
    {
        const StripGrid g(2, {5, 81, 1}, {1.0, 4.0, 0.0});
        FormField f(g, 1, 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double y = g.point(i)(1);
            f.at(i, 0) = f0(y);
            f.at(i, 1) = f0(y);
        }
        const FormField h = fd_advdiff(f, {}, nu, tau, {WallBc::neumann, WallBc::dirichlet});
        double err = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double y = g.point(i)(1);
            if (y > 2.0) continue;
            err = std::max(err, std::abs(h.at(i, 0) - images_kernel_solution(f0, nu, tau, y, Parity::even)));
            err = std::max(err, std::abs(h.at(i, 1) - images_kernel_solution(f0, nu, tau, y, Parity::odd)));
        }
        const bool pass = err < 5e-3;
        ok = ok && pass;
        checks.push_back({{"check", "fd_vs_images"}, {"max_abs_error", err}, {"pass", pass}});
    }
    for (const auto& c : checks) std::printf("%s\n", c.dump().c_str());
    std::printf("validate: %s\n", ok ? "PASS" : "FAIL");
    return checks;
}

const char* kSubcommands[] = {"heat-scalar", "heat-form", "ns2d", "dynamo3d", "localtime-check", "validate"};

}  // namespace

int run(const RunConfig& cfg) {
    bool known = false;
    for (const char* s : kSubcommands) known = known || cfg.subcommand == s;
    if (!known) {
        std::fprintf(stderr, "unknown subcommand '%s'\n", cfg.subcommand.c_str());
        return kUsage;
    }
    try {
        cfg.validate();
    } catch (const Error& e) {
        std::fprintf(stderr, "invalid config: %s\n", e.what());
        return kUsage;
    }
    fs::create_directories(cfg.output_dir);
    const auto t0 = std::chrono::steady_clock::now();
    json meta{{"config", cfg}, {"seed", cfg.mc.seed}, {"git_describe", git_describe()}};
    int code = kOk;
    try {
        if (cfg.subcommand == "heat-scalar") {
            meta["slices"] = run_heat(cfg, 0, "heat_scalar");
        } else if (cfg.subcommand == "heat-form") {
            meta["slices"] = run_heat(cfg, cfg.degree, "heat_form");
        } else if (cfg.subcommand == "ns2d") {
            meta["slices"] = run_ns2d(cfg);
        } else if (cfg.subcommand == "dynamo3d") {
            meta["slices"] = run_dynamo(cfg);
        } else if (cfg.subcommand == "localtime-check") {
            meta["localtime"] = run_localtime(cfg);
        } else {
            bool ok = false;
            meta["checks"] = run_validate(cfg, ok);
            if (!ok) code = kNumericFailure;
        }
        meta["status"] = code == kOk ? "ok" : "failed";
    } catch (const ContractViolation& e) {
        meta["status"] = "usage_error";
        meta["error"] = e.what();
        code = kUsage;
    } catch (const ConvergenceFailure& e) {
        meta["status"] = "numeric_failure";
        meta["error"] = e.what();
        meta["picard_history"] = e.history;
        code = kNumericFailure;
    } catch (const std::exception& e) {
        meta["status"] = "numeric_failure";
        meta["error"] = e.what();
        code = kNumericFailure;
    }
    meta["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream(out_path(cfg, "meta.json")) << meta.dump(2) << '\n';
    if (code != kOk && meta.contains("error"))
        std::fprintf(stderr, "%s: %s\n", cfg.subcommand.c_str(), meta["error"].get<std::string>().c_str());
    return code;
}

}  // namespace frameflow
