#include "frameflow/estimator.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace frameflow {

void McConfig::validate() const {
    require(n_paths >= 2, "n_paths must be at least 2");
    require(dt > 0.0, "dt must be positive");
    require(strip_height > 0.0, "strip height must be positive");
    require(workers >= 1, "workers must be at least 1");
    require(!antithetic || n_paths % 2 == 0, "antithetic sampling needs an even path count");
}

Mat FormSource::matrix(const Vec& x) const {
    std::array<double, 3> c{};
    eval(x, c.data());
    switch (degree) {
        case 0: {
            Mat m(1, 1);
            m(0, 0) = c[0];
            return m;
        }
        case 1: {
            Mat m(dim, 1);
            for (int a = 0; a < dim; ++a) m(a, 0) = c[a];
            return m;
        }
        default:
            return pack_2form(dim, c.data());
    }
}

FormSource FormSource::scalar(int dim, std::function<double(const Vec&)> f) {
    return {dim, 0, [f = std::move(f)](const Vec& x, double* out) { out[0] = f(x); }};
}

FormSource FormSource::one_form(int dim, std::function<Vec(const Vec&)> f) {
    return {dim, 1, [f = std::move(f), dim](const Vec& x, double* out) {
                const Vec v = f(x);
                for (int a = 0; a < dim; ++a) out[a] = v(a);
            }};
}

FormSource FormSource::two_form(int dim, std::function<void(const Vec&, double*)> f) {
    return {dim, 2, std::move(f)};
}

FormSource FormSource::from_field(const FormField& f) {
    return {f.grid.dim, f.degree, [f](const Vec& x, double* out) {
                for (int c = 0; c < f.ncomp; ++c) out[c] = interpolate(f.grid, f.value, f.ncomp, c, x);
            }};
}

namespace {

// Pairwise sum of v[lo, hi) with a fixed tree.
double pairwise_sum(const double* v, std::size_t lo, std::size_t hi, std::size_t stride) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i * stride];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid, stride) + pairwise_sum(v, mid, hi, stride);
}

EstimatorResult reduce_flat(const std::vector<double>& samples, std::size_t count, int ncomp) {
    require(count >= 2, "at least two samples are needed");
    EstimatorResult r;
    r.value.assign(ncomp, 0.0);
    r.stderr_.assign(ncomp, 0.0);
    r.n_effective = count;
    std::vector<double> dev(count);
    for (int c = 0; c < ncomp; ++c) {
        const double mean = pairwise_sum(samples.data() + c, 0, count, ncomp) / static_cast<double>(count);
        for (std::size_t i = 0; i < count; ++i) {
            const double d = samples[i * ncomp + c] - mean;
            dev[i] = d * d;
        }
        const double var = pairwise_sum(dev.data(), 0, count, 1) / static_cast<double>(count - 1);
        r.value[c] = mean;
        r.stderr_[c] = std::sqrt(var / static_cast<double>(count));
    }
    return r;
}

struct PathJob {
    const FormSource* src;
    const ConnectionField* conn;
    const McConfig* cfg;
    const PackProvider* packs;
    CouplingScale scale;
    double tau;
    std::size_t steps;
    StepOptions sopt;
};

// One path's contribution; returns false if the path had to be discarded.
bool run_path(const PathJob& job, const FramePoint& r0, std::uint64_t seed, bool negate, double* out) {
    const ConnectionField& conn = *job.conn;
    const int n = conn.dim();
    const int p = job.src->degree;
    const int nc = job.src->ncomp();
    try {
        PathRng rng(seed, negate);
        PathState st(r0);
        MofState mof;
        if (p > 0) mof = mof_init(r0);
        const double dt = job.cfg->dt;
        const double sq = std::sqrt(dt);
        Vec dB(n);
        bool dead = false;
        for (std::size_t i = 0; i < job.steps; ++i) {
            for (int k = 0; k < n; ++k) dB(k) = sq * rng.normal();
            const double s0 = job.tau - st.t;
            const double s1 = std::max(job.tau - st.t - dt, 0.0);
            const StepRecord rec = heun_step(st, conn, s0, s1, dt, dB, &rng, job.sopt);
            if (p == 0) continue;
            if (*job.packs) {
                const CurvaturePack pk = (*job.packs)(rec.x_post);
                mof = mof_step(mof, rec, st.frame.theta, &pk, job.scale, dt);
            } else {
                mof = mof_step(mof, rec, st.frame.theta, nullptr, job.scale, dt);
            }
            // A rank-one functional annihilates every 2-form in two dimensions.
            if (p == 2 && n == 2 && rec.killed()) {
                dead = true;
                break;
            }
        }
        if (dead) {
            for (int c = 0; c < nc; ++c) out[c] = 0.0;
            return true;
        }
        const Mat w = job.src->matrix(st.frame.x);
        const Mat& th0 = r0.theta;
        const Mat& e = st.frame.e;
        if (p == 0) {
            out[0] = w(0, 0);
        } else if (p == 1) {
            const Mat v = th0.transpose() * mof.M * e.transpose() * w;
            for (int a = 0; a < n; ++a) out[a] = v(a, 0);
        } else {
            const Mat lifted = e.transpose() * w * e;
            const Mat phi = th0.transpose() * mof.M * lifted * mof.M.transpose() * th0;
            unpack_2form(phi, out);
        }
        for (int c = 0; c < nc; ++c)
            if (!std::isfinite(out[c])) return false;
        return true;
    } catch (const PathDiscarded&) {
        return false;
    }
}

constexpr std::size_t kChunk = 64;

}  // namespace

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
    const int w = static_cast<int>(std::min<std::size_t>(std::max(1, workers), std::max<std::size_t>(n, 1)));
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!err) err = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (int t = 0; t < w; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

EstimatorResult reduce_statistics(const std::vector<std::vector<double>>& samples) {
    if (samples.size() < 2) throw ContractViolation("at least two samples are needed");
    const int nc = static_cast<int>(samples.front().size());
    std::vector<double> flat;
    flat.reserve(samples.size() * nc);
    for (const auto& s : samples) {
        require(static_cast<int>(s.size()) == nc, "samples differ in size");
        flat.insert(flat.end(), s.begin(), s.end());
    }
    return reduce_flat(flat, samples.size(), nc);
}

std::vector<EstimatorResult> estimate_points(const FormSource& src, const std::vector<Vec>& points,
                                             const std::vector<std::uint64_t>& keys, double tau,
                                             const ConnectionField& conn, const McConfig& cfg,
                                             const FormOptions& opt) {
    cfg.validate();
    require(points.size() == keys.size(), "one key per point is required");
    require(src.dim == conn.dim(), "form and connection dimensions differ");
    require(tau >= 0.0, "tau must be non-negative");
    const int nc = src.ncomp();
    const std::size_t npts = points.size();
    std::vector<EstimatorResult> results(npts);

    std::vector<FramePoint> starts;
    starts.reserve(npts);
    for (const Vec& x : points) {
        require(x.size() == conn.dim() && x(conn.dim() - 1) >= 0.0, "query point outside the half-space");
        starts.push_back(standard_frame(conn.metric(), conn.nu(), x));
    }

    const std::size_t m = step_count(tau, cfg.dt);
    if (m == 0) {
        for (std::size_t k = 0; k < npts; ++k) {
            results[k].value.assign(nc, 0.0);
            src.eval(points[k], results[k].value.data());
            results[k].stderr_.assign(nc, 0.0);
            results[k].n_effective = cfg.n_paths;
        }
        return results;
    }

    PackProvider packs = opt.packs;
    if (!packs && !conn.metric().is_flat()) {
        const MetricModel metric = conn.metric();
        packs = [metric](const Vec& x) { return curvature(metric, x); };
    }
    PathJob job{&src, &conn, &cfg, &packs, opt.scale.value_or(CouplingScale::navier_stokes(conn.nu())), tau, m,
                StepOptions{cfg.strip_height, cfg.bridge}};

    const std::size_t np = cfg.n_paths;
    const std::size_t chunks = (np + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> samples(npts, std::vector<double>(np * nc, 0.0));
    std::vector<std::vector<char>> valid(npts, std::vector<char>(np, 0));

    parallel_for(npts * chunks, cfg.workers, [&](std::size_t item) {
        const std::size_t k = item / chunks;
        const std::size_t c = item % chunks;
        const std::uint64_t key = keys[k] + opt.key_offset;
        for (std::size_t i = c * kChunk; i < std::min(np, (c + 1) * kChunk); ++i) {
            const std::uint64_t stream = cfg.antithetic ? i / 2 : i;
            const bool negate = cfg.antithetic && (i % 2 == 1);
            const std::uint64_t seed = derive_seed(cfg.seed, {key, stream});
            valid[k][i] = run_path(job, starts[k], seed, negate, samples[k].data() + i * nc) ? 1 : 0;
        }
    });

    for (std::size_t k = 0; k < npts; ++k) {
        std::vector<double> kept;
        kept.reserve(np * nc);
        std::size_t count = 0, dropped = 0;
        if (cfg.antithetic) {
            for (std::size_t i = 0; i + 1 < np; i += 2) {
                if (!valid[k][i] || !valid[k][i + 1]) {
                    dropped += 2;
                    continue;
                }
                for (int c = 0; c < nc; ++c)
                    kept.push_back(0.5 * (samples[k][i * nc + c] + samples[k][(i + 1) * nc + c]));
                ++count;
            }
        } else {
            for (std::size_t i = 0; i < np; ++i) {
                if (!valid[k][i]) {
                    ++dropped;
                    continue;
                }
                for (int c = 0; c < nc; ++c) kept.push_back(samples[k][i * nc + c]);
                ++count;
            }
        }
        if (static_cast<double>(dropped) > cfg.max_discard_fraction * static_cast<double>(np) || count < 2)
            throw EstimationFailed("too many discarded paths: " + std::to_string(dropped) + " of " +
                                   std::to_string(np));
        results[k] = reduce_flat(kept, count, nc);
        results[k].n_effective = np - dropped;
        results[k].n_discarded = dropped;
    }
    return results;
}

EstimatorResult heat_scalar_estimate(const std::function<double(const Vec&)>& f, const Vec& x0, double tau,
                                     const ConnectionField& conn, const McConfig& cfg, std::uint64_t key) {
    return estimate_points(FormSource::scalar(conn.dim(), f), {x0}, {key}, tau, conn, cfg).front();
}

EstimatorResult heat_form_estimate(const FormSource& omega, const Vec& x0, double tau, const ConnectionField& conn,
                                   const McConfig& cfg, const FormOptions& opt, std::uint64_t key) {
    return estimate_points(omega, {x0}, {key}, tau, conn, cfg, opt).front();
}

FormField grid_field_estimate(const FormSource& omega, const StripGrid& grid, double tau,
                              const ConnectionField& conn, const McConfig& cfg, const FormOptions& opt) {
    require(grid.dim == omega.dim, "grid and form dimensions differ");
    std::vector<Vec> pts;
    std::vector<std::uint64_t> keys;
    std::vector<std::size_t> nodes;
    for (std::size_t node = 0; node < grid.size(); ++node) {
        if (grid.canonical(node) != node) continue;
        pts.push_back(grid.point(node));
        keys.push_back(node);
        nodes.push_back(node);
    }
    const auto res = estimate_points(omega, pts, keys, tau, conn, cfg, opt);
    FormField out(grid, omega.degree, tau);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        out.discarded += res[k].n_discarded;
        for (int c = 0; c < out.ncomp; ++c) {
            out.at(nodes[k], c) = res[k].value[c];
            out.err(nodes[k], c) = res[k].stderr_[c];
        }
    }
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const std::size_t src = grid.canonical(node);
        if (src == node) continue;
        for (int c = 0; c < out.ncomp; ++c) {
            out.at(node, c) = out.at(src, c);
            out.err(node, c) = out.err(src, c);
        }
    }
    return out;
}

LocalTimeResult localtime_estimate(const Vec& x0, double tau, const ConnectionField& conn, const McConfig& cfg,
                                   std::uint64_t key) {
    cfg.validate();
    const std::size_t m = step_count(tau, cfg.dt);
    const std::size_t np = cfg.n_paths;
    const FramePoint r0 = standard_frame(conn.metric(), conn.nu(), x0);
    const StepOptions sopt{cfg.strip_height, cfg.bridge};
    std::vector<double> phi(np), hit(np);
    const std::size_t chunks = (np + kChunk - 1) / kChunk;
    parallel_for(chunks, cfg.workers, [&](std::size_t c) {
        for (std::size_t i = c * kChunk; i < std::min(np, (c + 1) * kChunk); ++i) {
            const std::uint64_t stream = cfg.antithetic ? i / 2 : i;
            PathRng rng(derive_seed(cfg.seed, {key, stream}), cfg.antithetic && (i % 2 == 1));
            PathState st(r0);
            bool touched = st.on_boundary;
            for (std::size_t s = 0; s < m; ++s) touched = step_forward(st, conn, cfg.dt, rng, sopt).killed() || touched;
            phi[i] = st.phi;
            hit[i] = touched ? 1.0 : 0.0;
        }
    });
    auto pairs = [&](const std::vector<double>& v) {
        if (!cfg.antithetic) return reduce_flat(v, np, 1);
        std::vector<double> avg(np / 2);
        for (std::size_t i = 0; i < np / 2; ++i) avg[i] = 0.5 * (v[2 * i] + v[2 * i + 1]);
        EstimatorResult r = reduce_flat(avg, avg.size(), 1);
        r.n_effective = np;
        return r;
    };
    return {pairs(phi), pairs(hit)};
}

}  // namespace frameflow
