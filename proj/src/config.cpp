#include "frameflow/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace frameflow {

using nlohmann::json;

StripGrid GridSpec::build() const {
    require(dim == 2 || dim == 3, "grid.dim must be 2 or 3");
    require(static_cast<int>(n.size()) == dim && static_cast<int>(length.size()) == dim,
            "grid.n and grid.length need one entry per axis");
    std::array<int, kMaxDim> pts{1, 1, 1};
    std::array<double, kMaxDim> len{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
        pts[a] = n[a];
        len[a] = length[a];
    }
    return StripGrid(dim, pts, len);
}

namespace {

template <class T>
void get_opt(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

void to_json(json& j, const RunConfig& c) {
    j = json{{"subcommand", c.subcommand},
             {"nu", c.nu},
             {"nu_m", c.nu_m},
             {"T", c.T},
             {"dtau_outer", c.dtau_outer},
             {"degree", c.degree},
             {"grid", {{"dim", c.grid.dim}, {"n", c.grid.n}, {"length", c.grid.length}}},
             {"mc",
              {{"n_paths", c.mc.n_paths},
               {"dt", c.mc.dt},
               {"seed", c.mc.seed},
               {"strip_height", std::isfinite(c.mc.strip_height) ? json(c.mc.strip_height) : json(nullptr)},
               {"antithetic", c.mc.antithetic},
               {"bridge", c.mc.bridge},
               {"max_discard_fraction", c.mc.max_discard_fraction}}},
             {"metric", {{"kind", c.metric.kind}, {"lambda", c.metric.lambda}}},
             {"initial",
              {{"kind", c.initial.kind},
               {"amplitude", c.initial.amplitude},
               {"center", c.initial.center},
               {"width", c.initial.width},
               {"mode", c.initial.mode},
               {"centers", c.initial.centers},
               {"components", c.initial.components},
               {"b", c.initial.b},
               {"file", c.initial.file}}},
             {"velocity", {{"kind", c.velocity.kind}, {"value", c.velocity.value}, {"shear", c.velocity.shear}}},
             {"probe_stride", c.probe_stride},
             {"picard_sweeps", c.picard_sweeps},
             {"picard_tol", c.picard_tol},
             {"start", c.start},
             {"output_dir", c.output_dir}};
}

void from_json(const json& j, RunConfig& c) {
    require(j.is_object(), "config must be a JSON object");
    get_opt(j, "subcommand", c.subcommand);
    get_opt(j, "nu", c.nu);
    get_opt(j, "nu_m", c.nu_m);
    get_opt(j, "T", c.T);
    get_opt(j, "dtau_outer", c.dtau_outer);
    get_opt(j, "degree", c.degree);
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        get_opt(g, "dim", c.grid.dim);
        get_opt(g, "n", c.grid.n);
        get_opt(g, "length", c.grid.length);
    }
    if (j.contains("mc")) {
        const json& m = j.at("mc");
        get_opt(m, "n_paths", c.mc.n_paths);
        get_opt(m, "dt", c.mc.dt);
        get_opt(m, "seed", c.mc.seed);
        get_opt(m, "strip_height", c.mc.strip_height);
        get_opt(m, "antithetic", c.mc.antithetic);
        get_opt(m, "bridge", c.mc.bridge);
        get_opt(m, "max_discard_fraction", c.mc.max_discard_fraction);
    }
    if (j.contains("metric")) {
        get_opt(j.at("metric"), "kind", c.metric.kind);
        get_opt(j.at("metric"), "lambda", c.metric.lambda);
    }
    if (j.contains("initial")) {
        const json& i = j.at("initial");
        get_opt(i, "kind", c.initial.kind);
        get_opt(i, "amplitude", c.initial.amplitude);
        get_opt(i, "center", c.initial.center);
        get_opt(i, "width", c.initial.width);
        get_opt(i, "mode", c.initial.mode);
        get_opt(i, "centers", c.initial.centers);
        get_opt(i, "components", c.initial.components);
        get_opt(i, "b", c.initial.b);
        get_opt(i, "file", c.initial.file);
    }
    if (j.contains("velocity")) {
        const json& v = j.at("velocity");
        get_opt(v, "kind", c.velocity.kind);
        get_opt(v, "value", c.velocity.value);
        get_opt(v, "shear", c.velocity.shear);
    }
    get_opt(j, "probe_stride", c.probe_stride);
    get_opt(j, "picard_sweeps", c.picard_sweeps);
    get_opt(j, "picard_tol", c.picard_tol);
    get_opt(j, "start", c.start);
    get_opt(j, "output_dir", c.output_dir);
}

void RunConfig::validate() const {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ContractViolation(std::string(what) + " must be positive");
    };
    positive(nu, "nu");
    positive(nu_m, "nu_m");
    positive(T, "T");
    positive(dtau_outer, "dtau_outer");
    positive(mc.dt, "mc.dt");
    positive(picard_tol, "picard_tol");
    if (!(mc.strip_height > 0.0)) throw ContractViolation("mc.strip_height must be positive");
    for (double l : grid.length) positive(l, "grid.length");
    mc.validate();
    grid.build();
    require(degree >= 0 && degree <= 2, "degree must be 0, 1 or 2");
    require(probe_stride >= 1 && picard_sweeps >= 1, "probe_stride and picard_sweeps must be at least 1");
    require(metric.kind == "flat" || metric.kind == "conformal", "metric.kind must be flat or conformal");
    require(velocity.kind == "zero" || velocity.kind == "constant" || velocity.kind == "shear",
            "velocity.kind must be zero, constant or shear");
    require(velocity.kind != "constant" || static_cast<int>(velocity.value.size()) == grid.dim,
            "constant velocity needs one value per axis");
    step_count(T, dtau_outer);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractViolation("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ContractViolation(std::string("config parse error: ") + e.what());
    }
    try {
        return j.get<RunConfig>();
    } catch (const json::exception& e) {
        throw ContractViolation(std::string("config field error: ") + e.what());
    }
}

namespace {

double gauss(double y, double w) { return std::exp(-0.5 * y * y / (w * w)); }

}  // namespace

FormSource make_initial_form(const RunConfig& cfg, int degree) {
    const InitialSpec& s = cfg.initial;
    const int dim = cfg.grid.dim;
    const int nc = form_components(dim, degree);
    std::vector<double> weights = s.components;
    if (weights.empty()) weights.assign(nc, 1.0);
    require(static_cast<int>(weights.size()) == nc, "initial.components needs one weight per form component");
    const double A = s.amplitude, c = s.center, w = s.width;
    const double Lx = cfg.grid.length[0];
    std::function<double(const Vec&)> profile;
    if (s.kind == "zero") {
        profile = [](const Vec&) { return 0.0; };
    } else if (s.kind == "constant") {
        profile = [A](const Vec&) { return A; };
    } else if (s.kind == "gaussian_normal") {
        profile = [=](const Vec& x) { return A * gauss(x(dim - 1) - c, w); };
    } else if (s.kind == "odd_gaussian_normal") {
        profile = [=](const Vec& x) { return A * (gauss(x(dim - 1) - c, w) - gauss(x(dim - 1) + c, w)); };
    } else if (s.kind == "cos_x_odd_gaussian") {
        const double k = 2.0 * M_PI * s.mode / Lx;
        profile = [=](const Vec& x) {
            return A * std::cos(k * x(0)) * (gauss(x(dim - 1) - c, w) - gauss(x(dim - 1) + c, w));
        };
    } else if (s.kind == "vortex_pair") {
        require(s.centers.size() == 2 && s.centers[0].size() == 2 && s.centers[1].size() == 2,
                "vortex_pair needs two 2D centres");
        const auto cs = s.centers;
        profile = [=](const Vec& x) {
            double v = 0.0;
            for (int k = 0; k < 2; ++k) {
                const double sign = k == 0 ? 1.0 : -1.0;
                double dx = x(0) - cs[k][0];
                dx -= Lx * std::round(dx / Lx);
                const double r2 = dx * dx + (x(1) - cs[k][1]) * (x(1) - cs[k][1]);
                const double i2 = dx * dx + (x(1) + cs[k][1]) * (x(1) + cs[k][1]);
                v += sign * A * (std::exp(-0.5 * r2 / (w * w)) - std::exp(-0.5 * i2 / (w * w)));
            }
            return v;
        };
    } else if (s.kind == "csv") {
        const FormField f = read_field_csv(s.file, cfg.grid.build(), degree);
        return FormSource::from_field(f);
    } else {
        throw ContractViolation("unknown initial.kind: " + s.kind);
    }
    return FormSource{dim, degree, [profile, weights, nc](const Vec& x, double* out) {
                          const double p = profile(x);
                          for (int k = 0; k < nc; ++k) out[k] = weights[k] * p;
                      }};
}

std::function<Vec(const Vec&)> make_initial_b(const RunConfig& cfg) {
    const InitialSpec& s = cfg.initial;
    require(cfg.grid.dim == 3, "magnetic fields need a 3D grid");
    const double A = s.amplitude, c = s.center, w = s.width;
    if (s.kind == "uniform_b") {
        require(s.b.size() == 3, "initial.b needs three components");
        Vec B(3);
        B << s.b[0], s.b[1], s.b[2];
        return [B](const Vec&) { return B; };
    }
    if (s.kind == "cos_x_normal_b") {
        const double k = 2.0 * M_PI * s.mode / cfg.grid.length[0];
        return [=](const Vec& x) {
            Vec B = Vec::Zero(3);
            B(2) = A * std::cos(k * x(0));
            return B;
        };
    }
    if (s.kind == "gaussian_tangential_b") {
        return [=](const Vec& x) {
            Vec B = Vec::Zero(3);
            B(0) = A * gauss(x(2) - c, w);
            return B;
        };
    }
    if (s.kind == "zero") return [](const Vec&) { return Vec(Vec::Zero(3)); };
    throw ContractViolation("unknown magnetic initial.kind: " + s.kind);
}

VelocityFn make_velocity(const RunConfig& cfg) {
    const int dim = cfg.grid.dim;
    const VelocitySpec& v = cfg.velocity;
    if (v.kind == "zero") return {};
    if (v.kind == "constant") {
        Vec u(dim);
        for (int a = 0; a < dim; ++a) u(a) = v.value[a];
        return [u](double, const Vec&) { return u; };
    }
    const double s = v.shear;
    return [s, dim](double, const Vec& x) {
        Vec u = Vec::Zero(dim);
        u(0) = s * x(dim - 1);
        return u;
    };
}

MetricModel make_metric(const RunConfig& cfg) {
    if (cfg.metric.kind == "conformal") return MetricModel::conformal(cfg.grid.dim, cfg.metric.lambda);
    return MetricModel::flat(cfg.grid.dim);
}

std::string slice_filename(const std::string& stem, double tau) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "_tau_%.6f.csv", tau);
    return stem + buf;
}

void write_field_csv(const std::string& path, const FormField& f, bool with_stderr) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    const char* axes[] = {"x", "y", "z"};
    for (int a = 0; a < f.grid.dim; ++a) out << (a ? "," : "") << axes[a];
    for (int c = 0; c < f.ncomp; ++c) {
        out << ',' << f.names[c];
        if (with_stderr) out << ',' << f.names[c] << "_stderr";
    }
    out << '\n';
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (std::size_t node = 0; node < f.grid.size(); ++node) {
        const Vec x = f.grid.point(node);
        for (int a = 0; a < f.grid.dim; ++a) {
            if (a) out << ',';
            put(x(a));
        }
        for (int c = 0; c < f.ncomp; ++c) {
            out << ',';
            put(f.at(node, c));
            if (with_stderr) {
                out << ',';
                put(f.err(node, c));
            }
        }
        out << '\n';
    }
}

FormField read_field_csv(const std::string& path, const StripGrid& g, int degree) {
    std::ifstream in(path);
    if (!in) throw ContractViolation("cannot open field file " + path);
    FormField f(g, degree);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) header.push_back(tok);
    }
    std::vector<int> col(f.ncomp, -1);
    for (int c = 0; c < f.ncomp; ++c)
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == f.names[c]) col[c] = static_cast<int>(k);
    for (int c = 0; c < f.ncomp; ++c)
        if (col[c] < 0) throw ContractViolation("field file lacks column " + f.names[c]);
    std::size_t node = 0;
    while (std::getline(in, line) && node < g.size()) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        for (int c = 0; c < f.ncomp; ++c) f.at(node, c) = vals.at(col[c]);
        ++node;
    }
    if (node != g.size()) throw ContractViolation("field file has the wrong number of rows");
    return f;
}

}  // namespace frameflow
