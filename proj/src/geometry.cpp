#include "frameflow/geometry.hpp"

#include <cmath>

namespace frameflow {

namespace {

constexpr double kMinEig = 1e-10;

Tensor3 central_dg(const MetricModel::MetricFn& g, int n, const Vec& x) {
    Tensor3 out(n);
    const double h = 1e-5 * (1.0 + x.norm());
    for (int c = 0; c < n; ++c) {
        Vec xp = x, xm = x;
        xp(c) += h;
        xm(c) -= h;
        const Mat d = (g(xp) - g(xm)) / (2.0 * h);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) out(a, b, c) = d(a, b);
    }
    return out;
}

Mat checked_inverse(const Mat& g) {
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() >= kMinEig))
        throw DegenerateMetric("metric eigenvalue below 1e-10");
    return es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

MetricModel MetricModel::flat(int n) {
    require(n >= 2 && n <= kMaxDim, "metric dimension must be 2 or 3");
    return MetricModel(n, MetricKind::flat);
}

MetricModel MetricModel::conformal(int n, double lambda) {
    require(n >= 2 && n <= kMaxDim, "metric dimension must be 2 or 3");
    MetricModel m(n, MetricKind::conformal_test);
    m.lambda_ = lambda;
    m.validate();
    return m;
}

MetricModel MetricModel::user(int n, MetricFn g, DerivFn dg) {
    require(n >= 2 && n <= kMaxDim, "metric dimension must be 2 or 3");
    require(static_cast<bool>(g), "user metric needs an evaluator");
    MetricModel m(n, MetricKind::user);
    m.g_ = std::move(g);
    m.dg_ = std::move(dg);
    m.validate();
    return m;
}

void MetricModel::validate() const {
    // Deterministic sample of the chart: tangential in [-2, 2], normal in [0, 4].
    std::uint64_t s = 0x9e3779b97f4a7c15ULL;
    auto next = [&s]() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return static_cast<double>(s >> 11) * 0x1.0p-53;
    };
    for (int k = 0; k < 32; ++k) {
        Vec x(n_);
        for (int i = 0; i < n_ - 1; ++i) x(i) = 4.0 * next() - 2.0;
        x(n_ - 1) = (k == 0) ? 0.0 : 4.0 * next();
        const Mat gx = g(x);
        if (!gx.allFinite()) throw DegenerateMetric("metric not finite");
        const double scale = gx.cwiseAbs().maxCoeff();
        if ((gx - gx.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw ContractViolation("metric not symmetric");
        for (int a = 0; a < n_ - 1; ++a)
            if (std::abs(gx(a, n_ - 1)) > 1e-12 * scale)
                throw ContractViolation("metric chart is not boundary adapted (g_an != 0)");
        checked_inverse(gx);
    }
}

Mat MetricModel::g(const Vec& x) const {
    switch (kind_) {
        case MetricKind::flat:
            return Mat::Identity(n_, n_);
        case MetricKind::conformal_test:
            return std::exp(2.0 * lambda_ * x(n_ - 1)) * Mat::Identity(n_, n_);
        case MetricKind::user:
            return g_(x);
    }
    return Mat::Identity(n_, n_);
}

Tensor3 MetricModel::dg(const Vec& x) const {
    Tensor3 out(n_);
    switch (kind_) {
        case MetricKind::flat:
            return out;
        case MetricKind::conformal_test: {
            const double d = 2.0 * lambda_ * std::exp(2.0 * lambda_ * x(n_ - 1));
            for (int a = 0; a < n_; ++a) out(a, a, n_ - 1) = d;
            return out;
        }
        case MetricKind::user:
            return dg_ ? dg_(x) : central_dg(g_, n_, x);
    }
    return out;
}

TraceTorsion TraceTorsion::zero(int n) {
    TraceTorsion t;
    t.n_ = n;
    return t;
}

TraceTorsion TraceTorsion::from_function(int n, Fn q, double t_min, double t_max) {
    require(static_cast<bool>(q), "torsion needs an evaluator");
    require(t_min <= t_max, "torsion time range is empty");
    TraceTorsion t;
    t.n_ = n;
    t.zero_ = false;
    t.t0_ = t_min;
    t.t1_ = t_max;
    t.q_ = std::move(q);
    return t;
}

TraceTorsion TraceTorsion::from_velocity(int n, Fn u, double nu, double t_min, double t_max) {
    require(nu > 0.0, "viscosity must be positive");
    require(static_cast<bool>(u), "velocity needs an evaluator");
    const double s = 2.0 * nu;
    return from_function(
        n, [u = std::move(u), s](double tau, const Vec& x) -> Vec { return -u(tau, x) / s; }, t_min, t_max);
}

Vec TraceTorsion::eval(double tau, const Vec& x) const {
    if (zero_) return Vec::Zero(n_);
    const double slack = 1e-12 * (1.0 + std::abs(tau));
    if (tau < t0_ - slack || tau > t1_ + slack)
        throw OutOfRange("torsion queried at tau=" + std::to_string(tau) + " outside [" + std::to_string(t0_) +
                         ", " + std::to_string(t1_) + "]");
    return q_(std::clamp(tau, t0_, t1_), x);
}

ConnectionField::ConnectionField(MetricModel metric, double nu, TraceTorsion torsion)
    : metric_(std::move(metric)), nu_(nu), torsion_(std::move(torsion)) {
    require(nu_ > 0.0, "viscosity must be positive");
    require(torsion_.dim() == metric_.dim(), "torsion and metric dimensions differ");
}

Tensor3 levi_civita(const MetricModel& metric, const Vec& x) {
    const int n = metric.dim();
    Tensor3 G(n);
    if (metric.is_flat()) return G;
    const Mat gi = checked_inverse(metric.g(x));
    const Tensor3 d = metric.dg(x);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = b; c < n; ++c) {
                double s = 0.0;
                for (int e = 0; e < n; ++e) s += gi(a, e) * (d(e, b, c) + d(e, c, b) - d(b, c, e));
                G(a, b, c) = 0.5 * s;
                G(a, c, b) = 0.5 * s;
            }
    return G;
}

Tensor3 ConnectionField::eval(double tau, const Vec& x) const {
    const int n = dim();
    Tensor3 G = levi_civita(metric_, x);
    if (torsion_.is_zero()) return G;
    const Vec q = torsion_.eval(tau, x);
    const Mat g = metric_.g(x);
    const Vec qup = metric_.is_flat() ? q : Vec(checked_inverse(g) * q);
    const double c = 2.0 / (n - 1);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int k = 0; k < n; ++k) G(a, b, k) += c * ((a == b ? q(k) : 0.0) - g(b, k) * qup(a));
    return G;
}

Mat ConnectionField::transport(double tau, const Vec& x, const Vec& v) const {
    const int n = dim();
    if (is_trivial()) return Mat::Zero(n, n);
    if (metric_.is_flat()) {
        const Vec q = torsion_.eval(tau, x);
        const double c = 2.0 / (n - 1);
        return -c * (v * q.transpose() - q * v.transpose());
    }
    const Tensor3 G = eval(tau, x);
    Mat A = Mat::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int k = 0; k < n; ++k) A(a, k) -= G(a, b, k) * v(b);
    return A;
}

Tensor3 rcw_christoffels(const ConnectionField& conn, double tau, const Vec& x) { return conn.eval(tau, x); }

Vec trace_torsion_of(const Tensor3& G) {
    const int n = G.n;
    Vec q = Vec::Zero(n);
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) q(b) += 0.5 * (G(a, a, b) - G(a, b, a));
    return q;
}

CurvaturePack zero_curvature(int n, const Vec& x) {
    CurvaturePack p;
    p.ric = Mat::Zero(n, n);
    p.rr = Tensor4(n);
    p.at = x;
    return p;
}

CurvaturePack curvature(const MetricModel& metric, const Vec& x) {
    const int n = metric.dim();
    CurvaturePack p = zero_curvature(n, x);
    if (metric.is_flat()) return p;

    const Tensor3 G = levi_civita(metric, x);
    // dG[d](a, b, c) = d Gamma^a_bc / d x^d
    std::array<Tensor3, kMaxDim> dG;
    const double h = 1e-4 * (1.0 + x.norm());
    for (int d = 0; d < n; ++d) {
        Vec xp = x, xm = x;
        xp(d) += h;
        xm(d) -= h;
        const Tensor3 Gp = levi_civita(metric, xp), Gm = levi_civita(metric, xm);
        dG[d] = Tensor3(n);
        for (std::size_t i = 0; i < Gp.a.size(); ++i) dG[d].a[i] = (Gp.a[i] - Gm.a[i]) / (2.0 * h);
    }
    // R^a_{bcd} = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb
    Tensor4 R(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double s = dG[c](a, d, b) - dG[d](a, c, b);
                    for (int e = 0; e < n; ++e) s += G(a, c, e) * G(e, d, b) - G(a, d, e) * G(e, c, b);
                    R(a, b, c, d) = s;
                }
    const Mat gi = checked_inverse(metric.g(x));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double s = 0.0;
                    for (int e = 0; e < n; ++e) s += gi(b, e) * R(a, e, d, c);
                    p.rr(a, b, c, d) = s;
                }
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) {
            double s = 0.0;
            for (int c = 0; c < n; ++c) s += p.rr(b, c, c, a);
            p.ric(b, a) = s;
        }
    return p;
}

Mat weitzenbock_2form(const CurvaturePack& pack, const Mat& phi) {
    const int n = static_cast<int>(pack.ric.rows());
    require(phi.rows() == n && phi.cols() == n, "form size does not match curvature");
    const double tol = 1e-12 * (1.0 + phi.cwiseAbs().maxCoeff());
    if ((phi + phi.transpose()).cwiseAbs().maxCoeff() > tol) throw ContractViolation("2-form is not antisymmetric");
    Mat W = Mat::Zero(n, n);
    for (int a1 = 0; a1 < n; ++a1)
        for (int a2 = 0; a2 < n; ++a2) {
            double s = 0.0;
            for (int b = 0; b < n; ++b) s += 0.5 * (pack.ric(b, a1) * phi(b, a2) + pack.ric(b, a2) * phi(a1, b));
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) s += pack.rr(b, c, a2, a1) * phi(c, b);
            W(a1, a2) = s;
        }
    return W;
}

}  // namespace frameflow
