#pragma once

#include "frameflow/types.hpp"

#include <functional>
#include <limits>
#include <memory>

namespace frameflow {

enum class MetricKind { flat, conformal_test, user };

// Metric on the half-space chart {x_n >= 0}. Charts must be boundary adapted:
// g_{a n} = 0 for a < n.
class MetricModel {
public:
    using MetricFn = std::function<Mat(const Vec&)>;
    // Fills dg(a, b, c) = d g_ab / d x^c.
    using DerivFn = std::function<Tensor3(const Vec&)>;

    static MetricModel flat(int n);
    // g = exp(2 lambda x_n) I, analytic first derivatives.
    static MetricModel conformal(int n, double lambda);
    // Derivatives default to central differences.
    static MetricModel user(int n, MetricFn g, DerivFn dg = {});

    int dim() const { return n_; }
    MetricKind kind() const { return kind_; }
    bool is_flat() const { return kind_ == MetricKind::flat; }
    double lambda() const { return lambda_; }

    Mat g(const Vec& x) const;
    Tensor3 dg(const Vec& x) const;

private:
    MetricModel(int n, MetricKind k) : n_(n), kind_(k) {}
    void validate() const;

    int n_ = 2;
    MetricKind kind_ = MetricKind::flat;
    double lambda_ = 0.0;
    MetricFn g_;
    DerivFn dg_;
};

struct CurvaturePack {
    Mat ric;     // ric(b, a) = Ric^b_a
    Tensor4 rr;  // rr(a, b, c, d) = R^{a b}_{c d}
    Vec at;
};

// Trace-torsion 1-form Q_b(tau, x), defined on [t_min, t_max].
class TraceTorsion {
public:
    using Fn = std::function<Vec(double, const Vec&)>;

    static TraceTorsion zero(int n);
    static TraceTorsion from_function(int n, Fn q, double t_min = -std::numeric_limits<double>::infinity(),
                                      double t_max = std::numeric_limits<double>::infinity());
    // Q = -u / (2 nu).
    static TraceTorsion from_velocity(int n, Fn u, double nu,
                                      double t_min = -std::numeric_limits<double>::infinity(),
                                      double t_max = std::numeric_limits<double>::infinity());

    int dim() const { return n_; }
    bool is_zero() const { return zero_; }
    double t_min() const { return t0_; }
    double t_max() const { return t1_; }
    Vec eval(double tau, const Vec& x) const;

private:
    int n_ = 2;
    bool zero_ = true;
    double t0_ = -std::numeric_limits<double>::infinity();
    double t1_ = std::numeric_limits<double>::infinity();
    Fn q_;
};

class ConnectionField {
public:
    ConnectionField(MetricModel metric, double nu, TraceTorsion torsion);

    const MetricModel& metric() const { return metric_; }
    const TraceTorsion& torsion() const { return torsion_; }
    double nu() const { return nu_; }
    int dim() const { return metric_.dim(); }
    // Flat metric and zero torsion: frames are parallel.
    bool is_trivial() const { return metric_.is_flat() && torsion_.is_zero(); }

    Tensor3 eval(double tau, const Vec& x) const;

    // A(a, c) = -Gamma^a_{b c}(tau, x) v^b, so that de = A e along dX = v.
    Mat transport(double tau, const Vec& x, const Vec& v) const;

private:
    MetricModel metric_;
    double nu_;
    TraceTorsion torsion_;
};

Tensor3 levi_civita(const MetricModel& metric, const Vec& x);
Tensor3 rcw_christoffels(const ConnectionField& conn, double tau, const Vec& x);
// T^a_{a b} of the antisymmetric part of gamma.
Vec trace_torsion_of(const Tensor3& gamma);
CurvaturePack curvature(const MetricModel& metric, const Vec& x);
CurvaturePack zero_curvature(int n, const Vec& x);
Mat weitzenbock_2form(const CurvaturePack& pack, const Mat& phi);

}  // namespace frameflow
