#include "frameflow/frame_bundle.hpp"

#include <cmath>

namespace frameflow {

FramePoint::FramePoint(Vec x0, Mat e0) : x(std::move(x0)), e(std::move(e0)) {
    require(x.size() == e.rows() && e.rows() == e.cols(), "frame shape mismatch");
    theta = small_inverse(e);
}

Mat small_inverse(const Mat& m) {
    if (m.rows() == 2) return Mat(Eigen::Matrix2d(m).inverse());
    if (m.rows() == 3) return Mat(Eigen::Matrix3d(m).inverse());
    return m.inverse();
}

FramePoint standard_frame(const MetricModel& metric, double nu, const Vec& x) {
    require(nu > 0.0, "viscosity must be positive");
    require(x.size() == metric.dim(), "point dimension mismatch");
    const int n = metric.dim();
    Mat e = std::sqrt(2.0 * nu) * Mat::Identity(n, n);
    if (!metric.is_flat()) e = orthonormalize(e, metric.g(x) / (2.0 * nu));
    return FramePoint(x, e);
}

HorizontalField horizontal_field(const ConnectionField& conn, double tau, const FramePoint& r) {
    const int n = conn.dim();
    HorizontalField h{r.e, Tensor3(n)};
    const Tensor3 G = conn.eval(tau, r.x);
    for (int a = 0; a < n; ++a)
        for (int al = 0; al < n; ++al)
            for (int c = 0; c < n; ++c) {
                double s = 0.0;
                for (int b = 0; b < n; ++b)
                    for (int k = 0; k < n; ++k) s += G(al, b, k) * r.e(b, a) * r.e(k, c);
                h.e_part(a, al, c) = -s;
            }
    return h;
}

Mat lift_form(const Mat& omega, int degree, const FramePoint& r) {
    switch (degree) {
        case 0:
            return omega;
        case 1:
            return r.e.transpose() * omega;
        case 2:
            return r.e.transpose() * omega * r.e;
        default:
            throw ContractViolation("form degree must be 0, 1 or 2");
    }
}

Mat project_form(const Mat& lifted, int degree, const FramePoint& r) {
    switch (degree) {
        case 0:
            return lifted;
        case 1:
            return r.theta.transpose() * lifted;
        case 2:
            return r.theta.transpose() * lifted * r.theta;
        default:
            throw ContractViolation("form degree must be 0, 1 or 2");
    }
}

Mat orthonormalize(const Mat& e, const Mat& gscaled) {
    const int n = static_cast<int>(e.rows());
    const Mat I = Mat::Identity(n, n);
    if (!e.allFinite()) throw FrameCollapse("non-finite frame");
    Mat S = e.transpose() * gscaled * e;
    double defect = (S - I).cwiseAbs().maxCoeff();
    if (defect < 1e-14) return e;
    Mat out = e;
    if (defect < 0.25) {
        for (int it = 0; it < 30 && defect >= 1e-14; ++it) {
            out = out * (3.0 * I - S) * 0.5;
            S = out.transpose() * gscaled * out;
            const double d = (S - I).cwiseAbs().maxCoeff();
            if (d >= defect) break;  // stalled at roundoff
            defect = d;
        }
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    const auto& ev = es.eigenvalues();
    if (es.info() != Eigen::Success || !(ev.minCoeff() > 1e-14 * std::max(1.0, ev.maxCoeff())))
        throw FrameCollapse("singular frame");
    out = e * es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return out;
}

BcResidual absolute_bc_residual(const FormField& f) {
    const StripGrid& g = f.grid;
    const int n = g.dim;
    require(g.npts[n - 1] >= 2, "field grid has no boundary row");
    std::vector<bool> dirichlet(f.ncomp, false);
    if (f.degree == 1) {
        dirichlet[n - 1] = true;
    } else if (f.degree == 2) {
        int c = 0;
        for (auto [a, b] : form_pairs(n)) dirichlet[c++] = (b == n - 1);
    }
    BcResidual r;
    r.normal_derivative.assign(f.ncomp, 0.0);
    const double h = g.h(n - 1);
    const bool second_order = g.npts[n - 1] >= 3;
    for (std::size_t node = 0; node < g.size(); ++node) {
        auto ijk = g.unravel(node);
        if (ijk[n - 1] != 0) continue;
        auto row = [&](int j) {
            auto q = ijk;
            q[n - 1] = j;
            return g.index(q);
        };
        for (int c = 0; c < f.ncomp; ++c) {
            const double f0 = f.at(node, c), f1 = f.at(row(1), c);
            const double d = second_order ? (-3.0 * f0 + 4.0 * f1 - f.at(row(2), c)) / (2.0 * h) : (f1 - f0) / h;
            r.normal_derivative[c] = std::max(r.normal_derivative[c], std::abs(d));
            if (dirichlet[c]) {
                r.dirichlet = std::max(r.dirichlet, std::abs(f0));
            } else {
                r.neumann = std::max(r.neumann, std::abs(d));
            }
        }
    }
    return r;
}

}  // namespace frameflow
