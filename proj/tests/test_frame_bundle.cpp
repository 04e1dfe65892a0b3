#include <doctest.h>

#include "frameflow/frame_bundle.hpp"

#include <random>

using namespace frameflow;

namespace {

std::mt19937_64 gen(11);
std::normal_distribution<double> N;

Mat random_matrix(int n) {
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = N(gen);
    return a;
}

Mat random_orthogonal(int n) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd(random_matrix(n)));
    Mat q = qr.householderQ();
    return q;
}

Mat random_form(int n, int degree) {
    if (degree == 0) return Mat::Constant(1, 1, N(gen));
    if (degree == 1) {
        Mat v(n, 1);
        for (int i = 0; i < n; ++i) v(i, 0) = N(gen);
        return v;
    }
    const Mat a = random_matrix(n);
    return a - a.transpose();
}

}  // namespace

TEST_CASE("horizontal field of a trivial connection") {
    const ConnectionField conn(MetricModel::flat(2), 0.5, TraceTorsion::zero(2));
    const FramePoint r(Vec::Zero(2), Mat::Identity(2, 2));
    const HorizontalField h = horizontal_field(conn, 0.0, r);
    CHECK((h.x_part - r.e).cwiseAbs().maxCoeff() == 0.0);
    for (double v : h.e_part.a) CHECK(v == 0.0);
}

TEST_CASE("horizontal field of the constant-flow connection") {
    const double nu = 0.5;
    auto make = [&](double scale) {
        return ConnectionField(MetricModel::flat(2), nu,
                               TraceTorsion::from_velocity(
                                   2, [scale](double, const Vec&) { return Vec(Vec::Unit(2, 0) * scale); }, nu));
    };
    const ConnectionField conn = make(1.0);
    Vec x(2);
    x << 0.3, 0.8;
    const FramePoint r = standard_frame(conn.metric(), nu, x);
    CHECK((r.e - std::sqrt(2 * nu) * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
    const HorizontalField h = horizontal_field(conn, 0.0, r);
    const Tensor3 G = rcw_christoffels(conn, 0.0, x);
    for (int a = 0; a < 2; ++a)
        for (int al = 0; al < 2; ++al)
            for (int c = 0; c < 2; ++c) {
                double s = 0;
                for (int b = 0; b < 2; ++b)
                    for (int g = 0; g < 2; ++g) s -= G(al, b, g) * r.e(b, a) * r.e(g, c);
                CHECK(std::abs(h.e_part(a, al, c) - s) < 1e-14);
            }
    const HorizontalField h2 = horizontal_field(make(2.0), 0.0, r);
    for (int i = 0; i < 8; ++i) CHECK(h2.e_part.a[i] == 2.0 * h.e_part.a[i]);
}

TEST_CASE("lift of simple forms") {
    const FramePoint r(Vec::Zero(2), Mat::Identity(2, 2));
    CHECK(lift_form(Mat::Zero(2, 2), 2, r).cwiseAbs().maxCoeff() == 0.0);
    Mat w = Mat::Zero(2, 2);
    w(0, 1) = 1.0;
    w(1, 0) = -1.0;
    CHECK(lift_form(w, 2, r)(0, 1) == 1.0);
}

TEST_CASE("lift/project round trip and equivariance") {
    for (int n : {2, 3}) {
        for (int degree = 0; degree <= 2; ++degree) {
            for (int trial = 0; trial < 20; ++trial) {
                Vec x(n);
                for (int a = 0; a < n; ++a) x(a) = std::abs(N(gen));
                const FramePoint r(x, random_matrix(n) + 3.0 * Mat::Identity(n, n));
                const Mat w = random_form(n, degree);
                CHECK((project_form(lift_form(w, degree, r), degree, r) - w).cwiseAbs().maxCoeff() < 1e-10);

                const Mat A = random_orthogonal(n);
                const FramePoint ra(x, r.e * A);
                const Mat l = lift_form(w, degree, r);
                const Mat la = lift_form(w, degree, ra);
                Mat expect = l;
                if (degree == 1) expect = A.transpose() * l;
                if (degree == 2) expect = A.transpose() * l * A;
                CHECK((la - expect).cwiseAbs().maxCoeff() < 1e-10);
            }
        }
    }
    const FramePoint r(Vec::Zero(2), Mat::Identity(2, 2));
    CHECK(project_form(Mat::Zero(2, 2), 2, r).cwiseAbs().maxCoeff() == 0.0);
    // Projection does not enforce antisymmetry.
    Mat s = Mat::Identity(2, 2);
    CHECK((project_form(s, 2, r) - s).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("orthonormalize") {
    const Mat G = 0.5 * Mat::Identity(3, 3);  // g / 2nu with nu = 1
    const Mat e0 = std::sqrt(2.0) * random_orthogonal(3);
    CHECK((orthonormalize(e0, G) - e0).cwiseAbs().maxCoeff() < 1e-12);

    Mat e1 = e0;
    for (int i = 0; i < 9; ++i) e1(i / 3, i % 3) += 1e-6 * N(gen);
    const Mat o = orthonormalize(e1, G);
    CHECK((o.transpose() * G * o - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    // Idempotent and well conditioned.
    CHECK((orthonormalize(o, G) - o).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(std::sqrt(0.5) * o));
    CHECK(svd.singularValues()(0) / svd.singularValues()(2) <= 1.0 + 1e-10);

    // Large distortion goes through the polar fallback.
    const Mat big = random_matrix(3) + 2.0 * Mat::Identity(3, 3);
    const Mat ob = orthonormalize(big, G);
    CHECK((ob.transpose() * G * ob - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);

    Mat sing = Mat::Identity(3, 3);
    sing(2, 2) = 0.0;
    CHECK_THROWS_AS(orthonormalize(sing, G), FrameCollapse);
}

TEST_CASE("absolute boundary residual") {
    const StripGrid g2(2, {5, 6, 1}, {1.0, 1.0, 0.0});
    FormField zero(g2, 2);
    BcResidual r = absolute_bc_residual(zero);
    CHECK(r.dirichlet == 0.0);
    CHECK(r.neumann == 0.0);

    FormField w(g2, 2);
    for (std::size_t i = 0; i < g2.size(); ++i) w.at(i, 0) = g2.point(i)(1);
    r = absolute_bc_residual(w);
    CHECK(r.dirichlet == 0.0);
    CHECK(r.neumann == 0.0);

    // n = 3, W13 = z: normal-part component vanishes on the wall; its normal
    // derivative is 1 and would violate the condition were it tangential.
    const StripGrid g3(3, {4, 4, 6}, {1.0, 1.0, 1.0});
    FormField f(g3, 2);
    for (std::size_t i = 0; i < g3.size(); ++i) f.at(i, 1) = g3.point(i)(2);
    r = absolute_bc_residual(f);
    CHECK(r.dirichlet == 0.0);
    CHECK(r.neumann == doctest::Approx(0.0));
    CHECK(r.normal_derivative[1] == doctest::Approx(1.0).epsilon(1e-12));
    // Same profile on the tangential component W12.
    FormField t(g3, 2);
    for (std::size_t i = 0; i < g3.size(); ++i) t.at(i, 0) = g3.point(i)(2);
    r = absolute_bc_residual(t);
    CHECK(r.neumann == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.dirichlet == 0.0);
}
