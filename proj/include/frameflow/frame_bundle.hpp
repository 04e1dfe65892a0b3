#pragma once

#include "frameflow/geometry.hpp"
#include "frameflow/grid.hpp"

namespace frameflow {

// Frame point r = (x, e) with cached theta = e^{-1}. Columns of e are the
// frame vectors, normalised so that e^T (g / 2nu) e = I.
struct FramePoint {
    Vec x;
    Mat e;
    Mat theta;

    FramePoint() = default;
    FramePoint(Vec x0, Mat e0);
};

// Inverse of a small square matrix via the fixed-size closed forms.
Mat small_inverse(const Mat& m);

// Frame at x built from sqrt(2nu) times the coordinate basis, made orthonormal
// in the scaled metric.
FramePoint standard_frame(const MetricModel& metric, double nu, const Vec& x);

struct HorizontalField {
    Mat x_part;      // column a: e_a
    Tensor3 e_part;  // (a, alpha, c) = -Gamma^alpha_{beta gamma} e^beta_a e^gamma_c
};

HorizontalField horizontal_field(const ConnectionField& conn, double tau, const FramePoint& r);

// Base components to frame components. Degree 0: 1x1, degree 1: n x 1 column,
// degree 2: antisymmetric n x n.
Mat lift_form(const Mat& omega, int degree, const FramePoint& r);
Mat project_form(const Mat& lifted, int degree, const FramePoint& r);

// Symmetric (polar) orthonormalisation in the inner product gscaled.
// Throws FrameCollapse for singular input.
Mat orthonormalize(const Mat& e, const Mat& gscaled);

struct BcResidual {
    double dirichlet = 0.0;  // max |normal-part component| on wall nodes
    double neumann = 0.0;    // max one-sided normal derivative of tangential components
    std::vector<double> normal_derivative;  // per component, max over wall nodes
};

BcResidual absolute_bc_residual(const FormField& field);

}  // namespace frameflow
