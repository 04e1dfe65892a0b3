#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace frameflow {

// Dimensions up to 3 are supported; storage is inline.
constexpr int kMaxDim = 3;

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ContractViolation : Error {
    using Error::Error;
};
struct DegenerateMetric : Error {
    using Error::Error;
};
struct OutOfRange : Error {
    using Error::Error;
};
// Per-path failures. The engine discards the path and counts it.
struct PathDiscarded : Error {
    using Error::Error;
};
struct FrameCollapse : PathDiscarded {
    using PathDiscarded::PathDiscarded;
};
struct EstimationFailed : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};
struct ConvergenceFailure : Error {
    ConvergenceFailure(const std::string& what, std::vector<double> hist)
        : Error(what), history(std::move(hist)) {}
    std::vector<double> history;
};

inline void require(bool cond, const char* msg) {
    if (!cond) throw ContractViolation(msg);
}

// Rank-3 array with inline storage, indexed (a, b, c).
struct Tensor3 {
    int n = 0;
    std::array<double, kMaxDim * kMaxDim * kMaxDim> a{};

    Tensor3() = default;
    explicit Tensor3(int dim) : n(dim) { a.fill(0.0); }
    double& operator()(int i, int j, int k) { return a[(i * n + j) * n + k]; }
    double operator()(int i, int j, int k) const { return a[(i * n + j) * n + k]; }
};

// Rank-4 array, indexed (a, b, c, d).
struct Tensor4 {
    int n = 0;
    std::array<double, kMaxDim * kMaxDim * kMaxDim * kMaxDim> a{};

    Tensor4() = default;
    explicit Tensor4(int dim) : n(dim) { a.fill(0.0); }
    double& operator()(int i, int j, int k, int l) { return a[((i * n + j) * n + k) * n + l]; }
    double operator()(int i, int j, int k, int l) const { return a[((i * n + j) * n + k) * n + l]; }
};

}  // namespace frameflow
