#pragma once

#include "frameflow/fluids.hpp"

#include <json.hpp>

#include <string>

namespace frameflow {

struct GridSpec {
    int dim = 2;
    std::vector<int> n{17, 9};
    std::vector<double> length{4.0, 2.0};

    StripGrid build() const;
};

// Initial data. Profiles in the wall-normal coordinate y:
//   gaussian_normal       A exp(-(y-c)^2 / (2 w^2))
//   odd_gaussian_normal   A [G(y-c) - G(y+c)]
//   cos_x_odd_gaussian    A cos(2 pi m x / L_x) [G(y-c) - G(y+c)]
//   vortex_pair           +A and -A Gaussian blobs at the two centres, wall images subtracted
//   constant, zero, csv
// For forms every component listed in "components" (default: all) carries the profile.
// For the dynamo the profile drives B: "uniform_b" uses "b", "cos_x_normal_b"
// gives B = (0, 0, A cos(2 pi m x / L_x)), "gaussian_tangential_b" gives B = (G(z), 0, 0).
struct InitialSpec {
    std::string kind = "zero";
    double amplitude = 1.0;
    double center = 1.0;
    double width = 0.2;
    int mode = 1;
    std::vector<std::vector<double>> centers;  // vortex_pair
    std::vector<double> components;            // per-component weights
    std::vector<double> b{0.0, 0.0, 1.0};      // uniform_b
    std::string file;                          // csv
};

struct VelocitySpec {
    std::string kind = "zero";  // zero | constant | shear
    std::vector<double> value;  // constant
    double shear = 0.0;         // u = (shear * x_n, 0, ...)
};

struct MetricSpec {
    std::string kind = "flat";  // flat | conformal
    double lambda = 0.0;
};

struct RunConfig {
    std::string subcommand;
    double nu = 0.5;
    double nu_m = 0.5;
    double T = 0.5;
    double dtau_outer = 0.5;
    int degree = 2;
    GridSpec grid;
    McConfig mc;
    MetricSpec metric;
    InitialSpec initial;
    VelocitySpec velocity;
    int probe_stride = 1;
    int picard_sweeps = 2;
    double picard_tol = 0.5;
    std::vector<double> start;  // localtime-check start point (default: wall origin)
    std::string output_dir = "out";

    void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_config(const std::string& path);

FormSource make_initial_form(const RunConfig& cfg, int degree);
std::function<Vec(const Vec&)> make_initial_b(const RunConfig& cfg);
VelocityFn make_velocity(const RunConfig& cfg);
MetricModel make_metric(const RunConfig& cfg);

enum ExitCode { kOk = 0, kNumericFailure = 1, kUsage = 2 };

const char* git_describe();

// Runs a subcommand and writes its artifacts; returns an exit code.
int run(const RunConfig& cfg);

std::string slice_filename(const std::string& stem, double tau);
void write_field_csv(const std::string& path, const FormField& f, bool with_stderr = true);
FormField read_field_csv(const std::string& path, const StripGrid& g, int degree);

}  // namespace frameflow
