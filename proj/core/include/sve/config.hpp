#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sve/cnr.hpp"
#include "sve/coefficients.hpp"
#include "sve/kernel.hpp"
#include "sve/lift_grid.hpp"

namespace sve {

struct kernel_config {
    std::string kind = "fractional";  // atomic | fractional | gamma | log_example
    double alpha = 0.75;
    double beta = 1.0;
    std::optional<double> eta;
    std::vector<atom> atoms;
};

struct grid_config {
    int nodes = 100;
    double theta_min = 1e-4;
    double theta_max = 1e4;
    bool fold_head_mass = true;
};

struct coefficients_config {
    std::string drift_name = "zero_drift";
    param_map drift_params;
    std::string sigma_name = "constant_sigma";
    param_map sigma_params = {{"s", 1.0}};
};

struct sim_params_config {
    double T = 1.0;
    double h = 1.0 / 256.0;
    int paths = 100;
    std::uint64_t seed = 42;
    double x0 = 0.0;
    bool truncation_infinite = true;
    double truncation_m = 1.0;
    std::string kernel_source = "exact";     // exact | grid (direct scheme)
    std::string drift_rule = "point";        // point | cell_average (direct scheme)
    int threads = 1;
};

struct cnr_run_config {
    std::string mode = "singular";
    int k_max = 3;
    // coupled run parameters
    int paths = 200;
    double T = 1.0;
    double h = 1.0 / 256.0;
    double x0 = 0.0;
    bool from_schedule_row = false;
    int row = 1;
    double delta0 = 1e-4;
    double delta1 = 1e-5;
    double delta2 = 0.05;
    double delta3 = 0.13;
    double lambda = 2.0;
    double J = 1.0;
    double m_level = 1.0;
    double truncation_radius = 1e3;  // radial truncation of the reference pair
};

struct demo_config {
    double alpha = 0.75;
    double beta = 0.5;
    double delta = 1e-4;
    double T = 1.0;
    double h = 1.0 / 512.0;
    int noise_paths = 200;
};

struct experiment_config {
    kernel_config kernel_spec;
    grid_config grid_spec;
    coefficients_config coeffs;
    sim_params_config sim;
    cnr_run_config cnr;
    demo_config demo;
    std::string raw_text;  // config file bytes, hashed into the manifest
};

// Parse + validate a JSON experiment config; every failure names the field.
experiment_config load_config(const std::filesystem::path& path);
experiment_config parse_config_text(const std::string& text);

kernel build_kernel(const kernel_config& kc);
lift_grid build_grid(const kernel& k, const grid_config& gc);
coefficient_pair build_pair(const coefficients_config& cc);

}  // namespace sve
