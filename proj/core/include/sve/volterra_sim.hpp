#pragma once

#include <cstdint>
#include <vector>

#include "sve/coefficients.hpp"
#include "sve/kernel.hpp"
#include "sve/lift_grid.hpp"
#include "sve/see_sim.hpp"

namespace sve {

// Weight rule for the drift part of the discrete convolution. The point rule
// evaluates K at the lag (i-l)h; the cell-average rule uses the exact kernel
// integral over [(i-l-1)h, (i-l)h], which matches the lifted scheme's drift
// algebra and weights the singular first cell correctly. Noise always uses
// the point value K((i-l)h).
enum class drift_weight_rule { point, cell_average };

struct kernel_weights {
    int steps = 0;
    double h = 0.0;
    std::vector<double> noise_w;  // noise_w[q-1] = K(q h)
    std::vector<double> drift_w;  // point: h K(q h); cell: int_{(q-1)h}^{qh} K

    static kernel_weights from_kernel(const kernel& k, double h, int steps, drift_weight_rule rule);
    static kernel_weights from_grid(const lift_grid& g, double h, int steps, drift_weight_rule rule);
};

// Discrete convolution driven by recorded coefficient values and noise:
//   X_i = forcing_i + sum_{l<i} [drift_w(i-l) b_l + noise_w(i-l) sigma_l dW_l].
// forcing is (steps+1) x n flattened. This is the independent oracle for the
// lifted scheme.
std::vector<double> direct_convolution(const kernel_weights& kw, std::span<const double> forcing,
                                       const path_driver& drv);

struct direct_config {
    double T = 1.0;
    double h = 1.0 / 256.0;
    int n_paths = 1;
    std::uint64_t seed = 0;
    int threads = 1;
    drift_weight_rule rule = drift_weight_rule::point;
    bool record_driver = false;
    std::string seed_tag = "direct-path";
    int max_steps = 1 << 14;  // O(steps^2) cost cap
};

// Direct O(steps^2) scheme with left-point coefficient evaluation; the kernel
// is never evaluated at lag zero. forcing is (steps+1) x n flattened.
path_ensemble simulate_direct(const kernel_weights& kw, const coefficient_pair& pair,
                              std::span<const double> forcing, const direct_config& cfg);

// Forcing helpers.
std::vector<double> zero_forcing(int steps, int n);
// x(t_i) = K(t_i) x0 (x(0) entry uses the first positive lag value K(h) only
// for i = 0 when the kernel is singular; callers that need t = 0 exactly
// should pass a regular kernel).
std::vector<double> kernel_multiple_forcing(const kernel& k, double h, int steps, double x0);
std::vector<double> grid_kernel_multiple_forcing(const lift_grid& g, double h, int steps, double x0);

// Example-style closed-form branch of the deterministic fractional equation
// with drift |x|^beta sign(x):
//   X_t = C (t - t0)^{alpha/(1-beta)} for t > t0, 0 otherwise,
//   C = (beta Gamma(alpha beta/(1-beta)) / Gamma(alpha/(1-beta)))^{1/(1-beta)}.
double closed_form_branch_constant(double alpha, double beta);
double closed_form_solution(double alpha, double beta, double t0, double t);

// Substitute the closed form into the discrete convolution (cell-average
// weights) and return max_i |X_i - conv_i|; decreases as h decreases.
double residual_check(double alpha, double beta, double t0, double T, double h);

}  // namespace sve
