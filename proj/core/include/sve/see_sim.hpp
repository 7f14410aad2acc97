#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sve/coefficients.hpp"
#include "sve/lift_grid.hpp"

namespace sve {

// Exact one-step Ornstein-Uhlenbeck factors for a fixed (grid, h):
// decay_j = e^{-theta_j h}, drift_w_j = h phi1(theta_j h).
struct step_factors {
    std::vector<double> decay;
    std::vector<double> drift_w;

    static step_factors make(const lift_grid& g, double h);
};

// One exponential-Euler step of the lifted equation. The Brownian increment
// is common across nodes; the stochastic term carries the same decay factor
// as the node state, which preserves the exact discrete correspondence with
// the kernel-convolution scheme.
void ou_step(const step_factors& f, lift_state& y, std::span<const double> b_val,
             const matrix& sigma_val, std::span<const double> dw);

// Recorded inputs of one path: coefficient values and noise per step. Enough
// to replay the recursion or to drive the direct convolution scheme.
struct path_driver {
    int n = 1;
    int d = 1;
    int steps = 0;
    std::vector<double> b_vals;      // steps x n
    std::vector<double> sigma_vals;  // steps x (n*d)
    std::vector<double> dw;          // steps x d
};

struct sim_config {
    double T = 1.0;
    double h = 1.0 / 256.0;
    int n_paths = 1;
    std::uint64_t seed = 0;
    truncation trunc = truncation::infinite();  // output map mu_M
    int threads = 1;
    bool record_driver = false;
    bool record_states = false;  // keep (steps+1) x nodes x n node values per path
    std::string seed_tag = "see-path";
};

struct lift_path_record {
    bool ok = true;
    std::string diagnostic;
    std::vector<double> x;  // (steps+1) x n, X_i = mu_M[Y_i]
    double sup_h_norm2 = 0.0;   // sup_i ||Y_i||_{H_mu}^2
    double v_norm_integral = 0.0;  // sum_i ||Y_i||_{V_mu}^2 h (left rule)
    path_driver driver;     // populated when record_driver is set
    std::vector<double> states;  // populated when record_states is set
    lift_state terminal;    // Y at T (always kept; one state per path is cheap)
};

struct path_ensemble {
    double T = 0.0;
    double h = 0.0;
    int steps = 0;
    int n = 1;
    std::vector<double> times;  // steps + 1 entries
    std::vector<lift_path_record> paths;
    int aborted = 0;
};

// Seeded, reproducible ensemble of lifted paths; coefficients evaluated at
// the left endpoint X_i = mu_M[Y_i]. Paths whose coefficients return
// non-finite values are aborted, excluded from statistics and counted.
path_ensemble simulate(const lift_grid& g, const coefficient_pair& pair, const lift_state& y0,
                       const sim_config& cfg);

// Rebuild the lift path from externally supplied coefficient values and
// noise. Same recursion as simulate; used to verify the discrete
// SVE <-> lifted-equation correspondence.
lift_path_record lift_from_sve(const lift_grid& g, const path_driver& drv, const lift_state& y0,
                               double h, const truncation& out_map);

// Run fn(path_index) over 0..count-1 on the requested number of threads.
// Output slots are owned per index, so results never depend on scheduling.
void parallel_paths(int count, int threads, const std::function<void(int)>& fn);

}  // namespace sve
