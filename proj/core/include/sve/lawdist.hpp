#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sve/see_sim.hpp"

namespace sve {

struct marginal_distance_result {
    double ks = 0.0;
    double wasserstein1 = 0.0;
};

// Empirical two-sample Kolmogorov-Smirnov statistic and 1-Wasserstein
// distance between scalar samples.
marginal_distance_result marginal_distance(std::span<const double> a, std::span<const double> b);

// Asymptotic two-sample KS critical value c(alpha) sqrt((n+m)/(n m)) with
// c(alpha) = sqrt(-ln(alpha/2)/2).
double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha);

// X_t samples (one component) at a grid time; throws when t is off-grid.
// Aborted paths are skipped.
std::vector<double> marginal_samples(const path_ensemble& ens, double t, int component);

// Energy distance between path laws under the discrete L2(0,T) metric
// d(x, y) = (sum_i |x_i - y_i|^2 h)^{1/2}. Nonnegative; zero in population
// exactly for equal laws.
double energy_distance_paths(const path_ensemble& a, const path_ensemble& b);

struct permutation_test_result {
    double statistic = 0.0;
    double p_value = 1.0;
    int permutations = 0;
};

// Permutation test of law equality built on the energy distance, with a
// fixed derived seed for reproducible decisions.
permutation_test_result energy_permutation_test(const path_ensemble& a, const path_ensemble& b,
                                                int n_permutations, std::uint64_t seed);

}  // namespace sve
