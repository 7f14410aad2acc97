#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sve/modulus.hpp"
#include "sve/numeric.hpp"

namespace sve {

// Drift/diffusion pair (b, sigma) with declared modulus envelopes and
// ellipticity constant. Evaluation must be pure; pairs are immutable and
// freely shared across simulation threads.
struct coefficient_pair {
    int n = 1;  // state dimension
    int d = 1;  // noise dimension
    std::function<void(const double* x, double* out)> drift;      // R^n -> R^n
    std::function<void(const double* x, double* out)> diffusion;  // R^n -> R^{n x d}, row-major
    modulus_spec rho_b = modulus_spec::lipschitz(0.0);
    modulus_spec rho_sigma = modulus_spec::lipschitz(0.0);
    double c_ue = 0.0;  // 0 means no ellipticity claim
    std::string name;

    std::vector<double> b(const std::vector<double>& x) const;
    matrix sigma(const std::vector<double>& x) const;
};

// c_LG = max{|b(0)| + 1 + sqrt(rho_b(1)), |sigma(0)| + 1 + sqrt(rho_sigma(1))};
// both b and sigma then satisfy |phi(x)| <= c_LG (1 + |x|).
double linear_growth_constant(const coefficient_pair& pair);

// Radial clamp onto the closed ball of radius k. Agrees with the original
// inside the ball; moduli and ellipticity carry over (the clamp is the
// 1-Lipschitz nearest-point projection).
coefficient_pair truncate(const coefficient_pair& pair, double k);

struct mollify_result {
    coefficient_pair pair;
    double bandwidth_b = 0.0;
    double bandwidth_sigma = 0.0;
    double sup_error_bound = 0.0;  // sqrt(delta0 / 2)
};

// Smooth both coefficients by averaging against a compactly supported bump,
// with bandwidths certified from the moduli so that
// sup |phi_k - phi|^2 <= delta0 / 2. Supported for n <= 2.
mollify_result mollify(const coefficient_pair& pair, double delta0);

// Largest bandwidth h with rho(dim * h^2) <= delta0/2 (bisection); the value
// mollify would use for a coefficient with this modulus in R^dim.
double mollify_bandwidth(const modulus_spec& rho, int dim, double delta0);

// --- registry -------------------------------------------------------------
// Coefficients enter the system only through named registry entries; the
// config layer resolves names + parameters to a pair.

using param_map = std::map<std::string, double>;

coefficient_pair make_pair_from_registry(const std::string& drift_name, const param_map& drift_params,
                                         const std::string& sigma_name, const param_map& sigma_params);

std::vector<std::string> registered_drift_names();
std::vector<std::string> registered_sigma_names();

// --- sampled validation ----------------------------------------------------

// Largest violation of |phi(x) - phi(y)|^2 <= rho(|x - y|^2) over random
// pairs in [-box, box]^n; returns the max of lhs - rhs (<= 0 when the declared
// modulus dominates).
double modulus_violation(const std::function<void(const double*, double*)>& phi, int n, int out_dim,
                         const modulus_spec& rho, double box, int samples, std::uint64_t seed);

// Smallest sampled eigenvalue of sigma(x) sigma(x)^T over a grid plus random
// draws in [-box, box]^n.
double sampled_min_ellipticity(const coefficient_pair& pair, double box, int samples,
                               std::uint64_t seed);

}  // namespace sve
