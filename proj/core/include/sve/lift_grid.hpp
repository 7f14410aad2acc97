#pragma once

#include <span>
#include <vector>

#include "sve/kernel.hpp"

namespace sve {

// Truncation level m in [1, inf]. Infinity is a distinguished value rather
// than a float so weight evaluation never does arithmetic on inf.
struct truncation {
    static truncation infinite() { return truncation{true, 0.0}; }
    static truncation at(double m) {
        if (!(m >= 1.0)) {
            throw std::invalid_argument("truncation level requires m >= 1");
        }
        return truncation{false, m};
    }

    bool is_infinite = true;
    double m = 0.0;

private:
    truncation(bool inf, double level) : is_infinite(inf), m(level) {}
};

// State of the lifted equation on a grid: one R^n value per node, flattened
// row-major as v[node * dim + component]. A value type owned per path.
struct lift_state {
    int dim = 1;
    std::vector<double> v;

    static lift_state zero(std::size_t nodes, int dim);
    static lift_state constant(std::size_t nodes, std::span<const double> x);
    std::size_t nodes() const { return dim > 0 ? v.size() / dim : 0; }
};

struct discretize_options {
    // Fold the measure's mass below theta_min into the first cell so the
    // discrete kernel conserves total (weighted) mass.
    bool fold_head_mass = true;
};

// Quadrature discretization of a Bernstein measure: N geometric cells on
// [theta_min, theta_max], cell masses as weights and density barycenters as
// nodes. Atomic measures pass through unchanged.
class lift_grid {
public:
    static lift_grid from_kernel(const kernel& k, int n_nodes, double theta_min,
                                 double theta_max, const discretize_options& opt = {});
    // Grid over an explicit discrete measure (strictly increasing nodes,
    // positive weights); used for derived measures such as r_M dmu.
    static lift_grid from_nodes(const regularity_weight& r, std::vector<double> thetas,
                                std::vector<double> weights);

    std::size_t size() const { return theta_.size(); }
    std::span<const double> thetas() const { return theta_; }
    std::span<const double> weights() const { return weight_; }
    std::span<const double> r_values() const { return r_theta_; }
    const regularity_weight& weight_function() const { return r_; }

    double r_m(const truncation& t, double theta) const;

    // Discrete measure functionals.
    double R_m(const truncation& t) const;    // sum_j w_j r_m(theta_j)
    double eps_m(const truncation& t) const;  // sum_j w_j (1-r_m)^2 / (theta_j r_m)

    // Discrete kernel K_N(t) = sum_j w_j e^{-theta_j t}.
    double kernel_value(double t) const;
    // Integral of K_N over the cell [(q-1)h, qh]; exact via (1-e^{-z})/z factors.
    double kernel_cell_integral(int q, double h) const;

private:
    lift_grid() = default;
    std::vector<double> theta_, weight_, r_theta_;
    regularity_weight r_ = regularity_weight::identity();
};

// mu_m[y] = sum_j w_j r_m(theta_j) y_j (componentwise in R^n).
std::vector<double> integral_map(const lift_grid& g, const lift_state& y, const truncation& t);

struct state_norms {
    double h_mu = 0.0;  // (sum w r |y|^2)^{1/2}
    double m = 0.0;     // (sum w r_m |y|^2)^{1/2}
    double v_mu = 0.0;  // (sum w (theta+1) r |y|^2)^{1/2}
};
state_norms norms(const lift_grid& g, const lift_state& y, const truncation& t);

// sum_j w_j theta_j r_m(theta_j) |y_j|^2; the V-type quadratic form that
// bounds |mu_M[y] - mu_m[y]|^2 together with eps_m.
double theta_rm_quadratic(const lift_grid& g, const lift_state& y, const truncation& t);

// (K y)(t) = sum_j w_j e^{-theta_j t} y_j on each t of the grid; output is
// flattened as x[t_index * dim + component].
std::vector<double> reconstruct_forcing(const lift_grid& g, const lift_state& y,
                                        std::span<const double> t_grid);

struct kernel_error_row {
    double t, k_exact, k_grid, rel_err;
};
struct kernel_error_report {
    double max_rel_err = 0.0;
    std::vector<kernel_error_row> rows;
};
kernel_error_report kernel_error(const lift_grid& g, const kernel& k,
                                 std::span<const double> t_grid);

}  // namespace sve
