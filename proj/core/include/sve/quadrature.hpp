#pragma once

#include <functional>

namespace sve {

struct quad_result {
    double value = 0.0;
    double abs_error = 0.0;
    long evaluations = 0;
    bool converged = false;

    quad_result& operator+=(const quad_result& o) {
        value += o.value;
        abs_error += o.abs_error;
        evaluations += o.evaluations;
        converged = converged && o.converged;
        return *this;
    }
};

struct quad_options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_intervals = 2000;
};

using real_fn = std::function<double(double)>;

// Adaptive Gauss-Kronrod (G7,K15) on a finite interval.
quad_result integrate(const real_fn& f, double a, double b, const quad_options& opt = {});

// Same, after the substitution theta = e^v. Suited to integrands that are
// locally power-law over ranges spanning many decades. Requires 0 < a < b.
quad_result integrate_log(const real_fn& f, double a, double b, const quad_options& opt = {});

// Integral of g(theta) * (theta - a)^(-s) over [a, b] with s in (0, 1) and g
// bounded near a. The algebraic endpoint singularity is removed by the
// substitution u = (theta - a)^(1-s).
quad_result integrate_left_singular(const real_fn& g, double a, double b, double s,
                                    const quad_options& opt = {});

}  // namespace sve
