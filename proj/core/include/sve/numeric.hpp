#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace sve {

// phi1(z) = (1 - e^{-z})/z with the removable singularity filled in; the
// exact one-step integral factor of the Ornstein-Uhlenbeck semigroup.
inline double phi1(double z) {
    if (z == 0.0) {
        return 1.0;
    }
    return -std::expm1(-z) / z;
}

// Row-major dense matrix, small dimensions (coefficient outputs sigma(x)).
struct matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    matrix() = default;
    matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    double frobenius_norm() const {
        double s = 0.0;
        for (double x : a) {
            s += x * x;
        }
        return std::sqrt(s);
    }
};

inline double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += x[i] * y[i];
    }
    return s;
}

inline double squared_norm(std::span<const double> x) { return dot(x, x); }

// Cholesky factorization of a symmetric positive definite matrix, in place.
// Returns false when a pivot is not strictly positive.
bool cholesky(matrix& a);

// Solve A x = b with the Cholesky factor produced above.
std::vector<double> cholesky_solve(const matrix& chol, std::span<const double> b);

// Smallest eigenvalue of a small symmetric matrix (n <= 3 closed forms,
// bisection on the characteristic polynomial otherwise).
double smallest_eigenvalue_spd(const matrix& a);

}  // namespace sve
