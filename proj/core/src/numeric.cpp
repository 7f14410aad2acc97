#include "sve/numeric.hpp"

#include <algorithm>

namespace sve {

bool cholesky(matrix& a) {
    const int n = a.rows;
    if (n != a.cols) {
        throw std::invalid_argument("cholesky requires a square matrix");
    }
    for (int j = 0; j < n; ++j) {
        double d = a(j, j);
        for (int k = 0; k < j; ++k) {
            d -= a(j, k) * a(j, k);
        }
        if (!(d > 0.0)) {
            return false;
        }
        a(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) {
                s -= a(i, k) * a(j, k);
            }
            a(i, j) = s / a(j, j);
        }
    }
    return true;
}

std::vector<double> cholesky_solve(const matrix& chol, std::span<const double> b) {
    const int n = chol.rows;
    std::vector<double> x(b.begin(), b.end());
    for (int i = 0; i < n; ++i) {
        double s = x[i];
        for (int k = 0; k < i; ++k) {
            s -= chol(i, k) * x[k];
        }
        x[i] = s / chol(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int k = i + 1; k < n; ++k) {
            s -= chol(k, i) * x[k];
        }
        x[i] = s / chol(i, i);
    }
    return x;
}

double smallest_eigenvalue_spd(const matrix& a_in) {
    const int n = a_in.rows;
    if (n != a_in.cols) {
        throw std::invalid_argument("smallest_eigenvalue_spd requires a square matrix");
    }
    if (n == 1) {
        return a_in(0, 0);
    }
    if (n == 2) {
        const double tr = a_in(0, 0) + a_in(1, 1);
        const double diff = a_in(0, 0) - a_in(1, 1);
        const double disc = std::sqrt(diff * diff + 4.0 * a_in(0, 1) * a_in(1, 0));
        return 0.5 * (tr - disc);
    }
    // Cyclic Jacobi sweeps; plenty for the small matrices used here.
    matrix a = a_in;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                off += a(p, q) * a(p, q);
            }
        }
        if (off < 1e-30) {
            break;
        }
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) {
                    continue;
                }
                const double tau = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    double mn = a(0, 0);
    for (int i = 1; i < n; ++i) {
        mn = std::min(mn, a(i, i));
    }
    return mn;
}

}  // namespace sve
