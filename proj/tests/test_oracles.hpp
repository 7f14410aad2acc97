#pragma once

// Test-only oracle routines, independent of the library's implementation
// paths: a high-precision Gamma function (Spouge approximation in long
// double) and an adaptive Simpson integrator. Expected values in tests are
// frozen from these, never from the code under test.

#include <cmath>
#include <functional>

namespace oracle {

// Spouge's approximation with a = 18, long double arithmetic; accurate to
// well below 1e-15 relative on (0, 30).
inline long double gamma_ld(long double x) {
    constexpr int a = 18;
    if (x < 0.5L) {
        // reflection
        const long double pi = 3.14159265358979323846264338327950288L;
        return pi / (std::sin(pi * x) * gamma_ld(1.0L - x));
    }
    x -= 1.0L;
    long double sum = std::sqrt(2.0L * 3.14159265358979323846264338327950288L);
    long double sign = 1.0L;
    for (int k = 1; k < a; ++k) {
        long double fact = 1.0L;
        for (int i = 1; i < k; ++i) {
            fact *= i;
        }
        const long double ck = sign * std::pow(static_cast<long double>(a - k), k - 0.5L) *
                               std::exp(static_cast<long double>(a - k)) / fact;
        sum += ck / (x + k);
        sign = -sign;
    }
    return sum * std::pow(x + a, x + 0.5L) * std::exp(-(x + a));
}

inline double gamma_fn(double x) { return static_cast<double>(gamma_ld(x)); }

// Adaptive Simpson on [a, b].
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int depth = 60) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

}  // namespace oracle
