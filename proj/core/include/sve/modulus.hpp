#pragma once

#include <string>
#include <utility>
#include <vector>

namespace sve {

// Modulus-of-continuity envelope rho for a coefficient phi, in the squared
// calculus |phi(x) - phi(x')|^2 <= rho(|x - x'|^2). rho is non-decreasing,
// concave, and rho(0) = 0. Three families are supported:
//   lipschitz(L):       rho(t) = L^2 t
//   hoelder(gamma, c):  rho(t) = 2 c^2 (t^gamma + t), gamma in (0,1]
//   concave_table(pts): piecewise-linear concave interpolant through (0,0)
class modulus_spec {
public:
    enum class family { lipschitz, hoelder, concave_table };

    static modulus_spec lipschitz(double L);
    static modulus_spec hoelder(double gamma, double c);
    static modulus_spec concave_table(std::vector<std::pair<double, double>> points);

    double operator()(double t) const;

    family kind() const noexcept { return family_; }
    double lipschitz_constant() const noexcept { return L_; }
    double hoelder_exponent() const noexcept { return gamma_; }
    double hoelder_constant() const noexcept { return c_; }
    const std::vector<std::pair<double, double>>& table() const noexcept { return table_; }

    // Largest t0 known from the family data; table lookups below the first
    // breakpoint are not trusted for certification purposes.
    double smallest_certified_level() const;

    std::string describe() const;

private:
    modulus_spec() = default;
    family family_ = family::lipschitz;
    double L_ = 0.0;
    double gamma_ = 1.0;
    double c_ = 0.0;
    std::vector<std::pair<double, double>> table_;
};

}  // namespace sve
