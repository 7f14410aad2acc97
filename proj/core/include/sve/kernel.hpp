#pragma once

#include <span>
#include <string>
#include <vector>

#include "sve/errors.hpp"
#include "sve/modulus.hpp"

namespace sve {

struct atom {
    double mass;
    double theta;
};

// Bernstein measure of a completely monotone kernel K(t) = int e^{-theta t} mu(dtheta).
// Four built-in shapes: discrete atoms, the fractional-kernel density
// theta^{-alpha}/(Gamma(alpha)Gamma(1-alpha)) on (0,inf), the shifted Gamma-kernel
// density (theta-beta)^{-alpha}/(Gamma(alpha)Gamma(1-alpha)) on (beta,inf), and the
// heavy-tail density theta^{-1/2} (log theta)^{-2} on [2,inf) used as a boundary
// example of the weighted-mass assumption.
class bernstein_measure {
public:
    enum class kind { atomic, fractional, gamma, log_example };

    static bernstein_measure atomic(std::vector<atom> atoms);
    static bernstein_measure fractional(double alpha);
    static bernstein_measure gamma(double alpha, double beta);
    static bernstein_measure log_example();

    kind type() const noexcept { return kind_; }
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    const std::vector<atom>& atoms() const noexcept { return atoms_; }

    bool finite_mass() const noexcept { return kind_ == kind::atomic; }
    double total_mass() const;  // throws divergence_error unless finite
    double support_lower() const noexcept;
    double density(double theta) const;  // density kinds only
    // Algebraic singularity exponent of the density at support_lower (0 if none).
    double left_singularity() const noexcept;

    std::string describe() const;

private:
    bernstein_measure() = default;
    kind kind_ = kind::atomic;
    double alpha_ = 0.0;
    double beta_ = 0.0;
    std::vector<atom> atoms_;
};

// Regularity weight r: non-increasing, 1 ∧ theta^{-1/2} <= r <= 1.
// Implemented family: r(theta) = 1 ∧ theta^{-eta} with eta in (0, 1/2],
// plus the identity weight r == 1 for regular kernels.
class regularity_weight {
public:
    static regularity_weight identity();
    static regularity_weight power(double eta);

    double operator()(double theta) const;
    // Flattened weight r(m ∨ theta)/r(m); requires m >= 1.
    double r_m(double m, double theta) const;
    // 1 - r_m(theta), computed via expm1 so the cancellation near theta = m
    // never degrades the eps_m integrands.
    double one_minus_r_m(double m, double theta) const;

    bool is_identity() const noexcept { return identity_; }
    double eta() const noexcept { return eta_; }

private:
    regularity_weight() = default;
    bool identity_ = true;
    double eta_ = 0.0;
};

// Default eta for fractional/gamma kernels: min(1/2, 1.5 (1-alpha)), which
// always lies in the admissible range (1-alpha, 1/2].
double default_eta(double alpha);

// Closed forms for the fractional kernel (used as oracles against quadrature):
//   R_m   = [Gamma(a)Gamma(1-a)]^{-1} eta/((1-a)(a+eta-1)) m^{1-a}
//   eps_m = [Gamma(a)Gamma(1-a)]^{-1} 2 eta^2/(a(a-eta)(a+eta)) m^{-a}
double fractional_R_m_closed_form(double alpha, double eta, double m);
double fractional_eps_m_closed_form(double alpha, double eta, double m);

class kernel {
public:
    // Certifies the weighted-mass assumption int r dmu < inf numerically at
    // construction; throws divergence_error otherwise.
    kernel(bernstein_measure mu, regularity_weight r);

    static kernel fractional(double alpha);
    static kernel fractional(double alpha, double eta);
    static kernel gamma(double alpha, double beta);
    static kernel gamma(double alpha, double beta, double eta);
    static kernel exponential_sum(std::vector<atom> atoms);
    static kernel log_example();

    const bernstein_measure& measure() const noexcept { return mu_; }
    const regularity_weight& weight() const noexcept { return r_; }
    bool regular() const noexcept { return mu_.finite_mass(); }

    // K(t) for t > 0; closed form where available, quadrature otherwise.
    double operator()(double t) const;

    double assumption_integral() const noexcept { return assumption_integral_; }
    double R_m(double m) const;
    double eps_m(double m) const;

    std::string describe() const;

private:
    bernstein_measure mu_;
    regularity_weight r_;
    double assumption_integral_ = 0.0;
};

struct balance_report {
    bool singular_mode = false;
    // m-levels (singular) or delta-levels (regular) with the tested ratio:
    // R_m rho_sigma(eps_m^2)/eps_m, resp. rho_sigma(delta^2)/delta.
    std::vector<double> levels;
    std::vector<double> ratios;
    double tail_slope = 0.0;
    bool satisfied = false;
    std::string detail;
};

// Balance condition between kernel singularity and diffusion modulus.
// An empty m_sequence selects the default ladder {1, 10, ..., 1e8}
// (singular kernels) or {1, 1/2, ..., 2^-30} (regular kernels).
balance_report check_balance(const kernel& k, const modulus_spec& rho_sigma,
                             std::span<const double> m_sequence = {});

}  // namespace sve
