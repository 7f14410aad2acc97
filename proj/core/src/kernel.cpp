#include "sve/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sve/quadrature.hpp"

namespace sve {
namespace {

constexpr double kThetaSplitMax = 1e8;   // analytic power tails beyond this point
constexpr double kTailReliability = 1e-3;

double gamma_product(double alpha) {
    // Gamma(alpha) * Gamma(1 - alpha) = pi / sin(pi alpha)
    return std::tgamma(alpha) * std::tgamma(1.0 - alpha);
}

struct power_term {
    double c;
    double p;
};

// Exact/near-exact tail integrals int_X^inf theta^p dmu for density measures.
// Returns the value and an upper bound on its own error.
struct tail_value {
    double value = 0.0;
    double uncertainty = 0.0;
};

tail_value fractional_tail(double alpha, double X, double p) {
    const double q = p - alpha;
    if (q >= -1.0) {
        throw divergence_error("fractional power tail",
                               "exponent p - alpha = " + std::to_string(q) + " >= -1");
    }
    tail_value t;
    t.value = std::pow(X, q + 1.0) / (-(q + 1.0)) / gamma_product(alpha);
    t.uncertainty = 0.0;
    return t;
}

tail_value gamma_tail(double alpha, double beta, double X, double p) {
    if (p - alpha >= -1.0) {
        throw divergence_error("gamma power tail",
                               "exponent p - alpha = " + std::to_string(p - alpha) + " >= -1");
    }
    // int_X^inf theta^p (theta-beta)^{-alpha} dtheta, expanded binomially in
    // beta/u around u = theta - beta. Valid for X - beta > beta.
    const double U = X - beta;
    double coeff = 1.0;  // binom(p, k) beta^k
    double sum = 0.0;
    double last = std::numeric_limits<double>::infinity();
    int k = 0;
    for (; k < 200; ++k) {
        const double expo = p - k - alpha;
        const double term = coeff * std::pow(U, expo + 1.0) / (-(expo + 1.0));
        sum += term;
        last = std::abs(term);
        if (last <= std::abs(sum) * 1e-16 + 1e-300) {
            break;
        }
        coeff *= (p - k) / (k + 1.0) * beta;
    }
    tail_value t;
    t.value = sum / gamma_product(alpha);
    t.uncertainty = last / gamma_product(alpha);
    return t;
}

tail_value log_example_tail(double X, double p) {
    // int_X^inf theta^{p - 1/2} (log theta)^{-2} dtheta
    const double s = -(p + 0.5);
    if (s < 0.0) {
        throw divergence_error("log-example power tail",
                               "exponent p = " + std::to_string(p) + " > -1/2");
    }
    tail_value t;
    const double L = std::log(X);
    if (s == 0.0) {
        t.value = 1.0 / L;  // exact
        return t;
    }
    if (s < 0.05) {
        throw divergence_error("log-example power tail",
                               "tail exponent too close to the divergence boundary");
    }
    // v = log theta: int_L^inf e^{-s v} v^{-2} dv; integrand decays fast.
    const double v_max = L + 60.0 / s;
    auto f = [s](double v) { return std::exp(-s * v) / (v * v); };
    quad_result q = integrate(f, L, v_max, {1e-12, 1e-300, 4000});
    t.value = q.value;
    t.uncertainty = q.abs_error + std::exp(-s * v_max) / v_max;
    return t;
}

tail_value power_tail(const bernstein_measure& mu, double X, double p) {
    switch (mu.type()) {
        case bernstein_measure::kind::fractional:
            return fractional_tail(mu.alpha(), X, p);
        case bernstein_measure::kind::gamma:
            return gamma_tail(mu.alpha(), mu.beta(), X, p);
        case bernstein_measure::kind::log_example:
            return log_example_tail(X, p);
        case bernstein_measure::kind::atomic:
            break;
    }
    throw std::logic_error("power_tail on atomic measure");
}

// Integrate f(theta) dmu over one finite interval [a, b] of a density
// measure, picking a substitution suited to the endpoint behaviour.
quad_result density_piece(const bernstein_measure& mu, const real_fn& f, double a, double b) {
    const quad_options opt{1e-11, 1e-300, 4000};
    const double lo = mu.support_lower();
    const double s = mu.left_singularity();
    if (s > 0.0 && a <= lo * (1.0 + 1e-14) + 1e-300) {
        // Remove the (theta - lo)^{-s} factor analytically.
        auto g = [&](double theta) {
            return f(theta) * mu.density(theta) * std::pow(theta - lo, s);
        };
        return integrate_left_singular(g, lo, b, s, opt);
    }
    if (a > 0.0 && b / a > 4.0) {
        // Inline the log-substitution Jacobian and group it with the density:
        // f * (density * theta) keeps intermediates out of the subnormal range
        // when theta is very large and f itself is tiny.
        auto g = [&](double v) {
            const double theta = std::exp(v);
            return f(theta) * (mu.density(theta) * theta);
        };
        return integrate(g, std::log(a), std::log(b), opt);
    }
    auto g = [&](double theta) { return f(theta) * mu.density(theta); };
    return integrate(g, a, b, opt);
}

// Full mu-integral of a weight f with exact power-law behaviour
// f(theta) = sum_i c_i theta^{p_i} beyond every cut point. Cuts mark the
// breakpoints of f (e.g. theta = 1 and theta = m for the flattened weights).
double mu_integral(const bernstein_measure& mu, const real_fn& f,
                   std::vector<double> cuts, std::span<const power_term> tail_terms,
                   const char* name) {
    if (mu.type() == bernstein_measure::kind::atomic) {
        double sum = 0.0;
        for (const auto& [mass, theta] : mu.atoms()) {
            sum += mass * f(theta);
        }
        return sum;
    }
    const double lo = mu.support_lower();
    double max_cut = lo;
    for (double c : cuts) {
        max_cut = std::max(max_cut, c);
    }
    const double X0 = std::max({kThetaSplitMax, 100.0 * max_cut, 100.0 * (mu.beta() + 1.0)});

    cuts.push_back(lo);
    cuts.push_back(1.0);
    cuts.push_back(X0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double x, double y) { return std::abs(x - y) <= 1e-14 * (1.0 + std::abs(x)); }),
               cuts.end());
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](double c) { return c < lo || c > X0; }),
               cuts.end());
    if (cuts.empty() || cuts.front() > lo) {
        cuts.insert(cuts.begin(), lo);
    }
    if (cuts.back() < X0) {
        cuts.push_back(X0);
    }

    double finite = 0.0;
    double finite_err = 0.0;
    bool converged = true;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        quad_result q = density_piece(mu, f, cuts[i], cuts[i + 1]);
        finite += q.value;
        finite_err += q.abs_error;
        converged = converged && q.converged;
    }

    double tail = 0.0;
    double tail_unc = 0.0;
    for (const auto& [c, p] : tail_terms) {
        if (c == 0.0) {
            continue;
        }
        tail_value t = power_tail(mu, X0, p);
        tail += c * t.value;
        tail_unc += std::abs(c) * t.uncertainty;
    }

    const double total = finite + tail;
    if (!converged) {
        throw divergence_error(name, "adaptive quadrature failed to converge");
    }
    if (tail_unc > kTailReliability * std::abs(total)) {
        throw divergence_error(name, "tail correction uncertainty exceeds 1e-3 of the integral");
    }
    return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// bernstein_measure

bernstein_measure bernstein_measure::atomic(std::vector<atom> atoms) {
    if (atoms.empty()) {
        throw std::invalid_argument("atomic measure requires at least one atom");
    }
    std::sort(atoms.begin(), atoms.end(), [](const atom& a, const atom& b) { return a.theta < b.theta; });
    double prev = -1.0;
    for (const auto& [mass, theta] : atoms) {
        if (!(mass > 0.0) || !std::isfinite(mass)) {
            throw std::invalid_argument("atomic measure requires masses c_i > 0");
        }
        if (!(theta >= 0.0) || !std::isfinite(theta)) {
            throw std::invalid_argument("atomic measure requires nodes theta_i >= 0");
        }
        if (theta <= prev) {
            throw std::invalid_argument("atomic measure requires strictly increasing theta_i");
        }
        prev = theta;
    }
    bernstein_measure m;
    m.kind_ = kind::atomic;
    m.atoms_ = std::move(atoms);
    return m;
}

bernstein_measure bernstein_measure::fractional(double alpha) {
    if (!(alpha > 0.5 + 1e-6 && alpha < 1.0 - 1e-6)) {
        throw std::invalid_argument("fractional measure requires alpha in (1/2, 1); "
                                    "alpha = 1 is the atomic measure {(1, 0)}");
    }
    bernstein_measure m;
    m.kind_ = kind::fractional;
    m.alpha_ = alpha;
    return m;
}

bernstein_measure bernstein_measure::gamma(double alpha, double beta) {
    if (!(alpha > 0.5 + 1e-6 && alpha < 1.0 - 1e-6)) {
        throw std::invalid_argument("gamma measure requires alpha in (1/2, 1)");
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("gamma measure requires beta > 0");
    }
    bernstein_measure m;
    m.kind_ = kind::gamma;
    m.alpha_ = alpha;
    m.beta_ = beta;
    return m;
}

bernstein_measure bernstein_measure::log_example() {
    bernstein_measure m;
    m.kind_ = kind::log_example;
    return m;
}

double bernstein_measure::total_mass() const {
    if (kind_ != kind::atomic) {
        throw divergence_error("total mass", "measure has infinite mass (singular kernel)");
    }
    double s = 0.0;
    for (const auto& a : atoms_) {
        s += a.mass;
    }
    return s;
}

double bernstein_measure::support_lower() const noexcept {
    switch (kind_) {
        case kind::atomic:
            return atoms_.front().theta;
        case kind::fractional:
            return 0.0;
        case kind::gamma:
            return beta_;
        case kind::log_example:
            return 2.0;
    }
    return 0.0;
}

double bernstein_measure::density(double theta) const {
    switch (kind_) {
        case kind::atomic:
            throw std::logic_error("atomic measure has no density");
        case kind::fractional:
            return theta > 0.0 ? std::pow(theta, -alpha_) / gamma_product(alpha_) : 0.0;
        case kind::gamma:
            return theta > beta_ ? std::pow(theta - beta_, -alpha_) / gamma_product(alpha_) : 0.0;
        case kind::log_example: {
            if (theta < 2.0) {
                return 0.0;
            }
            const double l = std::log(theta);
            return 1.0 / (std::sqrt(theta) * l * l);
        }
    }
    return 0.0;
}

double bernstein_measure::left_singularity() const noexcept {
    switch (kind_) {
        case kind::fractional:
        case kind::gamma:
            return alpha_;
        default:
            return 0.0;
    }
}

std::string bernstein_measure::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case kind::atomic:
            os << "atomic(" << atoms_.size() << " atoms)";
            break;
        case kind::fractional:
            os << "fractional(alpha=" << alpha_ << ")";
            break;
        case kind::gamma:
            os << "gamma(alpha=" << alpha_ << ", beta=" << beta_ << ")";
            break;
        case kind::log_example:
            os << "log_example";
            break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// regularity_weight

regularity_weight regularity_weight::identity() {
    regularity_weight r;
    r.identity_ = true;
    return r;
}

regularity_weight regularity_weight::power(double eta) {
    if (!(eta > 0.0 && eta <= 0.5)) {
        throw std::invalid_argument("regularity weight requires eta in (0, 1/2]");
    }
    regularity_weight r;
    r.identity_ = false;
    r.eta_ = eta;
    return r;
}

double regularity_weight::operator()(double theta) const {
    if (!(theta >= 0.0)) {
        throw std::invalid_argument("regularity weight requires theta >= 0");
    }
    if (identity_ || theta <= 1.0) {
        return 1.0;
    }
    return std::pow(theta, -eta_);
}

double regularity_weight::r_m(double m, double theta) const {
    if (!(m >= 1.0)) {
        throw std::invalid_argument("r_m requires m >= 1");
    }
    if (identity_ || theta <= m) {
        return 1.0;
    }
    return std::pow(m / theta, eta_);
}

double regularity_weight::one_minus_r_m(double m, double theta) const {
    if (!(m >= 1.0)) {
        throw std::invalid_argument("one_minus_r_m requires m >= 1");
    }
    if (identity_ || theta <= m) {
        return 0.0;
    }
    return -std::expm1(-eta_ * std::log(theta / m));
}

double default_eta(double alpha) {
    return std::min(0.5, 1.5 * (1.0 - alpha));
}

double fractional_R_m_closed_form(double alpha, double eta, double m) {
    return eta / ((1.0 - alpha) * (alpha + eta - 1.0)) * std::pow(m, 1.0 - alpha) /
           gamma_product(alpha);
}

double fractional_eps_m_closed_form(double alpha, double eta, double m) {
    return 2.0 * eta * eta / (alpha * (alpha - eta) * (alpha + eta)) * std::pow(m, -alpha) /
           gamma_product(alpha);
}

// ---------------------------------------------------------------------------
// kernel

kernel::kernel(bernstein_measure mu, regularity_weight r) : mu_(std::move(mu)), r_(r) {
    if (!mu_.finite_mass() && r_.is_identity()) {
        throw divergence_error("assumption integral",
                               "identity weight with an infinite-mass measure");
    }
    if (mu_.type() == bernstein_measure::kind::fractional ||
        mu_.type() == bernstein_measure::kind::gamma) {
        if (!r_.is_identity() && !(r_.eta() > 1.0 - mu_.alpha())) {
            throw std::invalid_argument("weight exponent eta must exceed 1 - alpha");
        }
    }
    if (mu_.finite_mass()) {
        assumption_integral_ = [&] {
            double s = 0.0;
            for (const auto& [mass, theta] : mu_.atoms()) {
                s += mass * r_(theta);
            }
            return s;
        }();
        return;
    }
    const double eta = r_.eta();
    const power_term tail[] = {{1.0, -eta}};
    assumption_integral_ = mu_integral(
        mu_, [&](double theta) { return r_(theta); }, {1.0}, tail, "assumption integral");
}

kernel kernel::fractional(double alpha) { return fractional(alpha, default_eta(alpha)); }

kernel kernel::fractional(double alpha, double eta) {
    return kernel(bernstein_measure::fractional(alpha), regularity_weight::power(eta));
}

kernel kernel::gamma(double alpha, double beta) { return gamma(alpha, beta, default_eta(alpha)); }

kernel kernel::gamma(double alpha, double beta, double eta) {
    return kernel(bernstein_measure::gamma(alpha, beta), regularity_weight::power(eta));
}

kernel kernel::exponential_sum(std::vector<atom> atoms) {
    return kernel(bernstein_measure::atomic(std::move(atoms)), regularity_weight::identity());
}

kernel kernel::log_example() {
    return kernel(bernstein_measure::log_example(), regularity_weight::power(0.5));
}

double kernel::operator()(double t) const {
    if (!(t > 0.0)) {
        throw std::invalid_argument("kernel evaluation requires t > 0");
    }
    switch (mu_.type()) {
        case bernstein_measure::kind::atomic: {
            double s = 0.0;
            for (const auto& [mass, theta] : mu_.atoms()) {
                s += mass * std::exp(-theta * t);
            }
            return s;
        }
        case bernstein_measure::kind::fractional:
            return std::pow(t, mu_.alpha() - 1.0) / std::tgamma(mu_.alpha());
        case bernstein_measure::kind::gamma:
            return std::exp(-mu_.beta() * t) * std::pow(t, mu_.alpha() - 1.0) /
                   std::tgamma(mu_.alpha());
        case bernstein_measure::kind::log_example: {
            // v = log theta; the integrand decays like exp(-t e^v) once
            // e^v > 1/t, so a finite window suffices.
            const double lo = std::log(2.0);
            const double hi = std::max(lo + 1.0, std::log(80.0 / t + 4.0));
            auto f = [t](double v) {
                const double theta = std::exp(v);
                return std::exp(0.5 * v - theta * t) / (v * v);
            };
            return integrate(f, lo, hi, {1e-12, 1e-300, 4000}).value;
        }
    }
    return 0.0;
}

double kernel::R_m(double m) const {
    if (!(m >= 1.0)) {
        throw std::invalid_argument("R_m requires m >= 1");
    }
    if (mu_.type() == bernstein_measure::kind::atomic) {
        double s = 0.0;
        for (const auto& [mass, theta] : mu_.atoms()) {
            s += mass * r_.r_m(m, theta);
        }
        return s;
    }
    const double eta = r_.eta();
    const power_term tail[] = {{std::pow(m, eta), -eta}};
    return mu_integral(
        mu_, [&](double theta) { return r_.r_m(m, theta); }, {m}, tail, "R_m");
}

double kernel::eps_m(double m) const {
    if (!(m >= 1.0)) {
        throw std::invalid_argument("eps_m requires m >= 1");
    }
    if (r_.is_identity()) {
        return 0.0;
    }
    auto integrand = [&](double theta) {
        const double one_minus = r_.one_minus_r_m(m, theta);
        if (one_minus <= 0.0 || theta <= 0.0) {
            return 0.0;
        }
        return one_minus * one_minus / (theta * (1.0 - one_minus));
    };
    if (mu_.type() == bernstein_measure::kind::atomic) {
        double s = 0.0;
        for (const auto& [mass, theta] : mu_.atoms()) {
            s += mass * integrand(theta);
        }
        return s;
    }
    // On (m, inf): (1 - (m/theta)^eta)^2 theta^{eta-1} m^{-eta} expands into
    // three exact power-law tail terms. The integrand vanishes on [0, m].
    const double eta = r_.eta();
    const power_term tail[] = {
        {std::pow(m, -eta), eta - 1.0},
        {-2.0, -1.0},
        {std::pow(m, eta), -eta - 1.0},
    };
    return mu_integral(mu_, integrand, {m}, tail, "eps_m");
}

std::string kernel::describe() const {
    std::ostringstream os;
    os << mu_.describe();
    if (r_.is_identity()) {
        os << ", r = 1";
    } else {
        os << ", r = 1 ∧ theta^-" << r_.eta();
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// balance condition

balance_report check_balance(const kernel& k, const modulus_spec& rho_sigma,
                             std::span<const double> m_sequence) {
    balance_report rep;
    rep.singular_mode = !k.regular();

    std::vector<double> levels(m_sequence.begin(), m_sequence.end());
    if (levels.empty()) {
        if (rep.singular_mode) {
            for (int i = 0; i <= 8; ++i) {
                levels.push_back(std::pow(10.0, i));
            }
        } else {
            for (int i = 0; i <= 30; ++i) {
                levels.push_back(std::pow(2.0, -i));
            }
        }
    }
    rep.levels = levels;

    for (double level : levels) {
        double ratio;
        if (rep.singular_mode) {
            if (!(level >= 1.0)) {
                throw std::invalid_argument("singular-mode balance levels must satisfy m >= 1");
            }
            const double eps = k.eps_m(level);
            const double R = k.R_m(level);
            ratio = eps > 0.0 ? R * rho_sigma(eps * eps) / eps
                              : 0.0;
        } else {
            if (!(level > 0.0)) {
                throw std::invalid_argument("regular-mode balance levels must satisfy delta > 0");
            }
            ratio = rho_sigma(level * level) / level;
        }
        rep.ratios.push_back(ratio);
    }

    const std::size_t n = rep.ratios.size();
    std::ostringstream detail;
    if (n < 2) {
        rep.satisfied = rep.ratios.empty() ? false : rep.ratios.front() == 0.0;
        detail << "sequence too short for a slope estimate";
        rep.detail = detail.str();
        return rep;
    }

    const double q_last = rep.ratios[n - 1];
    const double q_prev = rep.ratios[n - 2];
    const double l_last = rep.levels[n - 1];
    const double l_prev = rep.levels[n - 2];
    if (q_last == 0.0) {
        rep.satisfied = true;
        rep.tail_slope = -std::numeric_limits<double>::infinity();
        detail << "ratio vanishes at the final level";
        rep.detail = detail.str();
        return rep;
    }
    rep.tail_slope = std::log(q_last / q_prev) / std::log(l_last / l_prev);

    if (rep.singular_mode) {
        // liminf_m R_m rho(eps_m^2)/eps_m = 0 iff the ratio keeps decaying
        // along m -> inf: negative tail slope in m.
        rep.satisfied = rep.tail_slope < -1e-3 && q_last < q_prev;
        detail << "liminf_m R_m rho_sigma(eps_m^2)/eps_m: tail slope " << rep.tail_slope
               << " over m in [" << l_prev << ", " << l_last << "], last ratio " << q_last;
    } else {
        // liminf_{delta->0} rho(delta^2)/delta = 0 iff the ratio decays as
        // delta decreases: positive slope with respect to delta.
        rep.satisfied = rep.tail_slope > 1e-3 && q_last < q_prev;
        detail << "liminf_delta rho_sigma(delta^2)/delta: tail slope " << rep.tail_slope
               << " over delta in [" << l_last << ", " << l_prev << "], last ratio " << q_last;
    }
    rep.detail = detail.str();
    return rep;
}

}  // namespace sve
