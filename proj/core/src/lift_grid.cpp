#include "sve/lift_grid.hpp"

#include <algorithm>
#include <cmath>

#include "sve/numeric.hpp"
#include "sve/quadrature.hpp"

namespace sve {
namespace {

double gamma_product(double alpha) { return std::tgamma(alpha) * std::tgamma(1.0 - alpha); }

// Exact cell mass and first moment of the density measures; quadrature for
// the log-example density.
struct cell_moments {
    double mass = 0.0;
    double moment = 0.0;
};

cell_moments density_cell(const bernstein_measure& mu, double a, double b) {
    cell_moments cm;
    switch (mu.type()) {
        case bernstein_measure::kind::fractional: {
            const double al = mu.alpha();
            const double gg = gamma_product(al);
            cm.mass = (std::pow(b, 1.0 - al) - std::pow(a, 1.0 - al)) / ((1.0 - al) * gg);
            cm.moment = (std::pow(b, 2.0 - al) - std::pow(a, 2.0 - al)) / ((2.0 - al) * gg);
            return cm;
        }
        case bernstein_measure::kind::gamma: {
            const double al = mu.alpha();
            const double be = mu.beta();
            const double gg = gamma_product(al);
            const double ua = std::max(0.0, a - be);
            const double ub = b - be;
            auto up = [](double u, double p) { return u > 0.0 ? std::pow(u, p) : 0.0; };
            cm.mass = (up(ub, 1.0 - al) - up(ua, 1.0 - al)) / ((1.0 - al) * gg);
            // int (u + beta) u^{-al} du
            cm.moment = ((up(ub, 2.0 - al) - up(ua, 2.0 - al)) / (2.0 - al) +
                         be * (up(ub, 1.0 - al) - up(ua, 1.0 - al)) / (1.0 - al)) / gg;
            return cm;
        }
        case bernstein_measure::kind::log_example: {
            const double lo = std::max(a, 2.0);
            if (b <= lo) {
                return cm;
            }
            const quad_options opt{1e-12, 1e-300, 4000};
            cm.mass = integrate_log([&](double t) { return mu.density(t); }, lo, b, opt).value;
            cm.moment = integrate_log([&](double t) { return t * mu.density(t); }, lo, b, opt).value;
            return cm;
        }
        case bernstein_measure::kind::atomic:
            break;
    }
    throw std::logic_error("density_cell on atomic measure");
}

}  // namespace

lift_state lift_state::zero(std::size_t nodes, int dim) {
    lift_state s;
    s.dim = dim;
    s.v.assign(nodes * static_cast<std::size_t>(dim), 0.0);
    return s;
}

lift_state lift_state::constant(std::size_t nodes, std::span<const double> x) {
    lift_state s;
    s.dim = static_cast<int>(x.size());
    s.v.resize(nodes * x.size());
    for (std::size_t j = 0; j < nodes; ++j) {
        std::copy(x.begin(), x.end(), s.v.begin() + static_cast<std::ptrdiff_t>(j * x.size()));
    }
    return s;
}

lift_grid lift_grid::from_nodes(const regularity_weight& r, std::vector<double> thetas,
                                std::vector<double> weights) {
    if (thetas.size() != weights.size() || thetas.empty()) {
        throw std::invalid_argument("from_nodes requires matching non-empty node/weight arrays");
    }
    double prev = -1.0;
    for (std::size_t j = 0; j < thetas.size(); ++j) {
        if (!(thetas[j] >= 0.0) || thetas[j] <= prev) {
            throw std::invalid_argument("from_nodes requires strictly increasing thetas >= 0");
        }
        if (!(weights[j] > 0.0)) {
            throw std::invalid_argument("from_nodes requires positive weights");
        }
        prev = thetas[j];
    }
    lift_grid g;
    g.r_ = r;
    g.theta_ = std::move(thetas);
    g.weight_ = std::move(weights);
    g.r_theta_.reserve(g.theta_.size());
    for (double theta : g.theta_) {
        g.r_theta_.push_back(g.r_(theta));
    }
    return g;
}

lift_grid lift_grid::from_kernel(const kernel& k, int n_nodes, double theta_min,
                                 double theta_max, const discretize_options& opt) {
    lift_grid g;
    g.r_ = k.weight();
    const bernstein_measure& mu = k.measure();

    if (mu.type() == bernstein_measure::kind::atomic) {
        for (const auto& [mass, theta] : mu.atoms()) {
            g.theta_.push_back(theta);
            g.weight_.push_back(mass);
            g.r_theta_.push_back(g.r_(theta));
        }
        return g;
    }

    if (n_nodes < 1) {
        throw std::invalid_argument("discretize requires at least one node");
    }
    if (!(theta_min >= 0.0) || !(theta_max > theta_min)) {
        throw std::invalid_argument("discretize requires 0 <= theta_min < theta_max");
    }
    const double lo = std::max(theta_min, mu.support_lower());
    if (!(theta_max > lo)) {
        throw std::invalid_argument("discretize: empty support intersection");
    }
    if (!(lo > 0.0)) {
        throw std::invalid_argument("discretize requires theta_min > 0 for density measures");
    }

    const double ratio = theta_max / lo;
    for (int i = 0; i < n_nodes; ++i) {
        double a = lo * std::pow(ratio, static_cast<double>(i) / n_nodes);
        const double b = lo * std::pow(ratio, static_cast<double>(i + 1) / n_nodes);
        cell_moments cm = density_cell(mu, a, b);
        if (i == 0 && opt.fold_head_mass && lo > mu.support_lower()) {
            cell_moments head = density_cell(mu, mu.support_lower(), lo);
            cm.mass += head.mass;
            cm.moment += head.moment;
        }
        if (!(cm.mass > 0.0)) {
            continue;
        }
        const double node = cm.moment / cm.mass;
        g.theta_.push_back(node);
        g.weight_.push_back(cm.mass);
        g.r_theta_.push_back(g.r_(node));
    }
    if (g.theta_.empty()) {
        throw std::invalid_argument("discretize: empty support intersection");
    }
    return g;
}

double lift_grid::r_m(const truncation& t, double theta) const {
    if (t.is_infinite) {
        return 1.0;
    }
    return r_.r_m(t.m, theta);
}

double lift_grid::R_m(const truncation& t) const {
    double s = 0.0;
    for (std::size_t j = 0; j < theta_.size(); ++j) {
        s += weight_[j] * r_m(t, theta_[j]);
    }
    return s;
}

double lift_grid::eps_m(const truncation& t) const {
    if (t.is_infinite) {
        return 0.0;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < theta_.size(); ++j) {
        const double one_minus = r_.one_minus_r_m(t.m, theta_[j]);
        if (one_minus <= 0.0 || theta_[j] <= 0.0) {
            continue;  // r_m = 1 makes the numerator vanish first
        }
        s += weight_[j] * one_minus * one_minus / (theta_[j] * (1.0 - one_minus));
    }
    return s;
}

double lift_grid::kernel_value(double t) const {
    double s = 0.0;
    for (std::size_t j = 0; j < theta_.size(); ++j) {
        s += weight_[j] * std::exp(-theta_[j] * t);
    }
    return s;
}

double lift_grid::kernel_cell_integral(int q, double h) const {
    if (q < 1) {
        throw std::invalid_argument("kernel_cell_integral requires lag q >= 1");
    }
    double s = 0.0;
    for (std::size_t j = 0; j < theta_.size(); ++j) {
        s += weight_[j] * std::exp(-theta_[j] * (q - 1) * h) * h * phi1(theta_[j] * h);
    }
    return s;
}

std::vector<double> integral_map(const lift_grid& g, const lift_state& y, const truncation& t) {
    std::vector<double> out(static_cast<std::size_t>(y.dim), 0.0);
    const auto thetas = g.thetas();
    const auto weights = g.weights();
    for (std::size_t j = 0; j < thetas.size(); ++j) {
        const double w = weights[j] * g.r_m(t, thetas[j]);
        for (int c = 0; c < y.dim; ++c) {
            out[static_cast<std::size_t>(c)] += w * y.v[j * static_cast<std::size_t>(y.dim) + c];
        }
    }
    return out;
}

state_norms norms(const lift_grid& g, const lift_state& y, const truncation& t) {
    state_norms n;
    const auto thetas = g.thetas();
    const auto weights = g.weights();
    const auto rvals = g.r_values();
    double h2 = 0.0, m2 = 0.0, v2 = 0.0;
    for (std::size_t j = 0; j < thetas.size(); ++j) {
        double y2 = 0.0;
        for (int c = 0; c < y.dim; ++c) {
            const double x = y.v[j * static_cast<std::size_t>(y.dim) + c];
            y2 += x * x;
        }
        h2 += weights[j] * rvals[j] * y2;
        m2 += weights[j] * g.r_m(t, thetas[j]) * y2;
        v2 += weights[j] * (thetas[j] + 1.0) * rvals[j] * y2;
    }
    n.h_mu = std::sqrt(h2);
    n.m = std::sqrt(m2);
    n.v_mu = std::sqrt(v2);
    return n;
}

double theta_rm_quadratic(const lift_grid& g, const lift_state& y, const truncation& t) {
    const auto thetas = g.thetas();
    const auto weights = g.weights();
    double s = 0.0;
    for (std::size_t j = 0; j < thetas.size(); ++j) {
        double y2 = 0.0;
        for (int c = 0; c < y.dim; ++c) {
            const double x = y.v[j * static_cast<std::size_t>(y.dim) + c];
            y2 += x * x;
        }
        s += weights[j] * thetas[j] * g.r_m(t, thetas[j]) * y2;
    }
    return s;
}

std::vector<double> reconstruct_forcing(const lift_grid& g, const lift_state& y,
                                        std::span<const double> t_grid) {
    const auto thetas = g.thetas();
    const auto weights = g.weights();
    std::vector<double> out(t_grid.size() * static_cast<std::size_t>(y.dim), 0.0);
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
        for (std::size_t j = 0; j < thetas.size(); ++j) {
            const double w = weights[j] * std::exp(-thetas[j] * t_grid[ti]);
            for (int c = 0; c < y.dim; ++c) {
                out[ti * static_cast<std::size_t>(y.dim) + c] +=
                    w * y.v[j * static_cast<std::size_t>(y.dim) + c];
            }
        }
    }
    return out;
}

kernel_error_report kernel_error(const lift_grid& g, const kernel& k,
                                 std::span<const double> t_grid) {
    kernel_error_report rep;
    for (double t : t_grid) {
        if (!(t > 0.0)) {
            throw std::invalid_argument("kernel_error requires t > 0");
        }
        kernel_error_row row;
        row.t = t;
        row.k_exact = k(t);
        row.k_grid = g.kernel_value(t);
        row.rel_err = std::abs(row.k_exact - row.k_grid) / row.k_exact;
        rep.max_rel_err = std::max(rep.max_rel_err, row.rel_err);
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace sve
