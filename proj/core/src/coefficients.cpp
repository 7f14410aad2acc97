#include "sve/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sve/errors.hpp"
#include "sve/rng.hpp"

namespace sve {
namespace {

// 33-point Gauss-Legendre rule on [-1, 1], built once by Newton iteration on
// the Legendre recurrence.
struct gl_rule {
    std::vector<double> nodes, weights;
};

const gl_rule& gauss_legendre_33() {
    static const gl_rule rule = [] {
        constexpr int n = 33;
        gl_rule r;
        r.nodes.resize(n);
        r.weights.resize(n);
        for (int i = 0; i < n; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                pp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / pp;
                x -= dx;
                if (std::abs(dx) < 1e-16) {
                    break;
                }
            }
            r.nodes[i] = x;
            r.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        }
        return r;
    }();
    return rule;
}

// Discrete bump weights: a_i ∝ w_i exp(-1/(1-u_i^2)), normalized to sum 1.
// The mollified map is then an exact convex combination of shifts, so the
// sup-error and modulus-domination bounds hold without quadrature slack.
struct bump_rule {
    std::vector<double> offsets, coeffs;
};

const bump_rule& bump_33() {
    static const bump_rule rule = [] {
        const gl_rule& gl = gauss_legendre_33();
        bump_rule b;
        double total = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double u = gl.nodes[i];
            const double psi = std::exp(-1.0 / (1.0 - u * u));
            b.offsets.push_back(u);
            b.coeffs.push_back(gl.weights[i] * psi);
            total += gl.weights[i] * psi;
        }
        for (double& c : b.coeffs) {
            c /= total;
        }
        return b;
    }();
    return rule;
}

// Largest bandwidth h with rho(scale * h^2) <= budget, by bisection.
double certify_bandwidth(const modulus_spec& rho, double scale, double budget) {
    if (rho.smallest_certified_level() > budget) {
        throw std::invalid_argument(
            "modulus family cannot certify the mollification bandwidth (table too coarse: "
            "smallest tabulated value exceeds the error budget)");
    }
    double hi = 1.0;
    while (rho(scale * hi * hi) <= budget && hi < 1e8) {
        hi *= 2.0;
    }
    if (hi >= 1e8) {
        return 1e8;  // effectively constant coefficient
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (rho(scale * mid * mid) <= budget) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

double param(const param_map& p, const std::string& key, const std::string& owner) {
    auto it = p.find(key);
    if (it == p.end()) {
        throw config_error(owner, "missing parameter '" + key + "'");
    }
    return it->second;
}

}  // namespace

std::vector<double> coefficient_pair::b(const std::vector<double>& x) const {
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    drift(x.data(), out.data());
    return out;
}

matrix coefficient_pair::sigma(const std::vector<double>& x) const {
    matrix out(n, d);
    diffusion(x.data(), out.a.data());
    return out;
}

double linear_growth_constant(const coefficient_pair& pair) {
    const std::vector<double> origin(static_cast<std::size_t>(pair.n), 0.0);
    const double b0 = std::sqrt(squared_norm(pair.b(origin)));
    const double s0 = pair.sigma(origin).frobenius_norm();
    return std::max(b0 + 1.0 + std::sqrt(pair.rho_b(1.0)),
                    s0 + 1.0 + std::sqrt(pair.rho_sigma(1.0)));
}

coefficient_pair truncate(const coefficient_pair& pair, double k) {
    if (!(k > 0.0)) {
        throw std::invalid_argument("truncate requires radius k > 0");
    }
    const int n = pair.n;
    auto project = [n, k](const double* x, std::vector<double>& buf) {
        double norm2 = 0.0;
        for (int i = 0; i < n; ++i) {
            norm2 += x[i] * x[i];
        }
        const double norm = std::sqrt(norm2);
        const double scale = norm > k ? k / norm : 1.0;
        buf.assign(x, x + n);
        for (double& v : buf) {
            v *= scale;
        }
    };
    coefficient_pair out = pair;
    out.name = pair.name + "|trunc(" + std::to_string(k) + ")";
    out.drift = [inner = pair.drift, project](const double* x, double* o) {
        std::vector<double> buf;
        project(x, buf);
        inner(buf.data(), o);
    };
    out.diffusion = [inner = pair.diffusion, project](const double* x, double* o) {
        std::vector<double> buf;
        project(x, buf);
        inner(buf.data(), o);
    };
    return out;
}

double mollify_bandwidth(const modulus_spec& rho, int dim, double delta0) {
    if (!(delta0 > 0.0)) {
        throw std::invalid_argument("mollify_bandwidth requires delta0 > 0");
    }
    return certify_bandwidth(rho, static_cast<double>(dim), delta0 / 2.0);
}

mollify_result mollify(const coefficient_pair& pair, double delta0) {
    if (!(delta0 > 0.0)) {
        throw std::invalid_argument("mollify requires delta0 > 0");
    }
    if (pair.n > 2) {
        throw std::invalid_argument("mollify supports state dimension n <= 2");
    }
    const double budget = delta0 / 2.0;
    const double scale = static_cast<double>(pair.n);  // |h u|^2 <= n h^2 on the tensor bump
    const double hb = certify_bandwidth(pair.rho_b, scale, budget);
    const double hs = certify_bandwidth(pair.rho_sigma, scale, budget);

    const bump_rule& bump = bump_33();
    const int n = pair.n;

    auto smooth = [n, &bump](std::function<void(const double*, double*)> inner, double h,
                             int out_dim) {
        return [inner = std::move(inner), h, n, out_dim, &bump](const double* x, double* o) {
            std::vector<double> acc(static_cast<std::size_t>(out_dim), 0.0);
            std::vector<double> shifted(static_cast<std::size_t>(n));
            std::vector<double> val(static_cast<std::size_t>(out_dim));
            if (n == 1) {
                for (std::size_t i = 0; i < bump.offsets.size(); ++i) {
                    shifted[0] = x[0] - h * bump.offsets[i];
                    inner(shifted.data(), val.data());
                    for (int c = 0; c < out_dim; ++c) {
                        acc[c] += bump.coeffs[i] * val[c];
                    }
                }
            } else {
                for (std::size_t i = 0; i < bump.offsets.size(); ++i) {
                    for (std::size_t j = 0; j < bump.offsets.size(); ++j) {
                        shifted[0] = x[0] - h * bump.offsets[i];
                        shifted[1] = x[1] - h * bump.offsets[j];
                        inner(shifted.data(), val.data());
                        const double cij = bump.coeffs[i] * bump.coeffs[j];
                        for (int c = 0; c < out_dim; ++c) {
                            acc[c] += cij * val[c];
                        }
                    }
                }
            }
            std::copy(acc.begin(), acc.end(), o);
        };
    };

    mollify_result res;
    res.bandwidth_b = hb;
    res.bandwidth_sigma = hs;
    res.sup_error_bound = std::sqrt(budget);
    res.pair = pair;
    res.pair.name = pair.name + "|mollified";
    res.pair.drift = smooth(pair.drift, hb, pair.n);
    res.pair.diffusion = smooth(pair.diffusion, hs, pair.n * pair.d);
    if (pair.c_ue > 0.0) {
        // Operator-norm perturbation bound on the square root of sigma sigma^T.
        const double root = std::max(0.0, std::sqrt(pair.c_ue) - res.sup_error_bound);
        res.pair.c_ue = root * root;
    }
    return res;
}

// --- registry ---------------------------------------------------------------

coefficient_pair make_pair_from_registry(const std::string& drift_name, const param_map& drift_params,
                                         const std::string& sigma_name, const param_map& sigma_params) {
    coefficient_pair pair;
    pair.n = 1;
    pair.d = 1;

    if (drift_name == "zero_drift") {
        pair.drift = [](const double*, double* o) { *o = 0.0; };
        pair.rho_b = modulus_spec::lipschitz(0.0);
    } else if (drift_name == "linear_drift") {
        const double a = param(drift_params, "a", "coefficients.drift");
        pair.drift = [a](const double* x, double* o) { *o = a * *x; };
        pair.rho_b = modulus_spec::lipschitz(std::abs(a));
    } else if (drift_name == "power_drift") {
        const double beta = param(drift_params, "beta", "coefficients.drift");
        if (!(beta > 0.0 && beta < 1.0)) {
            throw config_error("coefficients.drift.beta", "beta must lie in (0,1)");
        }
        pair.drift = [beta](const double* x, double* o) {
            *o = std::copysign(std::pow(std::abs(*x), beta), *x);
        };
        // ||x|^b sgn x - |y|^b sgn y| <= 2 |x-y|^b globally.
        pair.rho_b = modulus_spec::hoelder(beta, 2.0);
    } else if (drift_name == "sin_drift") {
        const double a = param(drift_params, "a", "coefficients.drift");
        pair.drift = [a](const double* x, double* o) { *o = a * std::sin(*x); };
        pair.rho_b = modulus_spec::lipschitz(std::abs(a));
    } else {
        throw config_error("coefficients.drift", "unknown registry name '" + drift_name + "'");
    }

    if (sigma_name == "constant_sigma") {
        const double s = param(sigma_params, "s", "coefficients.sigma");
        // s = 0 is allowed: deterministic runs carry no ellipticity claim.
        pair.diffusion = [s](const double*, double* o) { *o = s; };
        pair.rho_sigma = modulus_spec::lipschitz(0.0);
        pair.c_ue = s * s;
    } else if (sigma_name == "holder_sigma") {
        const double gamma = param(sigma_params, "gamma", "coefficients.sigma");
        const double c0 = param(sigma_params, "c0", "coefficients.sigma");
        const double s0 = param(sigma_params, "s0", "coefficients.sigma");
        if (!(gamma > 0.0 && gamma <= 1.0)) {
            throw config_error("coefficients.sigma.gamma", "gamma must lie in (0,1]");
        }
        if (!(s0 > 0.0) || !(c0 >= 0.0)) {
            throw config_error("coefficients.sigma.s0", "holder_sigma requires s0 > 0 and c0 >= 0");
        }
        // s0 + c0 min(|x|^gamma, 1): gamma-Hoelder with constant c0, sigma >= s0.
        pair.diffusion = [gamma, c0, s0](const double* x, double* o) {
            *o = s0 + c0 * std::min(std::pow(std::abs(*x), gamma), 1.0);
        };
        pair.rho_sigma = modulus_spec::hoelder(gamma, c0);
        pair.c_ue = s0 * s0;
    } else if (sigma_name == "sin_sigma") {
        const double s0 = param(sigma_params, "s0", "coefficients.sigma");
        const double a = param(sigma_params, "a", "coefficients.sigma");
        if (!(s0 > 0.0) || !(std::abs(a) < s0)) {
            throw config_error("coefficients.sigma.a", "sin_sigma requires s0 > 0 and |a| < s0");
        }
        pair.diffusion = [s0, a](const double* x, double* o) { *o = s0 + a * std::sin(*x); };
        pair.rho_sigma = modulus_spec::lipschitz(std::abs(a));
        pair.c_ue = (s0 - std::abs(a)) * (s0 - std::abs(a));
    } else {
        throw config_error("coefficients.sigma", "unknown registry name '" + sigma_name + "'");
    }

    std::ostringstream nm;
    nm << drift_name << "+" << sigma_name;
    pair.name = nm.str();
    return pair;
}

std::vector<std::string> registered_drift_names() {
    return {"zero_drift", "linear_drift", "power_drift", "sin_drift"};
}

std::vector<std::string> registered_sigma_names() {
    return {"constant_sigma", "holder_sigma", "sin_sigma"};
}

// --- sampled validation ------------------------------------------------------

double modulus_violation(const std::function<void(const double*, double*)>& phi, int n, int out_dim,
                         const modulus_spec& rho, double box, int samples, std::uint64_t seed) {
    normal_stream rng(seed);
    std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    std::vector<double> fx(static_cast<std::size_t>(out_dim)), fy(static_cast<std::size_t>(out_dim));
    double worst = -1e300;
    for (int s = 0; s < samples; ++s) {
        double dist2 = 0.0;
        for (int i = 0; i < n; ++i) {
            x[i] = box * (2.0 * rng.next_uniform() - 1.0);
            y[i] = box * (2.0 * rng.next_uniform() - 1.0);
            dist2 += (x[i] - y[i]) * (x[i] - y[i]);
        }
        phi(x.data(), fx.data());
        phi(y.data(), fy.data());
        double diff2 = 0.0;
        for (int c = 0; c < out_dim; ++c) {
            diff2 += (fx[c] - fy[c]) * (fx[c] - fy[c]);
        }
        worst = std::max(worst, diff2 - rho(dist2));
    }
    return worst;
}

double sampled_min_ellipticity(const coefficient_pair& pair, double box, int samples,
                               std::uint64_t seed) {
    normal_stream rng(seed);
    std::vector<double> x(static_cast<std::size_t>(pair.n), 0.0);
    double mn = 1e300;
    auto probe = [&](const std::vector<double>& pt) {
        const matrix s = pair.sigma(pt);
        matrix a(pair.n, pair.n);
        for (int i = 0; i < pair.n; ++i) {
            for (int j = 0; j < pair.n; ++j) {
                double v = 0.0;
                for (int k = 0; k < pair.d; ++k) {
                    v += s(i, k) * s(j, k);
                }
                a(i, j) = v;
            }
        }
        mn = std::min(mn, smallest_eigenvalue_spd(a));
    };
    // Deterministic grid through the box diagonal plus random draws.
    for (int g = 0; g <= 16; ++g) {
        const double t = -box + 2.0 * box * g / 16.0;
        std::fill(x.begin(), x.end(), t);
        probe(x);
    }
    for (int s = 0; s < samples; ++s) {
        for (double& xc : x) {
            xc = box * (2.0 * rng.next_uniform() - 1.0);
        }
        probe(x);
    }
    return mn;
}

}  // namespace sve
