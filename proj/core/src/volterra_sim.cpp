#include "sve/volterra_sim.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "sve/quadrature.hpp"
#include "sve/rng.hpp"

namespace sve {
namespace {

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

double kernel_cell_integral(const kernel& k, int q, double h) {
    const bernstein_measure& mu = k.measure();
    const double a = (q - 1) * h;
    const double b = q * h;
    switch (mu.type()) {
        case bernstein_measure::kind::atomic: {
            double s = 0.0;
            for (const auto& [mass, theta] : mu.atoms()) {
                s += mass * std::exp(-theta * a) * h * phi1(theta * h);
            }
            return s;
        }
        case bernstein_measure::kind::fractional: {
            const double al = mu.alpha();
            return (std::pow(b, al) - std::pow(a, al)) / std::tgamma(al + 1.0);
        }
        case bernstein_measure::kind::gamma: {
            const double al = mu.alpha();
            const double be = mu.beta();
            auto g = [al, be](double t) { return std::exp(-be * t) / std::tgamma(al); };
            if (q == 1) {
                return integrate_left_singular(g, 0.0, h, 1.0 - al, {1e-12, 1e-300, 2000}).value;
            }
            return integrate([&](double t) { return g(t) * std::pow(t, al - 1.0); }, a, b,
                             {1e-12, 1e-300, 2000})
                .value;
        }
        case bernstein_measure::kind::log_example:
            return integrate([&k](double t) { return k(t); }, std::max(a, 1e-12), b,
                             {1e-10, 1e-300, 2000})
                .value;
    }
    return 0.0;
}

}  // namespace

kernel_weights kernel_weights::from_kernel(const kernel& k, double h, int steps,
                                           drift_weight_rule rule) {
    kernel_weights kw;
    kw.steps = steps;
    kw.h = h;
    kw.noise_w.resize(static_cast<std::size_t>(steps));
    kw.drift_w.resize(static_cast<std::size_t>(steps));
    for (int q = 1; q <= steps; ++q) {
        const double point = k(q * h);
        kw.noise_w[static_cast<std::size_t>(q - 1)] = point;
        kw.drift_w[static_cast<std::size_t>(q - 1)] =
            rule == drift_weight_rule::point ? h * point : kernel_cell_integral(k, q, h);
    }
    return kw;
}

kernel_weights kernel_weights::from_grid(const lift_grid& g, double h, int steps,
                                         drift_weight_rule rule) {
    kernel_weights kw;
    kw.steps = steps;
    kw.h = h;
    kw.noise_w.resize(static_cast<std::size_t>(steps));
    kw.drift_w.resize(static_cast<std::size_t>(steps));
    for (int q = 1; q <= steps; ++q) {
        const double point = g.kernel_value(q * h);
        kw.noise_w[static_cast<std::size_t>(q - 1)] = point;
        kw.drift_w[static_cast<std::size_t>(q - 1)] =
            rule == drift_weight_rule::point ? h * point : g.kernel_cell_integral(q, h);
    }
    return kw;
}

std::vector<double> direct_convolution(const kernel_weights& kw, std::span<const double> forcing,
                                       const path_driver& drv) {
    const int n = drv.n;
    const int steps = drv.steps;
    if (steps > kw.steps) {
        throw std::invalid_argument("driver has more steps than the precomputed kernel weights");
    }
    if (static_cast<int>(forcing.size()) != (steps + 1) * n) {
        throw std::invalid_argument("forcing length does not match the step grid");
    }
    // Precompute sigma_l dW_l per step.
    std::vector<double> sdw(static_cast<std::size_t>(steps) * n, 0.0);
    for (int l = 0; l < steps; ++l) {
        for (int c = 0; c < n; ++c) {
            double s = 0.0;
            for (int k = 0; k < drv.d; ++k) {
                s += drv.sigma_vals[(static_cast<std::size_t>(l) * n + c) * drv.d + k] *
                     drv.dw[static_cast<std::size_t>(l) * drv.d + k];
            }
            sdw[static_cast<std::size_t>(l) * n + c] = s;
        }
    }
    std::vector<double> x(forcing.begin(), forcing.end());
    for (int i = 1; i <= steps; ++i) {
        for (int l = 0; l < i; ++l) {
            const double dw_w = kw.drift_w[static_cast<std::size_t>(i - l - 1)];
            const double nw = kw.noise_w[static_cast<std::size_t>(i - l - 1)];
            for (int c = 0; c < n; ++c) {
                x[static_cast<std::size_t>(i) * n + c] +=
                    dw_w * drv.b_vals[static_cast<std::size_t>(l) * n + c] +
                    nw * sdw[static_cast<std::size_t>(l) * n + c];
            }
        }
    }
    return x;
}

path_ensemble simulate_direct(const kernel_weights& kw, const coefficient_pair& pair,
                              std::span<const double> forcing, const direct_config& cfg) {
    const double raw = cfg.T / cfg.h;
    const int steps = static_cast<int>(std::llround(raw));
    if (steps < 1 || std::abs(raw - steps) > 1e-9 * std::max(1.0, raw)) {
        throw std::invalid_argument("T/h must be a positive integer within rounding");
    }
    if (steps > cfg.max_steps) {
        throw std::invalid_argument("direct scheme step count exceeds the configured cap");
    }
    if (steps > kw.steps) {
        throw std::invalid_argument("kernel weights cover fewer steps than requested");
    }
    if (static_cast<int>(forcing.size()) != (steps + 1) * pair.n) {
        throw std::invalid_argument("forcing length does not match the step grid");
    }

    path_ensemble ens;
    ens.T = cfg.T;
    ens.h = cfg.h;
    ens.steps = steps;
    ens.n = pair.n;
    ens.times.resize(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) {
        ens.times[static_cast<std::size_t>(i)] = i * cfg.h;
    }
    ens.paths.resize(static_cast<std::size_t>(cfg.n_paths));

    std::atomic<int> aborted{0};
    parallel_paths(cfg.n_paths, cfg.threads, [&](int p) {
        lift_path_record& rec = ens.paths[static_cast<std::size_t>(p)];
        normal_stream rng(derive_seed(cfg.seed, cfg.seed_tag, static_cast<std::uint64_t>(p)));
        const int n = pair.n;
        const int d = pair.d;
        rec.x.assign(forcing.begin(), forcing.end());
        std::vector<double> b_vals(static_cast<std::size_t>(steps) * n, 0.0);
        std::vector<double> sdw(static_cast<std::size_t>(steps) * n, 0.0);
        if (cfg.record_driver) {
            rec.driver.n = n;
            rec.driver.d = d;
            rec.driver.steps = steps;
            rec.driver.b_vals.assign(static_cast<std::size_t>(steps) * n, 0.0);
            rec.driver.sigma_vals.assign(static_cast<std::size_t>(steps) * n * d, 0.0);
            rec.driver.dw.assign(static_cast<std::size_t>(steps) * d, 0.0);
        }

        std::vector<double> xi(static_cast<std::size_t>(n));
        std::vector<double> b_val(static_cast<std::size_t>(n));
        matrix sigma_val(n, d);
        std::vector<double> dw(static_cast<std::size_t>(d));
        const double sqrt_h = std::sqrt(cfg.h);

        for (int i = 1; i <= steps; ++i) {
            const int l = i - 1;  // new left endpoint to evaluate
            std::copy(rec.x.begin() + static_cast<std::size_t>(l) * n,
                      rec.x.begin() + static_cast<std::size_t>(l + 1) * n, xi.begin());
            pair.drift(xi.data(), b_val.data());
            pair.diffusion(xi.data(), sigma_val.a.data());
            if (!all_finite(b_val) || !all_finite(sigma_val.a)) {
                std::ostringstream os;
                os << "non-finite coefficient value at step " << l << ", path aborted";
                rec.ok = false;
                rec.diagnostic = os.str();
                rec.x.resize(static_cast<std::size_t>(i) * n);
                aborted.fetch_add(1);
                break;
            }
            for (int k = 0; k < d; ++k) {
                dw[static_cast<std::size_t>(k)] = sqrt_h * rng.next();
            }
            std::copy(b_val.begin(), b_val.end(), b_vals.begin() + static_cast<std::size_t>(l) * n);
            for (int c = 0; c < n; ++c) {
                double s = 0.0;
                for (int k = 0; k < d; ++k) {
                    s += sigma_val(c, k) * dw[static_cast<std::size_t>(k)];
                }
                sdw[static_cast<std::size_t>(l) * n + c] = s;
            }
            if (cfg.record_driver) {
                std::copy(b_val.begin(), b_val.end(),
                          rec.driver.b_vals.begin() + static_cast<std::size_t>(l) * n);
                std::copy(sigma_val.a.begin(), sigma_val.a.end(),
                          rec.driver.sigma_vals.begin() + static_cast<std::size_t>(l) * n * d);
                std::copy(dw.begin(), dw.end(),
                          rec.driver.dw.begin() + static_cast<std::size_t>(l) * d);
            }
            for (int j = 0; j < i; ++j) {
                const double dw_w = kw.drift_w[static_cast<std::size_t>(i - j - 1)];
                const double nw = kw.noise_w[static_cast<std::size_t>(i - j - 1)];
                for (int c = 0; c < n; ++c) {
                    rec.x[static_cast<std::size_t>(i) * n + c] +=
                        dw_w * b_vals[static_cast<std::size_t>(j) * n + c] +
                        nw * sdw[static_cast<std::size_t>(j) * n + c];
                }
            }
        }
    });
    ens.aborted = aborted.load();
    return ens;
}

std::vector<double> zero_forcing(int steps, int n) {
    return std::vector<double>((static_cast<std::size_t>(steps) + 1) * n, 0.0);
}

std::vector<double> kernel_multiple_forcing(const kernel& k, double h, int steps, double x0) {
    std::vector<double> f(static_cast<std::size_t>(steps) + 1, 0.0);
    f[0] = k(h) * x0;  // singular kernels have no finite K(0); see header
    for (int i = 1; i <= steps; ++i) {
        f[static_cast<std::size_t>(i)] = k(i * h) * x0;
    }
    return f;
}

std::vector<double> grid_kernel_multiple_forcing(const lift_grid& g, double h, int steps, double x0) {
    std::vector<double> f(static_cast<std::size_t>(steps) + 1, 0.0);
    f[0] = g.kernel_value(h) * x0;
    for (int i = 1; i <= steps; ++i) {
        f[static_cast<std::size_t>(i)] = g.kernel_value(i * h) * x0;
    }
    return f;
}

double closed_form_branch_constant(double alpha, double beta) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("closed form requires alpha in (0, 1]");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
        throw std::invalid_argument("closed form requires beta in (0, 1)");
    }
    const double q = 1.0 - beta;
    return std::pow(beta * std::tgamma(alpha * beta / q) / std::tgamma(alpha / q), 1.0 / q);
}

double closed_form_solution(double alpha, double beta, double t0, double t) {
    if (!(t >= 0.0) || !(t0 >= 0.0)) {
        throw std::invalid_argument("closed form requires t, t0 >= 0");
    }
    if (t <= t0) {
        return 0.0;
    }
    return closed_form_branch_constant(alpha, beta) * std::pow(t - t0, alpha / (1.0 - beta));
}

double residual_check(double alpha, double beta, double t0, double T, double h) {
    const double raw = T / h;
    const int steps = static_cast<int>(std::llround(raw));
    if (steps < 1 || std::abs(raw - steps) > 1e-9 * std::max(1.0, raw)) {
        throw std::invalid_argument("T/h must be a positive integer within rounding");
    }
    // Cell-average fractional weights, exact antiderivative of t^{alpha-1}/Gamma(alpha).
    std::vector<double> w(static_cast<std::size_t>(steps), 0.0);
    const double ga1 = std::tgamma(alpha + 1.0);
    for (int q = 1; q <= steps; ++q) {
        w[static_cast<std::size_t>(q - 1)] = (std::pow(q * h, alpha) - std::pow((q - 1) * h, alpha)) / ga1;
    }
    std::vector<double> x(static_cast<std::size_t>(steps) + 1, 0.0);
    std::vector<double> bx(static_cast<std::size_t>(steps) + 1, 0.0);
    for (int i = 0; i <= steps; ++i) {
        x[static_cast<std::size_t>(i)] = closed_form_solution(alpha, beta, t0, i * h);
        bx[static_cast<std::size_t>(i)] =
            std::copysign(std::pow(std::abs(x[static_cast<std::size_t>(i)]), beta),
                          x[static_cast<std::size_t>(i)]);
    }
    double max_res = 0.0;
    for (int i = 0; i <= steps; ++i) {
        double conv = 0.0;
        for (int l = 0; l < i; ++l) {
            conv += w[static_cast<std::size_t>(i - l - 1)] * bx[static_cast<std::size_t>(l)];
        }
        max_res = std::max(max_res, std::abs(x[static_cast<std::size_t>(i)] - conv));
    }
    return max_res;
}

}  // namespace sve
