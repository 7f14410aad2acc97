#include "sve/see_sim.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "sve/rng.hpp"

namespace sve {

step_factors step_factors::make(const lift_grid& g, double h) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("step size h must be positive");
    }
    step_factors f;
    f.decay.reserve(g.size());
    f.drift_w.reserve(g.size());
    for (double theta : g.thetas()) {
        f.decay.push_back(std::exp(-theta * h));
        f.drift_w.push_back(h * phi1(theta * h));
    }
    return f;
}

void ou_step(const step_factors& f, lift_state& y, std::span<const double> b_val,
             const matrix& sigma_val, std::span<const double> dw) {
    const int n = y.dim;
    // sdw = sigma * dW, shared by every node.
    double sdw_buf[8];
    std::vector<double> sdw_dyn;
    double* sdw = nullptr;
    if (n <= 8) {
        sdw = sdw_buf;
    } else {
        sdw_dyn.resize(static_cast<std::size_t>(n));
        sdw = sdw_dyn.data();
    }
    for (int c = 0; c < n; ++c) {
        double s = 0.0;
        for (int k = 0; k < sigma_val.cols; ++k) {
            s += sigma_val(c, k) * dw[static_cast<std::size_t>(k)];
        }
        sdw[c] = s;
    }
    const std::size_t nodes = f.decay.size();
    for (std::size_t j = 0; j < nodes; ++j) {
        const double dec = f.decay[j];
        const double dwt = f.drift_w[j];
        double* yj = y.v.data() + j * static_cast<std::size_t>(n);
        for (int c = 0; c < n; ++c) {
            yj[c] = dec * yj[c] + dwt * b_val[static_cast<std::size_t>(c)] + dec * sdw[c];
        }
    }
}

void parallel_paths(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                fn(i);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
}

namespace {

int step_count(double T, double h) {
    const double raw = T / h;
    const int steps = static_cast<int>(std::llround(raw));
    if (steps < 1 || std::abs(raw - steps) > 1e-9 * std::max(1.0, raw)) {
        throw std::invalid_argument("T/h must be a positive integer within rounding");
    }
    return steps;
}

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

}  // namespace

path_ensemble simulate(const lift_grid& g, const coefficient_pair& pair, const lift_state& y0,
                       const sim_config& cfg) {
    if (y0.dim != pair.n) {
        throw std::invalid_argument("initial state dimension does not match the coefficient pair");
    }
    if (y0.nodes() != g.size()) {
        throw std::invalid_argument("initial state node count does not match the grid");
    }
    const int steps = step_count(cfg.T, cfg.h);
    const step_factors factors = step_factors::make(g, cfg.h);

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
        lift_state y = y0;
        const int n = pair.n;
        const int d = pair.d;
        rec.x.assign((static_cast<std::size_t>(steps) + 1) * n, 0.0);
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

        if (cfg.record_states) {
            rec.states.reserve((static_cast<std::size_t>(steps) + 1) * y.v.size());
        }
        auto emit_output = [&](int i) {
            auto v = integral_map(g, y, cfg.trunc);
            std::copy(v.begin(), v.end(), rec.x.begin() + static_cast<std::size_t>(i) * n);
            const state_norms nm = norms(g, y, cfg.trunc);
            rec.sup_h_norm2 = std::max(rec.sup_h_norm2, nm.h_mu * nm.h_mu);
            if (i < steps) {
                rec.v_norm_integral += nm.v_mu * nm.v_mu * cfg.h;
            }
            if (cfg.record_states) {
                rec.states.insert(rec.states.end(), y.v.begin(), y.v.end());
            }
            return v;
        };

        emit_output(0);
        for (int i = 0; i < steps; ++i) {
            std::copy(rec.x.begin() + static_cast<std::size_t>(i) * n,
                      rec.x.begin() + static_cast<std::size_t>(i + 1) * n, xi.begin());
            pair.drift(xi.data(), b_val.data());
            pair.diffusion(xi.data(), sigma_val.a.data());
            if (!all_finite(b_val) || !all_finite(sigma_val.a)) {
                std::ostringstream os;
                os << "non-finite coefficient value at step " << i << " (t = " << i * cfg.h
                   << "), path aborted";
                rec.ok = false;
                rec.diagnostic = os.str();
                rec.x.resize((static_cast<std::size_t>(i) + 1) * n);
                aborted.fetch_add(1);
                break;
            }
            for (int k = 0; k < d; ++k) {
                dw[static_cast<std::size_t>(k)] = sqrt_h * rng.next();
            }
            if (cfg.record_driver) {
                std::copy(b_val.begin(), b_val.end(),
                          rec.driver.b_vals.begin() + static_cast<std::size_t>(i) * n);
                std::copy(sigma_val.a.begin(), sigma_val.a.end(),
                          rec.driver.sigma_vals.begin() + static_cast<std::size_t>(i) * n * d);
                std::copy(dw.begin(), dw.end(),
                          rec.driver.dw.begin() + static_cast<std::size_t>(i) * d);
            }
            ou_step(factors, y, b_val, sigma_val, dw);
            emit_output(i + 1);
        }
        rec.terminal = std::move(y);
    });
    ens.aborted = aborted.load();
    return ens;
}

lift_path_record lift_from_sve(const lift_grid& g, const path_driver& drv, const lift_state& y0,
                               double h, const truncation& out_map) {
    if (y0.dim != drv.n) {
        throw std::invalid_argument("driver dimension does not match the initial state");
    }
    if (static_cast<int>(drv.b_vals.size()) != drv.steps * drv.n ||
        static_cast<int>(drv.sigma_vals.size()) != drv.steps * drv.n * drv.d ||
        static_cast<int>(drv.dw.size()) != drv.steps * drv.d) {
        throw std::invalid_argument("driver array lengths do not match the step grid");
    }
    const step_factors factors = step_factors::make(g, h);
    lift_path_record rec;
    lift_state y = y0;
    const int n = drv.n;
    rec.x.assign((static_cast<std::size_t>(drv.steps) + 1) * n, 0.0);
    auto emit = [&](int i) {
        auto v = integral_map(g, y, out_map);
        std::copy(v.begin(), v.end(), rec.x.begin() + static_cast<std::size_t>(i) * n);
    };
    emit(0);
    matrix sigma_val(n, drv.d);
    for (int i = 0; i < drv.steps; ++i) {
        std::copy(drv.sigma_vals.begin() + static_cast<std::size_t>(i) * n * drv.d,
                  drv.sigma_vals.begin() + static_cast<std::size_t>(i + 1) * n * drv.d,
                  sigma_val.a.begin());
        ou_step(factors, y,
                std::span<const double>(drv.b_vals.data() + static_cast<std::size_t>(i) * n,
                                        static_cast<std::size_t>(n)),
                sigma_val,
                std::span<const double>(drv.dw.data() + static_cast<std::size_t>(i) * drv.d,
                                        static_cast<std::size_t>(drv.d)));
        emit(i + 1);
    }
    rec.terminal = std::move(y);
    return rec;
}

}  // namespace sve
