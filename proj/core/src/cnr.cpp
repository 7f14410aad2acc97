#include "sve/cnr.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "sve/rng.hpp"
#include "sve/see_sim.hpp"

namespace sve {
namespace {

const double kAdmissibility = std::pow(108.0, -4.0);

double admissibility_S(const modulus_spec& rho_b, const modulus_spec& rho_sigma, double level,
                       double R, bool singular) {
    const double l2 = level * level;
    const double sigma_part = singular ? R * rho_sigma(l2) / level : rho_sigma(l2) / level;
    return std::sqrt(rho_b(l2)) + sigma_part;
}

}  // namespace

coupling_params coupling_params::from_row(const schedule_row& row, bool target_untruncated) {
    coupling_params p;
    p.delta0 = row.delta0;
    p.delta1 = row.delta1;
    p.delta2 = row.delta2;
    p.delta3 = row.delta3;
    p.lambda = row.lambda;
    p.J = row.J;
    p.m = truncation::at(row.m);
    p.M_bar = truncation::at(row.M);
    p.M = target_untruncated ? truncation::infinite() : truncation::at(row.M);
    return p;
}

cnr_schedule build_schedule(const kernel& k, const modulus_spec& rho_b,
                            const modulus_spec& rho_sigma, int k_max, cnr_mode mode) {
    if (k_max < 1) {
        throw std::invalid_argument("build_schedule requires k_max >= 1");
    }
    if (mode == cnr_mode::singular && k.regular()) {
        throw std::invalid_argument("singular schedule mode requires a singular kernel");
    }
    if (mode == cnr_mode::regular && !k.regular()) {
        throw std::invalid_argument("regular schedule mode requires a regular kernel");
    }

    const balance_report bal = check_balance(k, rho_sigma);
    if (!bal.satisfied) {
        throw schedule_refusal("balance condition violated: " + bal.detail);
    }

    cnr_schedule sched;
    sched.mode = mode;

    double prev_S = kAdmissibility;
    bool first = true;
    if (mode == cnr_mode::singular) {
        double m = 1.0;
        for (int kk = 1; kk <= k_max;) {
            if (m > 1e280) {
                throw schedule_refusal(
                    "admissibility search for m_k exceeded the numeric range; the balance "
                    "ratio decays too slowly to schedule at this precision");
            }
            const double eps = k.eps_m(m);
            const double R = k.R_m(m);
            if (!(eps > 0.0)) {
                throw schedule_refusal("eps_m vanished on a singular kernel (inconsistent measure)");
            }
            const double S = admissibility_S(rho_b, rho_sigma, eps, R, true);
            const bool admissible =
                eps <= 1.0 && S > 0.0 && S <= kAdmissibility && (first || S < prev_S);
            if (!admissible) {
                m *= 2.0;
                continue;
            }

            schedule_row row;
            row.k = kk;
            row.m = m;
            row.level = eps;
            row.R_m = R;
            row.S = S;
            row.delta0 = (std::sqrt(rho_b(eps * eps)) * eps + R * rho_sigma(eps * eps)) / (1.0 + R);
            row.delta1 = eps * eps / 2.0;
            row.delta2 = eps / 2.0;
            row.lambda_minus_one = std::sqrt(S) / eps;
            row.lambda = 1.0 + row.lambda_minus_one;
            row.delta3 = 2.0 * row.lambda_minus_one * row.delta1;  // = sqrt(S) eps exactly
            row.J = std::pow(S, -0.25);
            if (!(row.delta0 > 0.0)) {
                throw schedule_refusal("both moduli vanish (constant coefficients); nothing to couple");
            }
            // Truncation level M_k: far enough out that the reference map's
            // truncation error is controlled by delta0.
            double M = m;
            while (rho_b(k.eps_m(M) / k.weight()(M)) > row.delta0 ||
                   rho_sigma(k.eps_m(M) / k.weight()(M)) > row.delta0) {
                M *= 10.0;
                if (M > 1e290) {
                    throw schedule_refusal("truncation-level search for M_k exceeded the numeric range");
                }
            }
            row.M = M;
            row.bandwidth_b = mollify_bandwidth(rho_b, 1, row.delta0);
            row.bandwidth_sigma = mollify_bandwidth(rho_sigma, 1, row.delta0);
            sched.rows.push_back(row);
            prev_S = S;
            first = false;
            ++kk;
            m *= 2.0;
        }
        return sched;
    }

    // Regular mode: r == 1, eps == 0; a delta-ladder replaces the eps levels.
    const double R = k.R_m(1.0);  // total mass
    double delta = 1.0;
    for (int kk = 1; kk <= k_max;) {
        if (delta < 1e-290) {
            throw schedule_refusal("admissibility search for delta_k exceeded the numeric range");
        }
        const double S = admissibility_S(rho_b, rho_sigma, delta, R, false);
        const bool admissible = S > 0.0 && S <= kAdmissibility && (first || S < prev_S);
        if (!admissible) {
            delta *= 0.5;
            continue;
        }
        schedule_row row;
        row.k = kk;
        row.m = 1.0;
        row.M = 1.0;
        row.level = delta;
        row.R_m = R;
        row.S = S;
        row.delta0 = std::sqrt(rho_b(delta * delta)) * delta + rho_sigma(delta * delta);
        row.delta1 = delta * delta;
        row.delta2 = 1.0;
        row.lambda_minus_one = std::sqrt(S) / delta;
        row.lambda = 1.0 + row.lambda_minus_one;
        row.delta3 = row.lambda_minus_one * row.delta1;  // = sqrt(S) delta exactly
        row.J = std::pow(S, -0.25);
        if (!(row.delta0 > 0.0)) {
            throw schedule_refusal("both moduli vanish (constant coefficients); nothing to couple");
        }
        row.bandwidth_b = mollify_bandwidth(rho_b, 1, row.delta0);
        row.bandwidth_sigma = mollify_bandwidth(rho_sigma, 1, row.delta0);
        sched.rows.push_back(row);
        prev_S = S;
        first = false;
        ++kk;
        delta *= 0.5;
    }
    return sched;
}

namespace {

double omega_hat_bound_value(const lift_grid& g, const coupling_params& p,
                             const coefficient_pair& reference) {
    const double R = g.R_m(p.m);
    const double eps = g.eps_m(p.m);
    const double arg = p.delta1 + eps * p.delta2;
    return 9.0 * p.J *
               ((1.0 + R) * p.delta0 + std::sqrt(reference.rho_b(arg)) * std::sqrt(p.delta1) +
                R * reference.rho_sigma(arg)) +
           p.delta3 / 3.0;
}

double control_prob_bound_value(const lift_grid& g, const coupling_params& p,
                                const coefficient_pair& reference) {
    const double R = g.R_m(p.m);
    const double eps = g.eps_m(p.m);
    const double arg = p.delta1 + eps * p.delta2;
    return 324.0 * p.J * R / p.delta3 * (p.delta0 + reference.rho_sigma(arg));
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

coupling_result simulate_coupled_path(const lift_grid& g, const coefficient_pair& target,
                                      const coefficient_pair& reference,
                                      const coupling_params& params, double h, int steps,
                                      const lift_state& y0, std::span<const double> dw,
                                      bool record_lyapunov) {
    if (target.n != reference.n || target.d != reference.d) {
        throw std::invalid_argument("target and reference pairs must share dimensions");
    }
    if (!(reference.c_ue > 0.0)) {
        throw std::invalid_argument("coupling requires an elliptic reference pair (c_ue > 0)");
    }
    if (!(params.delta1 > 0.0 && params.delta2 > 0.0 && params.delta3 > 0.0) ||
        !(params.lambda > 1.0) || !(params.J >= 1.0)) {
        throw std::invalid_argument("coupling thresholds require delta_i > 0, lambda > 1, J >= 1");
    }
    const int n = target.n;
    const int d = target.d;
    if (static_cast<int>(dw.size()) != steps * d) {
        throw std::invalid_argument("noise array length does not match the step grid");
    }

    const step_factors factors = step_factors::make(g, h);
    const double omega_bound = omega_hat_bound_value(g, params, reference);
    const double lambda = params.lambda;

    coupling_result res;
    lift_state y = y0;
    lift_state yh = y0;
    lift_state diff = lift_state::zero(g.size(), n);

    double i1 = 0.0, i2 = 0.0, v_int = 0.0;
    bool frozen = false;

    std::vector<double> x(static_cast<std::size_t>(n)), xh(static_cast<std::size_t>(n));
    std::vector<double> b(static_cast<std::size_t>(n)), bh(static_cast<std::size_t>(n));
    matrix sig(n, d), sigh(n, d);

    for (int i = 0; i <= steps; ++i) {
        const double t = i * h;
        for (std::size_t j = 0; j < diff.v.size(); ++j) {
            diff.v[j] = y.v[j] - yh.v[j];
        }
        const std::vector<double> z = integral_map(g, diff, params.m);
        const double z2 = squared_norm(z);
        const double nm2 = [&] {
            const state_norms nm = norms(g, diff, params.m);
            return nm.m * nm.m;
        }();
        const double q = theta_rm_quadratic(g, diff, params.m);

        if (!res.zeta_fired) {
            if (v_int >= params.J) {
                res.zeta_fired = true;
                res.zeta = t;
            } else if (t >= params.J - 1e-12) {
                res.zeta_fired = true;
                res.zeta = params.J;
            }
        }
        if (!res.tau_fired && (i1 >= params.delta1 || i2 >= params.delta2 || nm2 >= params.delta3)) {
            res.tau_fired = true;
            res.tau = t;
            res.tau_clause = i1 >= params.delta1 ? 1 : (i2 >= params.delta2 ? 2 : 3);
            res.i1_at_tau = i1;
            res.i1_overshoot = std::max(0.0, i1 - params.delta1);
        }
        if (!frozen) {
            const double lyap = nm2 + 2.0 * i2 + 2.0 * (lambda - 1.0) * i1;
            res.lyap_max = std::max(res.lyap_max, lyap);
            if (record_lyapunov) {
                res.lyapunov.push_back(lyap);
            }
            if (res.tau_fired || res.zeta_fired) {
                frozen = true;  // the stopped functional keeps its value at tau ^ zeta
            }
        } else if (record_lyapunov) {
            res.lyapunov.push_back(res.lyapunov.back());
        }
        if (i == steps) {
            break;
        }

        auto xv = integral_map(g, y, params.M);
        auto xhv = integral_map(g, yh, params.M_bar);
        std::copy(xv.begin(), xv.end(), x.begin());
        std::copy(xhv.begin(), xhv.end(), xh.begin());
        target.drift(x.data(), b.data());
        target.diffusion(x.data(), sig.a.data());
        reference.drift(xh.data(), bh.data());
        reference.diffusion(xh.data(), sigh.a.data());
        if (!all_finite(b) || !all_finite(sig.a) || !all_finite(bh) || !all_finite(sigh.a)) {
            std::ostringstream os;
            os << "non-finite coefficient value at step " << i << ", coupled path aborted";
            res.ok = false;
            res.diagnostic = os.str();
            return res;
        }

        // Control gate: active on [0, tau) and only while the inclusive
        // Delta1 budget is not exceeded, so the Girsanov energy obeys
        // lambda^2 delta1 / c_ue exactly.
        const bool active = !res.tau_fired && (i1 + z2 * h <= params.delta1) && z2 > 0.0;
        if (active) {
            matrix gram(n, n);
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c) {
                    double s = 0.0;
                    for (int kk = 0; kk < d; ++kk) {
                        s += sigh(r, kk) * sigh(c, kk);
                    }
                    gram(r, c) = s;
                }
            }
            if (!cholesky(gram)) {
                res.ok = false;
                res.diagnostic = "sigma sigma^T solve failed (ellipticity violated numerically)";
                return res;
            }
            const std::vector<double> w = cholesky_solve(gram, z);
            double v2 = 0.0;
            for (int kk = 0; kk < d; ++kk) {
                double vk = 0.0;
                for (int r = 0; r < n; ++r) {
                    vk += sigh(r, kk) * w[static_cast<std::size_t>(r)];
                }
                vk *= lambda;
                v2 += vk * vk;
            }
            res.energy += v2 * h;
            res.control_i1 += z2 * h;
            res.control_was_active = true;
            for (int c = 0; c < n; ++c) {
                bh[static_cast<std::size_t>(c)] += lambda * z[static_cast<std::size_t>(c)];
            }
        }

        v_int += [&] {
            const state_norms nm = norms(g, y, params.m);
            return nm.v_mu * nm.v_mu * h;
        }();

        const std::span<const double> dwi(dw.data() + static_cast<std::size_t>(i) * d,
                                          static_cast<std::size_t>(d));
        ou_step(factors, y, b, sig, dwi);
        ou_step(factors, yh, bh, sigh, dwi);

        i1 += z2 * h;
        i2 += q * h;
        res.max_i1_step = std::max(res.max_i1_step, z2 * h);
    }

    res.in_omega_hat = res.lyap_max <= omega_bound;
    res.in_omega_hat_strict = res.lyap_max <= params.delta3 / 2.0;
    return res;
}

coupling_ensemble simulate_coupled(const lift_grid& g, const coefficient_pair& target,
                                   const coefficient_pair& reference,
                                   const coupling_params& params, const lift_state& y0,
                                   const coupling_config& cfg) {
    const double raw = cfg.T / cfg.h;
    const int steps = static_cast<int>(std::llround(raw));
    if (steps < 1 || std::abs(raw - steps) > 1e-9 * std::max(1.0, raw)) {
        throw std::invalid_argument("T/h must be a positive integer within rounding");
    }

    coupling_ensemble ens;
    ens.T = cfg.T;
    ens.h = cfg.h;
    ens.steps = steps;
    ens.paths.resize(static_cast<std::size_t>(cfg.n_paths));

    const int d = target.d;
    parallel_paths(cfg.n_paths, cfg.threads, [&](int p) {
        normal_stream rng(derive_seed(cfg.seed, cfg.seed_tag, static_cast<std::uint64_t>(p)));
        std::vector<double> dw(static_cast<std::size_t>(steps) * d);
        const double sqrt_h = std::sqrt(cfg.h);
        for (double& v : dw) {
            v = sqrt_h * rng.next();
        }
        ens.paths[static_cast<std::size_t>(p)] = simulate_coupled_path(
            g, target, reference, params, cfg.h, steps, y0, dw, cfg.record_lyapunov);
    });

    coupling_aggregate agg;
    agg.omega_hat_bound = omega_hat_bound_value(g, params, reference);
    agg.control_prob_bound = control_prob_bound_value(g, params, reference);
    agg.energy_cap = params.lambda * params.lambda * params.delta1 / reference.c_ue;
    agg.tv_bound_analytic = params.lambda * std::sqrt(params.delta1) / (2.0 * std::sqrt(reference.c_ue));
    int violations = 0;
    for (const auto& r : ens.paths) {
        if (!r.ok) {
            continue;
        }
        ++agg.paths_ok;
        agg.mean_energy += r.energy;
        agg.max_energy = std::max(agg.max_energy, r.energy);
        if (!r.in_omega_hat) {
            ++violations;
        }
    }
    if (agg.paths_ok > 0) {
        agg.mean_energy /= agg.paths_ok;
        agg.violation_rate = static_cast<double>(violations) / agg.paths_ok;
        agg.violation_se = std::sqrt(agg.violation_rate * (1.0 - agg.violation_rate) /
                                     agg.paths_ok) +
                           1.0 / agg.paths_ok;
        agg.tv_bound_estimate = 0.5 * std::sqrt(agg.mean_energy);
    }
    ens.aggregate = agg;
    return ens;
}

}  // namespace sve
