// Acceptance suite: verification battery for the toolkit's contracts, one
// pass/fail line per criterion. Exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "sve/cnr.hpp"
#include "sve/csv.hpp"
#include "sve/experiment.hpp"
#include "sve/lawdist.hpp"
#include "sve/volterra_sim.hpp"
#include "test_instances.hpp"

using namespace sve;

namespace {

int g_failures = 0;

void run_criterion(int index, const std::string& name, double budget_seconds,
                   const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    const auto start = std::chrono::steady_clock::now();
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
        ok = false;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > budget_seconds) {
        ok = false;
        detail += (detail.empty() ? "" : "; ") + std::string("over time budget ") +
                  std::to_string(budget_seconds) + "s";
    }
    std::printf("[%s] %2d. %-34s (%6.2fs) %s\n", ok ? "PASS" : "FAIL", index, name.c_str(),
                elapsed, detail.c_str());
    std::fflush(stdout);
    if (!ok) {
        ++g_failures;
    }
}

bool files_identical(const std::filesystem::path& a, const std::filesystem::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return fa && fb && sa.str() == sb.str();
}

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    }
    return out;
}

// --- criteria ---------------------------------------------------------------

bool fractional_closed_forms(std::string& detail) {
    double worst = 0.0;
    for (double alpha : {0.6, 0.75, 0.9}) {
        const double eta = default_eta(alpha);
        kernel k = kernel::fractional(alpha);
        for (double m : {1.0, 10.0, 100.0}) {
            const double r_err = std::abs(k.R_m(m) / fractional_R_m_closed_form(alpha, eta, m) - 1.0);
            const double e_err =
                std::abs(k.eps_m(m) / fractional_eps_m_closed_form(alpha, eta, m) - 1.0);
            worst = std::max({worst, r_err, e_err});
        }
    }
    detail = "max relative error vs closed forms: " + format_g17(worst);
    return worst < 1e-6;
}

bool counterexample_kernel(std::string& detail) {
    kernel k = kernel::log_example();
    const double expect = 1.0 / std::log(2.0);
    const double err = std::abs(k.assumption_integral() / expect - 1.0);
    detail = "assumption integral " + format_g17(k.assumption_integral()) + " vs 1/log 2, rel err " +
             format_g17(err);
    return err < 1e-6;
}

bool measure_limits(std::string& detail) {
    kernel k = kernel::fractional(0.75);
    double prev_prod = 1e300, prev_ratio = 1e300;
    for (double m : {1.0, 10.0, 100.0, 1000.0, 10000.0}) {
        const double prod = k.R_m(m) * k.eps_m(m);
        const double ratio = k.eps_m(m) / k.weight()(m);
        if (!(prod < prev_prod) || !(ratio < prev_ratio)) {
            detail = "not strictly decreasing at m = " + format_g17(m);
            return false;
        }
        prev_prod = prod;
        prev_ratio = ratio;
    }
    detail = "R_m eps_m and eps_m/r(m) strictly decreasing over m in {1..1e4}";
    return true;
}

bool balance_grid(std::string& detail) {
    int checked = 0;
    for (double alpha : {0.55, 0.65, 0.75, 0.85, 0.95}) {
        kernel k = kernel::fractional(alpha);
        for (double gamma : {0.55, 0.65, 0.75, 0.85, 0.95}) {
            const bool analytic = alpha * gamma > 0.5;
            const balance_report rep = check_balance(k, modulus_spec::hoelder(gamma, 1.0));
            if (rep.satisfied != analytic) {
                detail = "mismatch at alpha=" + format_g17(alpha) + ", gamma=" + format_g17(gamma) +
                         " (" + rep.detail + ")";
                return false;
            }
            ++checked;
        }
    }
    detail = std::to_string(checked) + " verdicts agree with alpha*gamma > 1/2";
    return true;
}

bool discrete_equivalence(std::string& detail) {
    kernel k = kernel::fractional(0.75, 0.5);
    lift_grid g = lift_grid::from_kernel(k, 50, 1e-3, 1e4);
    coefficient_pair p = make_pair_from_registry("power_drift", {{"beta", 0.5}}, "constant_sigma",
                                                 {{"s", 1.0}});
    sim_config cfg;
    cfg.T = 1.0;
    cfg.h = 1.0 / 256.0;
    cfg.n_paths = 100;
    cfg.seed = 515;
    cfg.threads = 4;
    cfg.record_driver = true;
    path_ensemble ens = simulate(g, p, lift_state::zero(g.size(), 1), cfg);
    kernel_weights kw =
        kernel_weights::from_grid(g, cfg.h, ens.steps, drift_weight_rule::cell_average);
    const auto forcing = zero_forcing(ens.steps, 1);
    double worst = 0.0;
    for (const auto& rec : ens.paths) {
        const auto direct = direct_convolution(kw, forcing, rec.driver);
        double scale = 1.0;
        for (double v : rec.x) {
            scale = std::max(scale, std::abs(v));
        }
        for (std::size_t i = 0; i < rec.x.size(); ++i) {
            worst = std::max(worst, std::abs(rec.x[i] - direct[i]) / scale);
        }
    }
    detail = "max relative gap over 100 paths x 256 steps: " + format_g17(worst);
    return worst <= 1e-12;
}

bool kernel_approximation(std::string& detail) {
    kernel k = kernel::fractional(0.75);
    const auto t_grid = log_grid(0.01, 1.0, 50);
    const double e100 =
        kernel_error(lift_grid::from_kernel(k, 100, 1e-4, 1e4), k, t_grid).max_rel_err;
    const double e200 =
        kernel_error(lift_grid::from_kernel(k, 200, 1e-4, 1e4), k, t_grid).max_rel_err;
    detail = "sup rel err N=100: " + format_g17(e100) + ", N=200: " + format_g17(e200);
    return e100 < 1e-3 && e200 <= e100;
}

bool closed_form_branch(std::string& detail) {
    if (closed_form_branch_constant(1.0, 0.5) != 0.25) {
        detail = "C(1, 1/2) != 1/4";
        return false;
    }
    double prev = 1e300;
    std::ostringstream os;
    for (int level = 6; level <= 10; ++level) {
        const double r = residual_check(0.75, 0.5, 0.0, 1.0, std::pow(2.0, -level));
        if (!(r < prev)) {
            detail = "residual not decreasing at h = 2^-" + std::to_string(level);
            return false;
        }
        prev = r;
    }
    os << "C(1,1/2) = 1/4 exact; residual at h=2^-10: " << format_g17(prev);
    detail = os.str();
    return true;
}

bool lemma_inequalities(std::string& detail) {
    normal_stream rng(derive_seed(909, "acceptance-lemma", 0));
    int violations = 0;
    for (int it = 0; it < 1000; ++it) {
        auto inst = test_instances::make_instance(rng, 1 + (it % 2));
        const double m = 1.0 + 99.0 * rng.next_uniform();
        const truncation tm = truncation::at(m);
        const truncation tM = rng.next_uniform() < 0.3
                                  ? truncation::infinite()
                                  : truncation::at(m * (1.0 + 20.0 * rng.next_uniform()));
        const auto nm = norms(inst.grid, inst.state, tm);
        const double floor = inst.grid.weight_function()(m);
        if (nm.h_mu > nm.m * (1.0 + 1e-12) ||
            nm.m > nm.h_mu / std::sqrt(floor) * (1.0 + 1e-12)) {
            ++violations;
        }
        const auto mu_m = integral_map(inst.grid, inst.state, tm);
        if (squared_norm(mu_m) > inst.grid.R_m(tm) * nm.m * nm.m * (1.0 + 1e-12) + 1e-300) {
            ++violations;
        }
        const auto mu_M = integral_map(inst.grid, inst.state, tM);
        double gap2 = 0.0;
        for (std::size_t c = 0; c < mu_M.size(); ++c) {
            gap2 += (mu_M[c] - mu_m[c]) * (mu_M[c] - mu_m[c]);
        }
        const double rhs = inst.grid.eps_m(tm) * theta_rm_quadratic(inst.grid, inst.state, tm);
        if (gap2 > rhs * (1.0 + 1e-9) + 1e-300) {
            ++violations;
        }
    }
    detail = std::to_string(violations) + " violations over 1000 random instances";
    return violations == 0;
}

bool schedule_identities(std::string& detail) {
    kernel k = kernel::fractional(0.75);
    const modulus_spec rho_b = modulus_spec::hoelder(0.5, 2.0);
    const modulus_spec rho_sigma = modulus_spec::lipschitz(1.0);
    cnr_schedule sched = build_schedule(k, rho_b, rho_sigma, 5, cnr_mode::singular);
    const double cap = std::pow(108.0, -4.0);
    for (const auto& row : sched.rows) {
        if (row.lambda_minus_one * row.delta1 != row.delta3 / 2.0) {
            detail = "identity (lambda-1) delta1 = delta3/2 broken at k=" + std::to_string(row.k);
            return false;
        }
        if (!(row.S <= cap)) {
            detail = "S_k exceeds 108^-4 at k=" + std::to_string(row.k);
            return false;
        }
    }
    // refusal when the balance condition fails
    try {
        build_schedule(kernel::fractional(0.6), rho_b, modulus_spec::hoelder(0.6, 1.0), 2,
                       cnr_mode::singular);
        detail = "schedule did not refuse an unbalanced instance";
        return false;
    } catch (const schedule_refusal&) {
    }
    detail = "5 rows satisfy the identities exactly; unbalanced instance refused";
    return true;
}

bool girsanov_energy_criterion(std::string& detail) {
    kernel k = kernel::exponential_sum({{0.6, 0.0}, {0.4, 2.0}});
    lift_grid g = lift_grid::from_kernel(k, 2, 0.0, 3.0);
    coefficient_pair target =
        make_pair_from_registry("sin_drift", {{"a", 1.0}}, "constant_sigma", {{"s", 1.0}});
    coefficient_pair reference = mollify(target, 2e-4).pair;

    coupling_params params;
    params.delta0 = 2e-4;
    params.delta1 = 1e-5;
    params.delta2 = 0.05;
    params.delta3 = 0.1296;
    params.lambda = 2.0;
    params.J = 1.0;
    params.m = truncation::at(1.0);
    params.M = truncation::infinite();
    params.M_bar = truncation::infinite();

    coupling_config cfg;
    cfg.T = 1.0;
    cfg.h = 1.0 / 512.0;
    cfg.n_paths = 1000;
    cfg.seed = 1010;
    cfg.threads = 4;
    coupling_ensemble ens =
        simulate_coupled(g, target, reference, params, lift_state::zero(g.size(), 1), cfg);

    const double cap = ens.aggregate.energy_cap;
    for (const auto& r : ens.paths) {
        if (!r.ok || r.energy > cap * (1.0 + 1e-12)) {
            detail = "per-path energy bound violated";
            return false;
        }
    }
    const double budget = ens.aggregate.control_prob_bound + 3.0 * ens.aggregate.violation_se;
    std::ostringstream os;
    os << "max energy " << format_g17(ens.aggregate.max_energy) << " <= cap " << format_g17(cap)
       << "; violation " << format_g17(ens.aggregate.violation_rate) << " <= "
       << format_g17(budget);
    detail = os.str();
    return ens.aggregate.violation_rate <= budget;
}

bool uniqueness_evidence(std::string& detail) {
    const double alpha = 0.75, beta = 0.5;
    kernel k = kernel::fractional(alpha, 0.5);
    coefficient_pair noisy =
        make_pair_from_registry("power_drift", {{"beta", beta}}, "constant_sigma", {{"s", 1.0}});
    const double T = 1.0;
    const double h = 1.0 / 512.0;
    const int steps = 512;
    const int samples = 10000;

    lift_grid g = lift_grid::from_kernel(k, 100, 1e-4, 1e4);
    sim_config scfg;
    scfg.T = T;
    scfg.h = h;
    scfg.n_paths = samples;
    scfg.seed = 2021;
    scfg.threads = 4;
    path_ensemble lifted = simulate(g, noisy, lift_state::zero(g.size(), 1), scfg);

    direct_config dcfg;
    dcfg.T = T;
    dcfg.h = h;
    dcfg.n_paths = samples;
    dcfg.seed = 4242;
    dcfg.threads = 4;
    kernel_weights kw = kernel_weights::from_kernel(k, h, steps, drift_weight_rule::point);
    path_ensemble direct = simulate_direct(kw, noisy, zero_forcing(steps, 1), dcfg);

    const auto sa = marginal_samples(lifted, T, 0);
    const auto sb = marginal_samples(direct, T, 0);
    const marginal_distance_result md = marginal_distance(sa, sb);
    const double crit = ks_two_sample_critical(sa.size(), sb.size(), 0.01);

    // multi-solution exhibit with sigma = 0 (reported branch separation)
    coefficient_pair det =
        make_pair_from_registry("power_drift", {{"beta", beta}}, "constant_sigma", {{"s", 0.0}});
    direct_config det_cfg;
    det_cfg.T = T;
    det_cfg.h = h;
    det_cfg.n_paths = 1;
    det_cfg.rule = drift_weight_rule::cell_average;
    kernel_weights kw_cell = kernel_weights::from_kernel(k, h, steps, drift_weight_rule::cell_average);
    const double up =
        simulate_direct(kw_cell, det, kernel_multiple_forcing(k, h, steps, 1e-4), det_cfg)
            .paths[0].x.back();
    const double down =
        simulate_direct(kw_cell, det, kernel_multiple_forcing(k, h, steps, -1e-4), det_cfg)
            .paths[0].x.back();

    std::ostringstream os;
    os << "KS(t=1) = " << format_g17(md.ks) << " < " << format_g17(crit)
       << "; sigma=0 branch separation " << format_g17(up - down);
    detail = os.str();
    return md.ks < crit && (up - down) > 0.1;
}

bool determinism(std::string& detail) {
    const std::string config_text = R"({
      "kernel": {"kind": "fractional", "alpha": 0.75},
      "grid": {"nodes": 40, "theta_min": 1e-3, "theta_max": 1e3},
      "coefficients": {
        "drift": {"name": "power_drift", "params": {"beta": 0.5}},
        "sigma": {"name": "constant_sigma", "params": {"s": 1.0}}
      },
      "sim": {"T": 0.5, "h": 0.0078125, "paths": 64, "seed": 77}
    })";
    experiment_config cfg = parse_config_text(config_text);
    const auto base = std::filesystem::temp_directory_path() / "sve_acceptance_det";
    std::filesystem::remove_all(base);

    run_overrides ov1;
    ov1.threads = 1;
    run_overrides ov4;
    ov4.threads = 4;
    run_experiment("simulate-lift", cfg, base / "t1", ov1);
    run_experiment("simulate-lift", cfg, base / "t4", ov4);
    run_experiment("simulate-lift", cfg, base / "t1b", ov1);

    const bool threads_equal =
        files_identical(base / "t1" / "ensemble.csv", base / "t4" / "ensemble.csv");
    const bool rerun_equal =
        files_identical(base / "t1" / "ensemble.csv", base / "t1b" / "ensemble.csv");
    detail = std::string("threads {1,4} identical: ") + (threads_equal ? "yes" : "no") +
             ", rerun identical: " + (rerun_equal ? "yes" : "no");
    return threads_equal && rerun_equal;
}

}  // namespace

int main() {
    std::printf("acceptance suite (version %s)\n", kVersion);
    run_criterion(1, "fractional closed forms", 1.0, fractional_closed_forms);
    run_criterion(2, "counterexample kernel mass", 1.0, counterexample_kernel);
    run_criterion(3, "measure functional limits", 1.0, measure_limits);
    run_criterion(4, "balance verdict grid", 5.0, balance_grid);
    run_criterion(5, "discrete lift equivalence", 10.0, discrete_equivalence);
    run_criterion(6, "kernel approximation", 1.0, kernel_approximation);
    run_criterion(7, "closed-form branch residual", 30.0, closed_form_branch);
    run_criterion(8, "norm/map inequalities", 5.0, lemma_inequalities);
    run_criterion(9, "schedule identities", 1.0, schedule_identities);
    run_criterion(10, "girsanov energy bounds", 60.0, girsanov_energy_criterion);
    run_criterion(11, "uniqueness evidence", 300.0, uniqueness_evidence);
    run_criterion(12, "byte-reproducibility", 60.0, determinism);
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
    } else {
        std::printf("%d criteria FAILED\n", g_failures);
    }
    return g_failures;
}
