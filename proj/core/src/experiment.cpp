#include "sve/experiment.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sve/csv.hpp"
#include "sve/lawdist.hpp"
#include "sve/rng.hpp"
#include "sve/volterra_sim.hpp"

namespace sve {
namespace {

using nlohmann::json;

std::uint64_t text_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

struct artifact_sink {
    std::filesystem::path dir;
    std::vector<std::filesystem::path> files;

    std::filesystem::path file(const std::string& name) {
        std::filesystem::create_directories(dir);
        files.push_back(dir / name);
        return files.back();
    }
};

void write_manifest(artifact_sink& sink, const experiment_config& cfg, std::uint64_t seed,
                    const std::string& recipe) {
    json m;
    m["recipe"] = recipe;
    m["version"] = kVersion;
    m["seed"] = seed;
    m["config_hash"] = text_hash(cfg.raw_text);
    json files = json::array();
    for (const auto& f : sink.files) {
        files.push_back({{"name", f.filename().string()},
                         {"content_hash_fnv1a64", file_content_hash(f)}});
    }
    m["files"] = files;
    std::ofstream out(sink.dir / "manifest.json");
    out << m.dump(2) << "\n";
}

std::vector<double> log_spaced(double lo, double hi, int count) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    }
    return out;
}

run_result recipe_kernel_info(const experiment_config& cfg, artifact_sink& sink,
                              std::uint64_t seed) {
    kernel k = build_kernel(cfg.kernel_spec);
    coefficient_pair pair = build_pair(cfg.coeffs);

    {
        csv_writer w(sink.file("kernel_values.csv"));
        w.write_row({"t", "K"});
        for (double t : log_spaced(0.01, 10.0, 60)) {
            w.write_row({format_g17(t), format_g17(k(t))});
        }
    }
    {
        csv_writer w(sink.file("rm_table.csv"));
        w.write_row({"m", "R_m", "eps_m", "R_rho_ratio"});
        for (double m : {1.0, 10.0, 100.0, 1000.0, 10000.0}) {
            const double R = k.R_m(m);
            const double eps = k.eps_m(m);
            const double ratio = eps > 0.0 ? R * pair.rho_sigma(eps * eps) / eps : 0.0;
            w.write_row({format_g17(m), format_g17(R), format_g17(eps), format_g17(ratio)});
        }
    }
    balance_report bal = check_balance(k, pair.rho_sigma);
    {
        csv_writer w(sink.file("balance.csv"));
        w.write_row({"mode", "level", "ratio"});
        for (std::size_t i = 0; i < bal.levels.size(); ++i) {
            w.write_row({bal.singular_mode ? "singular" : "regular", format_g17(bal.levels[i]),
                         format_g17(bal.ratios[i])});
        }
    }

    run_result res;
    std::ostringstream os;
    os << "kernel: " << k.describe() << "\n"
       << "assumption integral: " << format_g17(k.assumption_integral()) << "\n"
       << "balance verdict: " << (bal.satisfied ? "satisfied" : "violated") << " (" << bal.detail
       << ")";
    res.summary = os.str();
    (void)seed;
    return res;
}

run_result recipe_discretize(const experiment_config& cfg, artifact_sink& sink) {
    kernel k = build_kernel(cfg.kernel_spec);
    lift_grid g = build_grid(k, cfg.grid_spec);
    {
        csv_writer w(sink.file("grid.csv"));
        w.write_row({"theta", "weight", "r_theta"});
        for (std::size_t j = 0; j < g.size(); ++j) {
            w.write_row({format_g17(g.thetas()[j]), format_g17(g.weights()[j]),
                         format_g17(g.r_values()[j])});
        }
    }
    kernel_error_report rep = kernel_error(g, k, log_spaced(0.01, 1.0, 40));
    {
        csv_writer w(sink.file("kernel_error.csv"));
        w.write_row({"t", "K", "K_N", "rel_err"});
        for (const auto& row : rep.rows) {
            w.write_row({format_g17(row.t), format_g17(row.k_exact), format_g17(row.k_grid),
                         format_g17(row.rel_err)});
        }
    }
    run_result res;
    std::ostringstream os;
    os << "grid nodes: " << g.size() << ", sup relative kernel error on [0.01, 1]: "
       << format_g17(rep.max_rel_err);
    res.summary = os.str();
    return res;
}

run_result recipe_simulate_lift(const experiment_config& cfg, artifact_sink& sink,
                                std::uint64_t seed, int threads, bool dump_state) {
    kernel k = build_kernel(cfg.kernel_spec);
    lift_grid g = build_grid(k, cfg.grid_spec);
    coefficient_pair pair = build_pair(cfg.coeffs);

    sim_config sc;
    sc.T = cfg.sim.T;
    sc.h = cfg.sim.h;
    sc.n_paths = cfg.sim.paths;
    sc.seed = seed;
    sc.threads = threads;
    sc.trunc = cfg.sim.truncation_infinite ? truncation::infinite()
                                           : truncation::at(cfg.sim.truncation_m);
    sc.record_states = dump_state;
    if (dump_state && (g.size() > 64 || pair.n != 1)) {
        throw config_error("sim", "--dump-state supports scalar states on grids of at most 64 nodes");
    }
    lift_state y0 = lift_state::constant(g.size(), std::vector<double>{cfg.sim.x0});
    path_ensemble ens = simulate(g, pair, y0, sc);

    if (dump_state) {
        std::vector<std::vector<double>> states;
        states.reserve(ens.paths.size());
        for (const auto& rec : ens.paths) {
            states.push_back(rec.states);
        }
        write_ensemble_csv(sink.file("ensemble.csv"), ens, &states, g.size());
    } else {
        write_ensemble_csv(sink.file("ensemble.csv"), ens);
    }

    run_result res;
    std::ostringstream os;
    os << "lift ensemble: " << ens.paths.size() << " paths, " << ens.steps << " steps, aborted "
       << ens.aborted;
    res.summary = os.str();
    return res;
}

run_result recipe_simulate_direct(const experiment_config& cfg, artifact_sink& sink,
                                  std::uint64_t seed, int threads) {
    kernel k = build_kernel(cfg.kernel_spec);
    coefficient_pair pair = build_pair(cfg.coeffs);
    const int steps = static_cast<int>(std::llround(cfg.sim.T / cfg.sim.h));
    const drift_weight_rule rule = cfg.sim.drift_rule == "point" ? drift_weight_rule::point
                                                                 : drift_weight_rule::cell_average;

    kernel_weights kw;
    std::vector<double> forcing;
    if (cfg.sim.kernel_source == "grid") {
        lift_grid g = build_grid(k, cfg.grid_spec);
        kw = kernel_weights::from_grid(g, cfg.sim.h, steps, rule);
        forcing = cfg.sim.x0 == 0.0 ? zero_forcing(steps, 1)
                                    : grid_kernel_multiple_forcing(g, cfg.sim.h, steps, cfg.sim.x0);
    } else {
        kw = kernel_weights::from_kernel(k, cfg.sim.h, steps, rule);
        forcing = cfg.sim.x0 == 0.0 ? zero_forcing(steps, 1)
                                    : kernel_multiple_forcing(k, cfg.sim.h, steps, cfg.sim.x0);
    }

    direct_config dc;
    dc.T = cfg.sim.T;
    dc.h = cfg.sim.h;
    dc.n_paths = cfg.sim.paths;
    dc.seed = seed;
    dc.threads = threads;
    dc.rule = rule;
    path_ensemble ens = simulate_direct(kw, pair, forcing, dc);
    write_ensemble_csv(sink.file("ensemble.csv"), ens);

    run_result res;
    std::ostringstream os;
    os << "direct ensemble: " << ens.paths.size() << " paths, " << ens.steps << " steps, aborted "
       << ens.aborted;
    res.summary = os.str();
    return res;
}

run_result recipe_demo_regularization(const experiment_config& cfg, artifact_sink& sink,
                                      std::uint64_t seed, int threads,
                                      const run_overrides& ov) {
    demo_config dc = cfg.demo;
    if (ov.alpha) {
        dc.alpha = *ov.alpha;
    }
    if (ov.beta) {
        dc.beta = *ov.beta;
    }
    const int steps = static_cast<int>(std::llround(dc.T / dc.h));

    kernel_config kc;
    kc.kind = "fractional";
    kc.alpha = dc.alpha;
    kernel k = build_kernel(kc);

    coefficient_pair det = make_pair_from_registry("power_drift", {{"beta", dc.beta}},
                                                   "constant_sigma", {{"s", 0.0}});
    kernel_weights kw = kernel_weights::from_kernel(k, dc.h, steps, drift_weight_rule::cell_average);

    {
        csv_writer w(sink.file("demo_branches.csv"));
        w.write_row({"t", "branch_plus", "branch_minus", "zero"});
        for (int i = 0; i <= steps; ++i) {
            const double t = i * dc.h;
            const double b = closed_form_solution(dc.alpha, dc.beta, 0.0, t);
            w.write_row({format_g17(t), format_g17(b), format_g17(-b), format_g17(0.0)});
        }
    }
    {
        direct_config drc;
        drc.T = dc.T;
        drc.h = dc.h;
        drc.n_paths = 1;
        drc.rule = drift_weight_rule::cell_average;
        auto run_perturbed = [&](double delta) {
            auto forcing = delta == 0.0 ? zero_forcing(steps, 1)
                                        : kernel_multiple_forcing(k, dc.h, steps, delta);
            return simulate_direct(kw, det, forcing, drc).paths[0].x;
        };
        auto up = run_perturbed(dc.delta);
        auto down = run_perturbed(-dc.delta);
        auto stay = run_perturbed(0.0);
        csv_writer w(sink.file("demo_perturbed.csv"));
        w.write_row({"t", "x_plus_delta", "x_minus_delta", "x_zero"});
        for (int i = 0; i <= steps; ++i) {
            w.write_row({format_g17(i * dc.h), format_g17(up[static_cast<std::size_t>(i)]),
                         format_g17(down[static_cast<std::size_t>(i)]),
                         format_g17(stay[static_cast<std::size_t>(i)])});
        }
    }

    // noise-on ensembles: unit diffusion, lift and direct schemes
    coefficient_pair noisy = make_pair_from_registry("power_drift", {{"beta", dc.beta}},
                                                     "constant_sigma", {{"s", 1.0}});
    grid_config gc;  // default 100-node grid
    lift_grid g = build_grid(k, gc);
    sim_config sc;
    sc.T = dc.T;
    sc.h = dc.h;
    sc.n_paths = dc.noise_paths;
    sc.seed = derive_seed(seed, "demo-lift", 0);
    sc.threads = threads;
    path_ensemble lifted = simulate(g, noisy, lift_state::zero(g.size(), 1), sc);
    write_ensemble_csv(sink.file("demo_noise_lift.csv"), lifted);

    direct_config drc;
    drc.T = dc.T;
    drc.h = dc.h;
    drc.n_paths = dc.noise_paths;
    drc.seed = derive_seed(seed, "demo-direct", 0);
    drc.threads = threads;
    path_ensemble direct =
        simulate_direct(kernel_weights::from_kernel(k, dc.h, steps, drift_weight_rule::point),
                        noisy, zero_forcing(steps, 1), drc);
    write_ensemble_csv(sink.file("demo_noise_direct.csv"), direct);

    auto sa = marginal_samples(lifted, dc.T, 0);
    auto sb = marginal_samples(direct, dc.T, 0);
    marginal_distance_result md = marginal_distance(sa, sb);
    {
        csv_writer w(sink.file("demo_report.csv"));
        w.write_row({"ks", "wasserstein1", "ks_critical_1pct"});
        w.write_row({format_g17(md.ks), format_g17(md.wasserstein1),
                     format_g17(ks_two_sample_critical(sa.size(), sb.size(), 0.01))});
    }

    run_result res;
    std::ostringstream os;
    os << "regularization demo at alpha=" << dc.alpha << ", beta=" << dc.beta
       << ": noise-on marginal KS(T) = " << format_g17(md.ks);
    res.summary = os.str();
    return res;
}

run_result recipe_schedule(const experiment_config& cfg, artifact_sink& sink) {
    kernel k = build_kernel(cfg.kernel_spec);
    coefficient_pair pair = build_pair(cfg.coeffs);
    const cnr_mode mode = cfg.cnr.mode == "singular" ? cnr_mode::singular : cnr_mode::regular;
    cnr_schedule sched = build_schedule(k, pair.rho_b, pair.rho_sigma, cfg.cnr.k_max, mode);
    csv_writer w(sink.file("schedule.csv"));
    w.write_row({"k", "m", "M", "level", "R_m", "S", "delta0", "delta1", "delta2", "delta3",
                 "lambda", "J", "bandwidth_b", "bandwidth_sigma"});
    for (const auto& r : sched.rows) {
        w.write_row({std::to_string(r.k), format_g17(r.m), format_g17(r.M), format_g17(r.level),
                     format_g17(r.R_m), format_g17(r.S), format_g17(r.delta0),
                     format_g17(r.delta1), format_g17(r.delta2), format_g17(r.delta3),
                     format_g17(r.lambda), format_g17(r.J), format_g17(r.bandwidth_b),
                     format_g17(r.bandwidth_sigma)});
    }
    run_result res;
    res.summary = "schedule emitted: " + std::to_string(sched.rows.size()) + " rows";
    return res;
}

run_result recipe_cnr_run(const experiment_config& cfg, artifact_sink& sink, std::uint64_t seed,
                          int threads) {
    kernel k = build_kernel(cfg.kernel_spec);
    lift_grid g = build_grid(k, cfg.grid_spec);
    coefficient_pair target = build_pair(cfg.coeffs);

    coupling_params params;
    if (cfg.cnr.from_schedule_row) {
        const cnr_mode mode = cfg.cnr.mode == "singular" ? cnr_mode::singular : cnr_mode::regular;
        cnr_schedule sched = build_schedule(k, target.rho_b, target.rho_sigma,
                                            std::max(cfg.cnr.k_max, cfg.cnr.row), mode);
        params = coupling_params::from_row(sched.rows.at(static_cast<std::size_t>(cfg.cnr.row - 1)));
    } else {
        params.delta0 = cfg.cnr.delta0;
        params.delta1 = cfg.cnr.delta1;
        params.delta2 = cfg.cnr.delta2;
        params.delta3 = cfg.cnr.delta3;
        params.lambda = cfg.cnr.lambda;
        params.J = cfg.cnr.J;
        params.m = truncation::at(cfg.cnr.m_level);
        params.M = truncation::infinite();
        params.M_bar = truncation::infinite();
    }
    coefficient_pair reference =
        truncate(mollify(target, params.delta0).pair, cfg.cnr.truncation_radius);

    coupling_config cc;
    cc.T = cfg.cnr.T;
    cc.h = cfg.cnr.h;
    cc.n_paths = cfg.cnr.paths;
    cc.seed = seed;
    cc.threads = threads;
    lift_state y0 = lift_state::constant(g.size(), std::vector<double>{cfg.cnr.x0});
    coupling_ensemble ens = simulate_coupled(g, target, reference, params, y0, cc);

    {
        csv_writer w(sink.file("cnr.csv"));
        w.write_row({"path_id", "tau", "tau_fired", "tau_clause", "zeta", "zeta_fired",
                     "in_omega_hat", "in_omega_hat_strict", "energy", "lyapunov_max"});
        for (std::size_t p = 0; p < ens.paths.size(); ++p) {
            const auto& r = ens.paths[p];
            if (!r.ok) {
                continue;
            }
            w.write_row({std::to_string(p), format_g17(r.tau_fired ? r.tau : ens.T),
                         std::to_string(r.tau_fired ? 1 : 0), std::to_string(r.tau_clause),
                         format_g17(r.zeta_fired ? r.zeta : ens.T),
                         std::to_string(r.zeta_fired ? 1 : 0),
                         std::to_string(r.in_omega_hat ? 1 : 0),
                         std::to_string(r.in_omega_hat_strict ? 1 : 0), format_g17(r.energy),
                         format_g17(r.lyap_max)});
        }
    }
    {
        const auto& a = ens.aggregate;
        csv_writer w(sink.file("cnr_aggregate.csv"));
        w.write_row({"paths_ok", "violation_rate", "violation_se", "control_prob_bound",
                     "omega_hat_bound", "energy_cap", "mean_energy", "max_energy",
                     "tv_bound_estimate", "tv_bound_analytic"});
        w.write_row({std::to_string(a.paths_ok), format_g17(a.violation_rate),
                     format_g17(a.violation_se), format_g17(a.control_prob_bound),
                     format_g17(a.omega_hat_bound), format_g17(a.energy_cap),
                     format_g17(a.mean_energy), format_g17(a.max_energy),
                     format_g17(a.tv_bound_estimate), format_g17(a.tv_bound_analytic)});
    }

    run_result res;
    std::ostringstream os;
    os << "coupled run: " << ens.aggregate.paths_ok << " paths, empirical violation "
       << format_g17(ens.aggregate.violation_rate) << " vs bound "
       << format_g17(ens.aggregate.control_prob_bound) << ", TV bound "
       << format_g17(ens.aggregate.tv_bound_estimate);
    res.summary = os.str();
    return res;
}

}  // namespace

run_result run_experiment(const std::string& recipe, const experiment_config& cfg,
                          const std::filesystem::path& out_dir, const run_overrides& ov) {
    artifact_sink sink;
    sink.dir = out_dir;
    const std::uint64_t seed = ov.seed.value_or(cfg.sim.seed);
    const int threads = ov.threads.value_or(cfg.sim.threads);

    run_result res;
    if (recipe == "kernel-info") {
        res = recipe_kernel_info(cfg, sink, seed);
    } else if (recipe == "discretize") {
        res = recipe_discretize(cfg, sink);
    } else if (recipe == "simulate-lift") {
        res = recipe_simulate_lift(cfg, sink, seed, threads, ov.dump_state);
    } else if (recipe == "simulate-direct") {
        res = recipe_simulate_direct(cfg, sink, seed, threads);
    } else if (recipe == "demo-regularization") {
        res = recipe_demo_regularization(cfg, sink, seed, threads, ov);
    } else if (recipe == "schedule") {
        res = recipe_schedule(cfg, sink);
    } else if (recipe == "cnr-run") {
        res = recipe_cnr_run(cfg, sink, seed, threads);
    } else {
        throw std::invalid_argument("unknown recipe '" + recipe + "'");
    }
    write_manifest(sink, cfg, seed, recipe);
    res.out_dir = sink.dir;
    res.files = sink.files;
    return res;
}

run_result compare_laws(const std::filesystem::path& a_csv, const std::filesystem::path& b_csv,
                        double t, const std::filesystem::path& out_dir, std::uint64_t seed) {
    path_ensemble a = read_ensemble_csv(a_csv);
    path_ensemble b = read_ensemble_csv(b_csv);
    auto sa = marginal_samples(a, t, 0);
    auto sb = marginal_samples(b, t, 0);
    marginal_distance_result md = marginal_distance(sa, sb);
    permutation_test_result pt = energy_permutation_test(a, b, 199, seed);

    artifact_sink sink;
    sink.dir = out_dir;
    {
        csv_writer w(sink.file("report.csv"));
        w.write_row({"t", "ks", "wasserstein1", "ks_critical_1pct", "energy_distance",
                     "permutation_p", "permutations"});
        w.write_row({format_g17(t), format_g17(md.ks), format_g17(md.wasserstein1),
                     format_g17(ks_two_sample_critical(sa.size(), sb.size(), 0.01)),
                     format_g17(pt.statistic), format_g17(pt.p_value),
                     std::to_string(pt.permutations)});
    }
    run_result res;
    res.out_dir = sink.dir;
    res.files = sink.files;
    std::ostringstream os;
    os << "compare-laws at t=" << t << ": KS=" << format_g17(md.ks)
       << ", W1=" << format_g17(md.wasserstein1) << ", permutation p=" << format_g17(pt.p_value);
    res.summary = os.str();
    return res;
}

}  // namespace sve
