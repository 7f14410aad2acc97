#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sve/coefficients.hpp"
#include "sve/errors.hpp"
#include "sve/kernel.hpp"
#include "sve/lift_grid.hpp"

namespace sve {

enum class cnr_mode { singular, regular };

// One row of the Control-and-Reimburse schedule. In singular mode `level` is
// eps_{m_k}; in regular mode it is delta_k and m = M = 1. S is the
// admissibility functional rho_b(level^2)^{1/2} + R rho_sigma(level^2)/level
// (the R factor is absent in regular mode), kept <= 108^{-4}.
struct schedule_row {
    int k = 0;
    double m = 1.0;
    double M = 1.0;
    double level = 0.0;  // eps_{m_k} or delta_k
    double R_m = 0.0;
    double S = 0.0;
    double delta0 = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
    double lambda_minus_one = 0.0;
    double lambda = 1.0;
    double J = 1.0;
    double bandwidth_b = 0.0;
    double bandwidth_sigma = 0.0;
};

struct cnr_schedule {
    cnr_mode mode = cnr_mode::singular;
    std::vector<schedule_row> rows;
};

// Builds k_max schedule rows along a geometric admissibility ladder. Refuses
// (schedule_refusal) when the balance condition fails, and validates that the
// requested mode matches the kernel's regularity. Singular rows satisfy
// (lambda-1) delta1 = delta3/2 exactly; regular rows (lambda-1) delta1 = delta3.
cnr_schedule build_schedule(const kernel& k, const modulus_spec& rho_b,
                            const modulus_spec& rho_sigma, int k_max, cnr_mode mode);

// Parameters of one coupled run, usually taken from a schedule row.
struct coupling_params {
    double delta0 = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
    double lambda = 2.0;
    double J = 1.0;
    truncation m = truncation::at(1.0);       // control/threshold map mu_m
    truncation M = truncation::infinite();    // target output map
    truncation M_bar = truncation::at(1.0);   // reference output map

    static coupling_params from_row(const schedule_row& row, bool target_untruncated = true);
};

struct coupling_result {
    bool ok = true;
    std::string diagnostic;

    bool tau_fired = false;
    double tau = 0.0;      // grid time of the first threshold crossing
    int tau_clause = 0;    // 1: Delta1 integral, 2: Delta2 integral, 3: Delta3 norm

    bool zeta_fired = false;   // false only when censored by the horizon T < J
    double zeta = 0.0;

    double energy = 0.0;       // int |v_t|^2 dt
    double control_i1 = 0.0;   // sum over control-active steps of |mu_m[Y-Yhat]|^2 h
    double i1_at_tau = 0.0;
    double i1_overshoot = 0.0;
    double max_i1_step = 0.0;

    double lyap_max = 0.0;     // sup_t of the stopped comparison functional
    // stopped comparison functional per grid time, when recording is on
    std::vector<double> lyapunov;
    bool in_omega_hat = false;         // generic bound 9J{...} + delta3/3
    bool in_omega_hat_strict = false;  // schedule bound delta3/2
    bool control_was_active = false;
};

struct coupling_aggregate {
    int paths_ok = 0;
    double violation_rate = 0.0;  // empirical P(not in Omega-hat)
    double violation_se = 0.0;
    double control_prob_bound = 0.0;  // 324 J R_m delta3^{-1} {delta0 + rho_sigma_ref(delta1 + eps_m delta2)}
    double omega_hat_bound = 0.0;     // 9J{(1+R)delta0 + rho_b_ref(.)^{1/2} delta1^{1/2} + R rho_sigma_ref(.)} + delta3/3
    double energy_cap = 0.0;          // lambda^2 delta1 / c_ue_ref
    double mean_energy = 0.0;
    double max_energy = 0.0;
    double tv_bound_estimate = 0.0;   // (E[energy])^{1/2} / 2
    double tv_bound_analytic = 0.0;   // lambda delta1^{1/2} / (2 sqrt(c_ue_ref))
};

struct coupling_config {
    double T = 1.0;
    double h = 1.0 / 256.0;
    int n_paths = 1;
    std::uint64_t seed = 0;
    int threads = 1;
    bool record_lyapunov = false;
    std::string seed_tag = "cnr-path";
};

struct coupling_ensemble {
    double T = 0.0;
    double h = 0.0;
    int steps = 0;
    std::vector<coupling_result> paths;
    coupling_aggregate aggregate;
};

// One coupled path driven by the supplied Brownian increments (steps x d).
// Exposed so tests can replay and tamper with the noise after the recorded
// stopping time.
coupling_result simulate_coupled_path(const lift_grid& g, const coefficient_pair& target,
                                      const coefficient_pair& reference,
                                      const coupling_params& params, double h, int steps,
                                      const lift_state& y0, std::span<const double> dw,
                                      bool record_lyapunov = false);

// Coupled ensemble: target equation Y and controlled reference equation Yhat
// share each path's Brownian increments; the feedback drift
// lambda mu_m[Y - Yhat] acts until the first threshold crossing, gated so the
// Girsanov energy bound lambda^2 delta1 / c_ue holds exactly path by path.
coupling_ensemble simulate_coupled(const lift_grid& g, const coefficient_pair& target,
                                   const coefficient_pair& reference,
                                   const coupling_params& params, const lift_state& y0,
                                   const coupling_config& cfg);

inline double girsanov_energy(const coupling_result& r) { return r.energy; }

}  // namespace sve
