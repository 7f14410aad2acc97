#include "sve/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sve/errors.hpp"

namespace sve {
namespace {

using nlohmann::json;

double require_number(const json& j, const std::string& section, const std::string& key) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw config_error(section + "." + key, "missing or non-numeric value");
    }
    return j[key].get<double>();
}

double number_or(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j[key].is_number()) {
        throw config_error(key, "must be numeric");
    }
    return j[key].get<double>();
}

param_map parse_params(const json& j, const std::string& section) {
    param_map out;
    if (!j.contains("params")) {
        return out;
    }
    if (!j["params"].is_object()) {
        throw config_error(section + ".params", "must be an object of numeric values");
    }
    for (const auto& [key, value] : j["params"].items()) {
        if (!value.is_number()) {
            throw config_error(section + ".params." + key, "must be numeric");
        }
        out[key] = value.get<double>();
    }
    return out;
}

void parse_kernel(const json& root, kernel_config& kc) {
    if (!root.contains("kernel")) {
        return;
    }
    const json& j = root["kernel"];
    kc.kind = j.value("kind", std::string("fractional"));
    if (kc.kind == "atomic") {
        if (!j.contains("atoms") || !j["atoms"].is_array() || j["atoms"].empty()) {
            throw config_error("kernel.atoms", "atomic kernel requires a non-empty [mass, theta] list");
        }
        kc.atoms.clear();
        for (const auto& pair : j["atoms"]) {
            if (!pair.is_array() || pair.size() != 2) {
                throw config_error("kernel.atoms", "each atom must be a [mass, theta] pair");
            }
            kc.atoms.push_back({pair[0].get<double>(), pair[1].get<double>()});
        }
    } else if (kc.kind == "fractional" || kc.kind == "gamma") {
        kc.alpha = require_number(j, "kernel", "alpha");
        if (kc.kind == "gamma") {
            kc.beta = require_number(j, "kernel", "beta");
        }
        if (j.contains("eta")) {
            kc.eta = require_number(j, "kernel", "eta");
        }
    } else if (kc.kind == "log_example") {
        // no parameters
    } else {
        throw config_error("kernel.kind",
                           "unknown kind '" + kc.kind +
                               "' (expected atomic, fractional, gamma or log_example)");
    }
}

void parse_grid(const json& root, grid_config& gc) {
    if (!root.contains("grid")) {
        return;
    }
    const json& j = root["grid"];
    gc.nodes = static_cast<int>(number_or(j, "nodes", gc.nodes));
    gc.theta_min = number_or(j, "theta_min", gc.theta_min);
    gc.theta_max = number_or(j, "theta_max", gc.theta_max);
    gc.fold_head_mass = j.value("fold_head_mass", gc.fold_head_mass);
    if (gc.nodes < 1) {
        throw config_error("grid.nodes", "must be >= 1");
    }
    if (!(gc.theta_min >= 0.0) || !(gc.theta_max > gc.theta_min)) {
        throw config_error("grid.theta_min", "requires 0 <= theta_min < theta_max");
    }
}

void parse_coefficients(const json& root, coefficients_config& cc) {
    if (!root.contains("coefficients")) {
        return;
    }
    const json& j = root["coefficients"];
    if (j.contains("drift")) {
        cc.drift_name = j["drift"].value("name", cc.drift_name);
        cc.drift_params = parse_params(j["drift"], "coefficients.drift");
    }
    if (j.contains("sigma")) {
        cc.sigma_name = j["sigma"].value("name", cc.sigma_name);
        cc.sigma_params = parse_params(j["sigma"], "coefficients.sigma");
    }
}

void parse_sim(const json& root, sim_params_config& sc) {
    if (!root.contains("sim")) {
        return;
    }
    const json& j = root["sim"];
    sc.T = number_or(j, "T", sc.T);
    sc.h = number_or(j, "h", sc.h);
    sc.paths = static_cast<int>(number_or(j, "paths", sc.paths));
    if (j.contains("seed")) {
        sc.seed = j["seed"].get<std::uint64_t>();
    }
    sc.x0 = number_or(j, "x0", sc.x0);
    if (j.contains("truncation")) {
        if (j["truncation"].is_string()) {
            if (j["truncation"].get<std::string>() != "infinity") {
                throw config_error("sim.truncation", "must be a number >= 1 or \"infinity\"");
            }
            sc.truncation_infinite = true;
        } else {
            sc.truncation_infinite = false;
            sc.truncation_m = j["truncation"].get<double>();
            if (!(sc.truncation_m >= 1.0)) {
                throw config_error("sim.truncation", "must be a number >= 1 or \"infinity\"");
            }
        }
    }
    sc.kernel_source = j.value("kernel_source", sc.kernel_source);
    sc.drift_rule = j.value("drift_rule", sc.drift_rule);
    sc.threads = static_cast<int>(number_or(j, "threads", sc.threads));

    if (!(sc.h > 0.0)) {
        throw config_error("sim.h", "must be positive");
    }
    if (!(sc.T >= sc.h)) {
        throw config_error("sim.T", "must satisfy T >= h");
    }
    const double raw = sc.T / sc.h;
    if (std::abs(raw - std::llround(raw)) > 1e-9 * std::max(1.0, raw)) {
        throw config_error("sim.h", "T/h must be an integer within rounding");
    }
    if (sc.paths < 1) {
        throw config_error("sim.paths", "must be >= 1");
    }
    if (sc.kernel_source != "exact" && sc.kernel_source != "grid") {
        throw config_error("sim.kernel_source", "must be 'exact' or 'grid'");
    }
    if (sc.drift_rule != "point" && sc.drift_rule != "cell_average") {
        throw config_error("sim.drift_rule", "must be 'point' or 'cell_average'");
    }
}

void parse_cnr(const json& root, cnr_run_config& cc) {
    if (!root.contains("cnr")) {
        return;
    }
    const json& j = root["cnr"];
    cc.mode = j.value("mode", cc.mode);
    if (cc.mode != "singular" && cc.mode != "regular") {
        throw config_error("cnr.mode", "must be 'singular' or 'regular'");
    }
    cc.k_max = static_cast<int>(number_or(j, "k_max", cc.k_max));
    cc.paths = static_cast<int>(number_or(j, "paths", cc.paths));
    cc.T = number_or(j, "T", cc.T);
    cc.h = number_or(j, "h", cc.h);
    cc.x0 = number_or(j, "x0", cc.x0);
    cc.from_schedule_row = j.value("from_schedule_row", cc.from_schedule_row);
    cc.row = static_cast<int>(number_or(j, "row", cc.row));
    cc.delta0 = number_or(j, "delta0", cc.delta0);
    cc.delta1 = number_or(j, "delta1", cc.delta1);
    cc.delta2 = number_or(j, "delta2", cc.delta2);
    cc.delta3 = number_or(j, "delta3", cc.delta3);
    cc.lambda = number_or(j, "lambda", cc.lambda);
    cc.J = number_or(j, "J", cc.J);
    cc.m_level = number_or(j, "m", cc.m_level);
    cc.truncation_radius = number_or(j, "truncation_radius", cc.truncation_radius);
    if (cc.k_max < 1) {
        throw config_error("cnr.k_max", "must be >= 1");
    }
}

void parse_demo(const json& root, demo_config& dc) {
    if (!root.contains("demo")) {
        return;
    }
    const json& j = root["demo"];
    dc.alpha = number_or(j, "alpha", dc.alpha);
    dc.beta = number_or(j, "beta", dc.beta);
    dc.delta = number_or(j, "delta", dc.delta);
    dc.T = number_or(j, "T", dc.T);
    dc.h = number_or(j, "h", dc.h);
    dc.noise_paths = static_cast<int>(number_or(j, "noise_paths", dc.noise_paths));
    if (!(dc.beta > 0.0 && dc.beta < 1.0)) {
        throw config_error("demo.beta", "beta must lie in (0,1)");
    }
    if (!(dc.alpha > 0.0 && dc.alpha <= 1.0)) {
        throw config_error("demo.alpha", "alpha must lie in (0,1]");
    }
}

}  // namespace

experiment_config parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error("<root>", std::string("not valid JSON: ") + e.what());
    }
    experiment_config cfg;
    cfg.raw_text = text;
    parse_kernel(root, cfg.kernel_spec);
    parse_grid(root, cfg.grid_spec);
    parse_coefficients(root, cfg.coeffs);
    parse_sim(root, cfg.sim);
    parse_cnr(root, cfg.cnr);
    parse_demo(root, cfg.demo);
    return cfg;
}

experiment_config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw config_error("<file>", "cannot open '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

kernel build_kernel(const kernel_config& kc) {
    if (kc.kind == "atomic") {
        return kernel::exponential_sum(kc.atoms);
    }
    if (kc.kind == "log_example") {
        return kernel::log_example();
    }
    if (kc.kind == "fractional" || kc.kind == "gamma") {
        if (kc.alpha == 1.0 && kc.kind == "fractional") {
            // the constant kernel: single Bernstein atom at theta = 0
            return kernel::exponential_sum({{1.0, 0.0}});
        }
        if (!(kc.alpha > 0.5 + 1e-6 && kc.alpha < 1.0 - 1e-6)) {
            throw config_error("kernel.alpha", "alpha must lie in (1/2,1)");
        }
        const double eta = kc.eta.value_or(default_eta(kc.alpha));
        if (!(eta > 1.0 - kc.alpha && eta <= 0.5)) {
            throw config_error("kernel.eta", "eta must lie in (1-alpha, 1/2]");
        }
        if (kc.kind == "fractional") {
            return kernel::fractional(kc.alpha, eta);
        }
        if (!(kc.beta > 0.0)) {
            throw config_error("kernel.beta", "beta must be positive");
        }
        return kernel::gamma(kc.alpha, kc.beta, eta);
    }
    throw config_error("kernel.kind", "unknown kind '" + kc.kind + "'");
}

lift_grid build_grid(const kernel& k, const grid_config& gc) {
    return lift_grid::from_kernel(k, gc.nodes, gc.theta_min, gc.theta_max,
                                  {.fold_head_mass = gc.fold_head_mass});
}

coefficient_pair build_pair(const coefficients_config& cc) {
    return make_pair_from_registry(cc.drift_name, cc.drift_params, cc.sigma_name, cc.sigma_params);
}

}  // namespace sve
