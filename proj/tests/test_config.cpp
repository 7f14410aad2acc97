#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "sve/csv.hpp"
#include "sve/experiment.hpp"

using namespace sve;

namespace {
std::filesystem::path temp_dir(const std::string& leaf) {
    auto p = std::filesystem::temp_directory_path() / "sve_config_tests" / leaf;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}
}  // namespace

TEST_CASE("config parsing and validation") {
    SUBCASE("minimal atomic config is valid") {
        experiment_config cfg = parse_config_text(R"({
            "kernel": {"kind": "atomic", "atoms": [[1.0, 0.0]]},
            "coefficients": {"drift": {"name": "zero_drift"},
                             "sigma": {"name": "constant_sigma", "params": {"s": 0.0}}}
        })");
        kernel k = build_kernel(cfg.kernel_spec);
        CHECK(k.regular());
        coefficient_pair p = build_pair(cfg.coeffs);
        CHECK(p.b({1.0})[0] == 0.0);
    }
    SUBCASE("fractional alpha outside (1/2,1) rejected with the field named") {
        experiment_config cfg = parse_config_text(R"({"kernel": {"kind": "fractional", "alpha": 0.4}})");
        try {
            build_kernel(cfg.kernel_spec);
            FAIL("expected config_error");
        } catch (const config_error& e) {
            CHECK(e.field() == "kernel.alpha");
            CHECK(std::string(e.what()).find("alpha must lie in (1/2,1)") != std::string::npos);
        }
    }
    SUBCASE("fractional alpha = 1 becomes the constant kernel") {
        experiment_config cfg = parse_config_text(R"({"kernel": {"kind": "fractional", "alpha": 1.0}})");
        kernel k = build_kernel(cfg.kernel_spec);
        CHECK(k.regular());
        CHECK(k(3.0) == doctest::Approx(1.0));
    }
    SUBCASE("T/h mismatch rejected") {
        CHECK_THROWS_AS(parse_config_text(R"({"sim": {"T": 1.0, "h": 0.3}})"), config_error);
    }
    SUBCASE("bad truncation rejected") {
        CHECK_THROWS_AS(parse_config_text(R"({"sim": {"truncation": 0.5}})"), config_error);
        CHECK_THROWS_AS(parse_config_text(R"({"sim": {"truncation": "inf"}})"), config_error);
        experiment_config ok = parse_config_text(R"({"sim": {"truncation": "infinity"}})");
        CHECK(ok.sim.truncation_infinite);
    }
    SUBCASE("unknown registry name surfaces as a config error") {
        experiment_config cfg = parse_config_text(R"({
            "coefficients": {"drift": {"name": "warp_drive"}}
        })");
        CHECK_THROWS_AS(build_pair(cfg.coeffs), config_error);
    }
    SUBCASE("invalid json rejected") {
        CHECK_THROWS_AS(parse_config_text("{nope"), config_error);
    }
}

TEST_CASE("experiment runs") {
    const std::string frac_cfg = R"({
        "kernel": {"kind": "fractional", "alpha": 0.75},
        "grid": {"nodes": 30, "theta_min": 1e-3, "theta_max": 1e3},
        "coefficients": {
            "drift": {"name": "power_drift", "params": {"beta": 0.5}},
            "sigma": {"name": "constant_sigma", "params": {"s": 1.0}}
        },
        "sim": {"T": 0.25, "h": 0.015625, "paths": 8, "seed": 3}
    })";

    SUBCASE("manifest lists every emitted file with its content hash") {
        experiment_config cfg = parse_config_text(frac_cfg);
        const auto dir = temp_dir("manifest");
        run_result res = run_experiment("kernel-info", cfg, dir);
        REQUIRE(std::filesystem::exists(dir / "manifest.json"));
        std::ifstream in(dir / "manifest.json");
        nlohmann::json manifest_json;
        in >> manifest_json;
        const auto& files = manifest_json["files"];
        REQUIRE(files.size() == res.files.size());
        for (const auto& entry : files) {
            const auto path = dir / entry["name"].get<std::string>();
            CHECK(std::filesystem::exists(path));
            CHECK(entry["content_hash_fnv1a64"].get<std::uint64_t>() == file_content_hash(path));
        }
        CHECK(manifest_json["seed"].get<std::uint64_t>() == 3);
        CHECK(manifest_json["version"].get<std::string>() == kVersion);
    }

    SUBCASE("rerun with the same seed reproduces identical csv bytes") {
        experiment_config cfg = parse_config_text(frac_cfg);
        const auto d1 = temp_dir("rerun1");
        const auto d2 = temp_dir("rerun2");
        run_experiment("simulate-lift", cfg, d1);
        run_experiment("simulate-lift", cfg, d2);
        CHECK(file_content_hash(d1 / "ensemble.csv") == file_content_hash(d2 / "ensemble.csv"));
    }

    SUBCASE("schedule refusal surfaces when the balance check fails") {
        experiment_config cfg = parse_config_text(R"({
            "kernel": {"kind": "fractional", "alpha": 0.75},
            "coefficients": {
                "drift": {"name": "zero_drift"},
                "sigma": {"name": "holder_sigma", "params": {"gamma": 0.4, "c0": 1.0, "s0": 1.0}}
            },
            "cnr": {"mode": "singular", "k_max": 2}
        })");
        CHECK_THROWS_AS(run_experiment("schedule", cfg, temp_dir("refusal")), schedule_refusal);
    }

    SUBCASE("ensemble csv round-trips through the reader") {
        experiment_config cfg = parse_config_text(frac_cfg);
        const auto dir = temp_dir("roundtrip");
        run_experiment("simulate-lift", cfg, dir);
        path_ensemble back = read_ensemble_csv(dir / "ensemble.csv");
        CHECK(back.n == 1);
        CHECK(back.steps == 16);
        CHECK(back.paths.size() == 8);
        CHECK(back.h == doctest::Approx(0.015625));
    }

    SUBCASE("compare-laws report") {
        experiment_config cfg = parse_config_text(frac_cfg);
        const auto da = temp_dir("cmp_a");
        const auto db = temp_dir("cmp_b");
        run_experiment("simulate-lift", cfg, da);
        run_overrides ov;
        ov.seed = 99;
        run_experiment("simulate-lift", cfg, db, ov);
        run_result res = compare_laws(da / "ensemble.csv", db / "ensemble.csv", 0.25,
                                      temp_dir("cmp_out"), 5);
        CHECK(std::filesystem::exists(res.files.front()));
        CHECK(res.summary.find("KS=") != std::string::npos);
    }

    SUBCASE("demo-regularization recipe emits branches, perturbed runs and ensembles") {
        experiment_config cfg = parse_config_text(R"({
            "demo": {"alpha": 0.75, "beta": 0.5, "delta": 1e-4,
                     "T": 0.25, "h": 0.00390625, "noise_paths": 60},
            "sim": {"seed": 13}
        })");
        const auto dir = temp_dir("demo");
        run_result res = run_experiment("demo-regularization", cfg, dir);
        for (const char* name : {"demo_branches.csv", "demo_perturbed.csv", "demo_noise_lift.csv",
                                 "demo_noise_direct.csv", "demo_report.csv"}) {
            CHECK(std::filesystem::exists(dir / name));
        }
        CHECK(res.summary.find("regularization demo") != std::string::npos);
    }

    SUBCASE("cnr-run recipe emits per-path rows and the aggregate block") {
        experiment_config cfg = parse_config_text(R"({
            "kernel": {"kind": "atomic", "atoms": [[0.6, 0.0], [0.4, 2.0]]},
            "coefficients": {
                "drift": {"name": "sin_drift", "params": {"a": 1.0}},
                "sigma": {"name": "constant_sigma", "params": {"s": 1.0}}
            },
            "sim": {"seed": 11},
            "cnr": {"mode": "regular", "k_max": 2, "paths": 16, "T": 0.5, "h": 0.015625,
                    "delta0": 2e-4, "delta1": 1e-5, "delta2": 0.05, "delta3": 0.1296,
                    "lambda": 2.0, "J": 1.0}
        })");
        const auto dir = temp_dir("cnr");
        run_experiment("cnr-run", cfg, dir);
        CHECK(std::filesystem::exists(dir / "cnr.csv"));
        CHECK(std::filesystem::exists(dir / "cnr_aggregate.csv"));
    }

    SUBCASE("direct scheme with grid kernel source and kernel-multiple forcing") {
        experiment_config cfg = parse_config_text(R"({
            "kernel": {"kind": "fractional", "alpha": 0.8},
            "grid": {"nodes": 25, "theta_min": 1e-3, "theta_max": 1e3},
            "coefficients": {
                "drift": {"name": "power_drift", "params": {"beta": 0.5}},
                "sigma": {"name": "constant_sigma", "params": {"s": 0.0}}
            },
            "sim": {"T": 0.25, "h": 0.015625, "paths": 2, "seed": 4,
                    "kernel_source": "grid", "drift_rule": "cell_average", "x0": 0.001}
        })");
        const auto dir = temp_dir("direct_grid");
        run_result res = run_experiment("simulate-direct", cfg, dir);
        CHECK(res.summary.find("direct ensemble") != std::string::npos);
        path_ensemble ens = read_ensemble_csv(dir / "ensemble.csv");
        // deterministic run lifted off zero by the small kernel-multiple forcing
        CHECK(ens.paths[0].x.back() > 0.0);
    }

    SUBCASE("dump-state emits node value columns for small scalar grids") {
        experiment_config cfg = parse_config_text(R"({
            "kernel": {"kind": "atomic", "atoms": [[1.0, 0.2], [0.5, 2.0]]},
            "coefficients": {"drift": {"name": "zero_drift"},
                             "sigma": {"name": "constant_sigma", "params": {"s": 1.0}}},
            "sim": {"T": 0.125, "h": 0.03125, "paths": 2, "seed": 6}
        })");
        const auto dir = temp_dir("dump_state");
        run_overrides ov;
        ov.dump_state = true;
        run_experiment("simulate-lift", cfg, dir, ov);
        std::ifstream in(dir / "ensemble.csv");
        std::string header;
        std::getline(in, header);
        CHECK(header == "path_id,t,X_1,Y_1,Y_2");
    }

    SUBCASE("unknown recipe rejected") {
        experiment_config cfg = parse_config_text(frac_cfg);
        CHECK_THROWS_AS(run_experiment("mystery", cfg, temp_dir("unknown")), std::invalid_argument);
    }
}
