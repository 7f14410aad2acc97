#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sve/config.hpp"

namespace sve {

inline constexpr const char* kVersion = "0.1.0";

struct run_overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool dump_state = false;
    // demo-regularization parameter overrides
    std::optional<double> alpha;
    std::optional<double> beta;
};

struct run_result {
    std::filesystem::path out_dir;
    std::vector<std::filesystem::path> files;
    std::string summary;  // one-paragraph stdout report
};

// Run one named recipe (kernel-info, discretize, simulate-lift,
// simulate-direct, demo-regularization, cnr-run, schedule) and write its CSV
// artifacts plus a manifest (config hash, seed, version, per-file content
// hashes) into out_dir. Identical config+seed reproduce identical bytes in
// every numeric CSV regardless of the thread count.
run_result run_experiment(const std::string& recipe, const experiment_config& cfg,
                          const std::filesystem::path& out_dir, const run_overrides& ov = {});

// compare-laws: marginal and path-law distances between two stored ensembles.
run_result compare_laws(const std::filesystem::path& a_csv, const std::filesystem::path& b_csv,
                        double t, const std::filesystem::path& out_dir, std::uint64_t seed = 0);

}  // namespace sve
