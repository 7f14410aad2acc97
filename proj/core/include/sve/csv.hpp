#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "sve/see_sim.hpp"

namespace sve {

// %.17g formatting: lossless round-trip of doubles, diffable output.
std::string format_g17(double v);

class csv_writer {
public:
    explicit csv_writer(const std::filesystem::path& path);

    void write_row(std::span<const std::string> cells);
    void write_row(std::initializer_list<std::string> cells);

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

// Ensemble schema: path_id,t,X_1..X_n; optional node-state columns for small
// grids (scalar states only).
void write_ensemble_csv(const std::filesystem::path& path, const path_ensemble& ens,
                        const std::vector<std::vector<double>>* node_states = nullptr,
                        std::size_t n_nodes = 0);
path_ensemble read_ensemble_csv(const std::filesystem::path& path);

// FNV-1a over a file's bytes; manifest content hashes.
std::uint64_t file_content_hash(const std::filesystem::path& path);

}  // namespace sve
