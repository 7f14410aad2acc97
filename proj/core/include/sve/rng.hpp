#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace sve {

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

// Derive a stream seed from (master seed, purpose tag, stream index).
// Streams for different tags or indices are decorrelated by construction,
// so modules never share RNG state implicitly.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index);

// Seeded stream of standard normal draws (mt19937_64 + Box-Muller).
// One instance per simulated path; never shared across threads.
class normal_stream {
public:
    explicit normal_stream(std::uint64_t seed) : engine_(seed) {}

    double next();
    void fill(std::span<double> out);

    // U(0,1) draw on (0,1); exposed for permutation shuffles.
    double next_uniform();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace sve
