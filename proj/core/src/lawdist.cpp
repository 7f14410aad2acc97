#include "sve/lawdist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sve/rng.hpp"

namespace sve {

marginal_distance_result marginal_distance(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("marginal_distance requires non-empty samples");
    }
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    marginal_distance_result out;
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double prev = std::min(sa.front(), sb.front());
    while (i < sa.size() || j < sb.size()) {
        const double z = [&] {
            if (i >= sa.size()) return sb[j];
            if (j >= sb.size()) return sa[i];
            return std::min(sa[i], sb[j]);
        }();
        // Wasserstein contribution over [prev, z) with the CDFs before z.
        out.wasserstein1 += std::abs(i / na - j / nb) * (z - prev);
        while (i < sa.size() && sa[i] == z) ++i;
        while (j < sb.size() && sb[j] == z) ++j;
        out.ks = std::max(out.ks, std::abs(i / na - j / nb));
        prev = z;
    }
    return out;
}

double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha) {
    if (n == 0 || m == 0 || !(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("ks_two_sample_critical requires n, m >= 1 and alpha in (0,1)");
    }
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);
    return c * std::sqrt((nn + mm) / (nn * mm));
}

std::vector<double> marginal_samples(const path_ensemble& ens, double t, int component) {
    if (component < 0 || component >= ens.n) {
        throw std::invalid_argument("component index out of range");
    }
    const double raw = t / ens.h;
    const long idx = std::llround(raw);
    if (idx < 0 || idx > ens.steps || std::abs(raw - idx) > 1e-9 * std::max(1.0, raw)) {
        throw std::invalid_argument("requested time is not on the ensemble grid");
    }
    std::vector<double> out;
    out.reserve(ens.paths.size());
    for (const auto& rec : ens.paths) {
        if (!rec.ok) {
            continue;
        }
        out.push_back(rec.x[static_cast<std::size_t>(idx) * ens.n + component]);
    }
    if (out.size() < 2) {
        throw std::invalid_argument("too few valid paths for a marginal sample");
    }
    return out;
}

namespace {

struct pooled_paths {
    // rows: n_a + n_b flattened paths on the shared grid
    std::size_t n_a = 0, n_b = 0;
    std::size_t len = 0;
    double h = 0.0;
    std::vector<const double*> rows;
};

pooled_paths pool(const path_ensemble& a, const path_ensemble& b) {
    if (a.n != b.n || a.steps != b.steps || std::abs(a.h - b.h) > 1e-12 * std::max(1.0, a.h)) {
        throw std::invalid_argument("energy distance requires ensembles on a shared grid");
    }
    pooled_paths p;
    p.len = (static_cast<std::size_t>(a.steps) + 1) * a.n;
    p.h = a.h;
    for (const auto& rec : a.paths) {
        if (rec.ok) {
            p.rows.push_back(rec.x.data());
            ++p.n_a;
        }
    }
    for (const auto& rec : b.paths) {
        if (rec.ok) {
            p.rows.push_back(rec.x.data());
            ++p.n_b;
        }
    }
    if (p.n_a < 2 || p.n_b < 2) {
        throw std::invalid_argument("energy distance requires at least two valid paths per ensemble");
    }
    return p;
}

// Pairwise L2(0,T) distances of the pooled paths (upper triangle).
std::vector<double> distance_matrix(const pooled_paths& p) {
    const std::size_t n = p.rows.size();
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            const double* xi = p.rows[i];
            const double* xj = p.rows[j];
            for (std::size_t k = 0; k < p.len; ++k) {
                const double d = xi[k] - xj[k];
                s += d * d;
            }
            const double v = std::sqrt(s * p.h);
            dist[i * n + j] = v;
            dist[j * n + i] = v;
        }
    }
    return dist;
}

double energy_statistic(const std::vector<double>& dist, std::span<const std::size_t> idx,
                        std::size_t n_a, std::size_t n_total) {
    // idx is a permutation of 0..n_total-1; the first n_a entries form group A.
    double within_a = 0.0, within_b = 0.0, between = 0.0;
    const std::size_t n_b = n_total - n_a;
    for (std::size_t i = 0; i < n_a; ++i) {
        for (std::size_t j = i + 1; j < n_a; ++j) {
            within_a += dist[idx[i] * n_total + idx[j]];
        }
    }
    for (std::size_t i = n_a; i < n_total; ++i) {
        for (std::size_t j = i + 1; j < n_total; ++j) {
            within_b += dist[idx[i] * n_total + idx[j]];
        }
    }
    for (std::size_t i = 0; i < n_a; ++i) {
        for (std::size_t j = n_a; j < n_total; ++j) {
            between += dist[idx[i] * n_total + idx[j]];
        }
    }
    const double na = static_cast<double>(n_a);
    const double nb = static_cast<double>(n_b);
    return 2.0 * between / (na * nb) - 2.0 * within_a / (na * na) - 2.0 * within_b / (nb * nb);
}

}  // namespace

double energy_distance_paths(const path_ensemble& a, const path_ensemble& b) {
    const pooled_paths p = pool(a, b);
    const std::vector<double> dist = distance_matrix(p);
    std::vector<std::size_t> idx(p.rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    return energy_statistic(dist, idx, p.n_a, p.rows.size());
}

permutation_test_result energy_permutation_test(const path_ensemble& a, const path_ensemble& b,
                                                int n_permutations, std::uint64_t seed) {
    if (n_permutations < 1) {
        throw std::invalid_argument("permutation test requires at least one permutation");
    }
    const pooled_paths p = pool(a, b);
    const std::vector<double> dist = distance_matrix(p);
    const std::size_t n_total = p.rows.size();
    std::vector<std::size_t> idx(n_total);
    std::iota(idx.begin(), idx.end(), 0);

    permutation_test_result res;
    res.permutations = n_permutations;
    res.statistic = energy_statistic(dist, idx, p.n_a, n_total);

    normal_stream rng(derive_seed(seed, "energy-permutation", 0));
    int at_least = 0;
    for (int perm = 0; perm < n_permutations; ++perm) {
        for (std::size_t i = n_total - 1; i > 0; --i) {
            const std::size_t j =
                static_cast<std::size_t>(rng.next_uniform() * static_cast<double>(i + 1));
            std::swap(idx[i], idx[std::min(j, i)]);
        }
        if (energy_statistic(dist, idx, p.n_a, n_total) >= res.statistic) {
            ++at_least;
        }
    }
    res.p_value = (1.0 + at_least) / (1.0 + n_permutations);
    return res;
}

}  // namespace sve
