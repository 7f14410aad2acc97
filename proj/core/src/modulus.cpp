#include "sve/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sve {

modulus_spec modulus_spec::lipschitz(double L) {
    if (!(L >= 0.0) || !std::isfinite(L)) {
        throw std::invalid_argument("lipschitz modulus requires L >= 0");
    }
    modulus_spec m;
    m.family_ = family::lipschitz;
    m.L_ = L;
    return m;
}

modulus_spec modulus_spec::hoelder(double gamma, double c) {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("hoelder modulus requires gamma in (0,1]");
    }
    if (!(c >= 0.0) || !std::isfinite(c)) {
        throw std::invalid_argument("hoelder modulus requires c >= 0");
    }
    modulus_spec m;
    m.family_ = family::hoelder;
    m.gamma_ = gamma;
    m.c_ = c;
    return m;
}

modulus_spec modulus_spec::concave_table(std::vector<std::pair<double, double>> points) {
    std::sort(points.begin(), points.end());
    if (points.empty()) {
        throw std::invalid_argument("concave_table modulus requires at least one point");
    }
    double prev_t = 0.0, prev_v = 0.0;
    double prev_slope = std::numeric_limits<double>::infinity();
    for (const auto& [t, v] : points) {
        if (!(t > prev_t)) {
            throw std::invalid_argument("concave_table breakpoints must be strictly increasing and positive");
        }
        if (!(v >= prev_v)) {
            throw std::invalid_argument("concave_table values must be non-decreasing");
        }
        const double slope = (v - prev_v) / (t - prev_t);
        if (slope > prev_slope * (1.0 + 1e-12)) {
            throw std::invalid_argument("concave_table values must be concave (with rho(0)=0)");
        }
        prev_slope = slope;
        prev_t = t;
        prev_v = v;
    }
    modulus_spec m;
    m.family_ = family::concave_table;
    m.table_ = std::move(points);
    return m;
}

double modulus_spec::operator()(double t) const {
    if (!(t >= 0.0)) {
        throw std::invalid_argument("modulus argument must be >= 0");
    }
    if (t == 0.0) {
        return 0.0;
    }
    switch (family_) {
        case family::lipschitz:
            return L_ * L_ * t;
        case family::hoelder:
            return 2.0 * c_ * c_ * (std::pow(t, gamma_) + t);
        case family::concave_table: {
            double prev_t = 0.0, prev_v = 0.0;
            for (const auto& [bt, bv] : table_) {
                if (t <= bt) {
                    return prev_v + (bv - prev_v) * (t - prev_t) / (bt - prev_t);
                }
                prev_t = bt;
                prev_v = bv;
            }
            // Beyond the last breakpoint: continue with the final slope, which
            // keeps the interpolant concave and non-decreasing.
            const auto& [t1, v1] = table_.back();
            double slope = 0.0;
            if (table_.size() >= 2) {
                const auto& [t0, v0] = table_[table_.size() - 2];
                slope = (v1 - v0) / (t1 - t0);
            } else {
                slope = v1 / t1;
            }
            return v1 + slope * (t - t1);
        }
    }
    return 0.0;
}

double modulus_spec::smallest_certified_level() const {
    if (family_ == family::concave_table) {
        return table_.front().second;
    }
    return 0.0;
}

std::string modulus_spec::describe() const {
    std::ostringstream os;
    switch (family_) {
        case family::lipschitz:
            os << "lipschitz(L=" << L_ << ")";
            break;
        case family::hoelder:
            os << "hoelder(gamma=" << gamma_ << ", c=" << c_ << ")";
            break;
        case family::concave_table:
            os << "concave_table(" << table_.size() << " points)";
            break;
    }
    return os.str();
}

}  // namespace sve
