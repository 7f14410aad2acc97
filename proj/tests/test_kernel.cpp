#include <doctest.h>

#include <cmath>
#include <vector>

#include "sve/kernel.hpp"
#include "test_oracles.hpp"

using namespace sve;

namespace {
// Frozen from the independent Spouge-Gamma / adaptive-quadrature oracles
// (see test_oracles.hpp); recomputed in the checks below where cheap.
constexpr double kInvGamma075 = 0.8160489390982630;    // 1/Gamma(3/4)
constexpr double kEightOverPiSqrt2 = 1.8006326323142121;
constexpr double kEps1Frac075Eta05 = 0.4801687019504566;
constexpr double kInvLog2 = 1.4426950408889634;
}  // namespace

TEST_CASE("kernel evaluation") {
    SUBCASE("single zero atom is the constant kernel") {
        kernel k = kernel::exponential_sum({{1.0, 0.0}});
        CHECK(k(0.3) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(k(7.0) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("atomic {(2,1)} at t = ln 2") {
        kernel k = kernel::exponential_sum({{2.0, 1.0}});
        CHECK(k(std::log(2.0)) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("fractional alpha=0.75 at t=1") {
        kernel k = kernel::fractional(0.75, 0.5);
        CHECK(k(1.0) == doctest::Approx(kInvGamma075).epsilon(1e-13));
        CHECK(k(1.0) == doctest::Approx(1.0 / oracle::gamma_fn(0.75)).epsilon(1e-13));
        // scaling law t^{alpha-1}
        CHECK(k(0.25) == doctest::Approx(std::pow(0.25, -0.25) * kInvGamma075).epsilon(1e-13));
    }
    SUBCASE("gamma kernel has the exponential tilt") {
        kernel k = kernel::gamma(0.75, 2.0, 0.5);
        kernel f = kernel::fractional(0.75, 0.5);
        CHECK(k(0.7) == doctest::Approx(std::exp(-2.0 * 0.7) * f(0.7)).epsilon(1e-13));
    }
    SUBCASE("log-example kernel agrees with direct quadrature") {
        kernel k = kernel::log_example();
        const double t = 0.35;
        const double expect = oracle::integrate(
            [t](double v) {
                const double theta = std::exp(v);
                return std::exp(0.5 * v - theta * t) / (v * v);
            },
            std::log(2.0), std::log(3000.0), 1e-13);
        CHECK(k(t) == doctest::Approx(expect).epsilon(1e-9));
    }
    SUBCASE("non-positive t rejected") {
        kernel k = kernel::exponential_sum({{1.0, 0.0}});
        CHECK_THROWS_AS(k(0.0), std::invalid_argument);
        CHECK_THROWS_AS(k(-1.0), std::invalid_argument);
    }
}

TEST_CASE("regularity weight and r_m") {
    regularity_weight r = regularity_weight::power(0.5);
    SUBCASE("theta below m") { CHECK(r.r_m(4.0, 1.0) == 1.0); }
    SUBCASE("theta above m") { CHECK(r.r_m(4.0, 16.0) == doctest::Approx(0.5).epsilon(1e-15)); }
    SUBCASE("identity weight") {
        regularity_weight id = regularity_weight::identity();
        CHECK(id.r_m(1.0, 123.0) == 1.0);
        CHECK(id.r_m(50.0, 0.0) == 1.0);
    }
    SUBCASE("m below 1 rejected") { CHECK_THROWS_AS(r.r_m(0.5, 2.0), std::invalid_argument); }
    SUBCASE("sandwich 1 ∧ theta^{-1/2} <= r <= 1") {
        for (double theta : {0.0, 0.3, 1.0, 2.5, 100.0, 1e7}) {
            const double lower = std::min(1.0, theta > 0.0 ? std::pow(theta, -0.5) : 1.0);
            CHECK(r(theta) >= lower - 1e-15);
            CHECK(r(theta) <= 1.0);
        }
    }
    SUBCASE("monotonicity in m: r <= r_m <= r_M <= 1") {
        regularity_weight w = regularity_weight::power(0.35);
        for (double theta : {0.0, 0.5, 1.0, 3.0, 17.0, 400.0, 1e6}) {
            const double r1 = w(theta);
            const double rm = w.r_m(3.0, theta);
            const double rM = w.r_m(30.0, theta);
            CHECK(r1 <= rm + 1e-15);
            CHECK(rm <= rM + 1e-15);
            CHECK(rM <= 1.0 + 1e-15);
        }
    }
}

TEST_CASE("R_m") {
    SUBCASE("atomic sums exactly") {
        kernel k(bernstein_measure::atomic({{1.0, 0.0}, {1.0, 9.0}}), regularity_weight::power(0.5));
        // r_m(9) = 9^{-1/2} / 4^{-1/2} = 2/3
        CHECK(k.R_m(4.0) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("fractional quadrature matches the closed form") {
        kernel k = kernel::fractional(0.75, 0.5);
        CHECK(k.R_m(1.0) == doctest::Approx(kEightOverPiSqrt2).epsilon(1e-8));
        for (double m : {1.0, 10.0, 100.0}) {
            const double closed = fractional_R_m_closed_form(0.75, 0.5, m);
            CHECK(k.R_m(m) == doctest::Approx(closed).epsilon(1e-7));
        }
    }
    SUBCASE("regular kernel: total mass, independent of m") {
        kernel k = kernel::exponential_sum({{0.5, 0.2}, {1.5, 3.0}});
        CHECK(k.R_m(1.0) == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(k.R_m(77.0) == doctest::Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("m < 1 rejected") {
        kernel k = kernel::fractional(0.75);
        CHECK_THROWS_AS(k.R_m(0.2), std::invalid_argument);
    }
}

TEST_CASE("eps_m") {
    SUBCASE("regular kernel gives zero") {
        kernel k = kernel::exponential_sum({{1.0, 0.0}, {2.0, 5.0}});
        CHECK(k.eps_m(1.0) == 0.0);
        CHECK(k.eps_m(40.0) == 0.0);
    }
    SUBCASE("atomic measure inside [0, m]") {
        kernel k(bernstein_measure::atomic({{1.0, 0.0}, {1.0, 3.0}}), regularity_weight::power(0.5));
        CHECK(k.eps_m(3.0) == 0.0);
        CHECK(k.eps_m(10.0) == 0.0);
    }
    SUBCASE("fractional quadrature matches the closed form") {
        kernel k = kernel::fractional(0.75, 0.5);
        CHECK(k.eps_m(1.0) == doctest::Approx(kEps1Frac075Eta05).epsilon(1e-8));
        for (double m : {1.0, 10.0, 100.0}) {
            const double closed = fractional_eps_m_closed_form(0.75, 0.5, m);
            CHECK(k.eps_m(m) == doctest::Approx(closed).epsilon(1e-7));
        }
    }
}

TEST_CASE("assumption integral") {
    SUBCASE("log-example kernel equals 1/log 2") {
        kernel k = kernel::log_example();
        CHECK(k.assumption_integral() == doctest::Approx(kInvLog2).epsilon(1e-7));
    }
    SUBCASE("single zero atom") {
        kernel k = kernel::exponential_sum({{1.0, 0.0}});
        CHECK(k.assumption_integral() == 1.0);
    }
    SUBCASE("fractional alpha=0.75 eta=0.5: split-at-1 analytic oracle") {
        kernel k = kernel::fractional(0.75, 0.5);
        // [0,1]: 1/(1-a); (1,inf): 1/(a+eta-1); both over Gamma(a)Gamma(1-a).
        const double gg = oracle::gamma_fn(0.75) * oracle::gamma_fn(0.25);
        const double expect = (1.0 / 0.25 + 1.0 / 0.25) / gg;
        CHECK(k.assumption_integral() == doctest::Approx(expect).epsilon(1e-8));
    }
    SUBCASE("identity weight on a singular kernel is rejected") {
        CHECK_THROWS_AS(kernel(bernstein_measure::fractional(0.75), regularity_weight::identity()),
                        divergence_error);
    }
    SUBCASE("eta at the admissibility boundary is rejected") {
        CHECK_THROWS_AS(kernel::fractional(0.75, 0.25), std::invalid_argument);
    }
}

TEST_CASE("balance condition verdicts") {
    SUBCASE("fractional alpha=0.75, Hoelder gamma=0.8: alpha*gamma = 0.6 > 1/2") {
        kernel k = kernel::fractional(0.75);
        balance_report rep = check_balance(k, modulus_spec::hoelder(0.8, 1.0));
        CHECK(rep.satisfied);
        CHECK(rep.singular_mode);
    }
    SUBCASE("fractional alpha=0.6, Hoelder gamma=0.6: 0.36 < 1/2") {
        kernel k = kernel::fractional(0.6);
        balance_report rep = check_balance(k, modulus_spec::hoelder(0.6, 1.0));
        CHECK_FALSE(rep.satisfied);
    }
    SUBCASE("Lipschitz diffusion always balances") {
        balance_report singular = check_balance(kernel::fractional(0.6), modulus_spec::lipschitz(2.0));
        CHECK(singular.satisfied);
        balance_report regular =
            check_balance(kernel::exponential_sum({{1.0, 0.5}}), modulus_spec::lipschitz(2.0));
        CHECK(regular.satisfied);
        CHECK_FALSE(regular.singular_mode);
    }
    SUBCASE("regular kernel with Hoelder gamma below 1/2 fails") {
        kernel k = kernel::exponential_sum({{1.0, 1.0}});
        CHECK_FALSE(check_balance(k, modulus_spec::hoelder(0.4, 1.0)).satisfied);
    }
}

TEST_CASE("measure functional limits along the m ladder") {
    kernel k = kernel::fractional(0.75);  // default eta = 0.375
    double prev_R = 0.0;
    double prev_eps = 1e300;
    double prev_prod = 1e300;
    double prev_ratio = 1e300;
    for (double m : {1.0, 10.0, 100.0, 1000.0}) {
        const double R = k.R_m(m);
        const double eps = k.eps_m(m);
        CHECK(R >= prev_R);          // R_m nondecreasing
        CHECK(eps <= prev_eps);      // eps_m nonincreasing
        const double prod = R * eps;
        const double ratio = eps / k.weight()(m);
        CHECK(prod < prev_prod);     // R_m eps_m -> 0
        CHECK(ratio < prev_ratio);   // eps_m / r(m) -> 0
        prev_R = R;
        prev_eps = eps;
        prev_prod = prod;
        prev_ratio = ratio;
    }
}

TEST_CASE("complete monotonicity smoke test") {
    // Forward differences alternate in sign up to order 3 on a log-spaced grid.
    auto check_cm = [](const kernel& k) {
        for (double t = 0.01; t < 10.0; t *= 2.0) {
            const double d = 0.05 * t;
            const double k0 = k(t), k1 = k(t + d), k2 = k(t + 2 * d), k3 = k(t + 3 * d);
            CHECK(k1 - k0 <= 1e-12);
            CHECK(k2 - 2 * k1 + k0 >= -1e-12);
            CHECK(k3 - 3 * k2 + 3 * k1 - k0 <= 1e-12);
        }
    };
    check_cm(kernel::fractional(0.8));
    check_cm(kernel::gamma(0.6, 1.5));
    check_cm(kernel::exponential_sum({{0.5, 0.1}, {0.25, 2.0}, {1.0, 40.0}}));
    check_cm(kernel::log_example());
}

TEST_CASE("closed-form agreement across alphas at default eta") {
    for (double alpha : {0.6, 0.75, 0.9}) {
        const double eta = default_eta(alpha);
        CHECK(eta > 1.0 - alpha);
        CHECK(eta <= 0.5);
        kernel k = kernel::fractional(alpha);
        for (double m : {1.0, 10.0, 100.0}) {
            CHECK(k.R_m(m) ==
                  doctest::Approx(fractional_R_m_closed_form(alpha, eta, m)).epsilon(1e-6));
            CHECK(k.eps_m(m) ==
                  doctest::Approx(fractional_eps_m_closed_form(alpha, eta, m)).epsilon(1e-6));
        }
    }
}

TEST_CASE("measure validation") {
    CHECK_THROWS_AS(bernstein_measure::atomic({}), std::invalid_argument);
    CHECK_THROWS_AS(bernstein_measure::atomic({{0.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(bernstein_measure::atomic({{1.0, 2.0}, {1.0, 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(bernstein_measure::fractional(0.4), std::invalid_argument);
    CHECK_THROWS_AS(bernstein_measure::fractional(1.0), std::invalid_argument);
    CHECK_THROWS_AS(bernstein_measure::gamma(0.75, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(regularity_weight::power(0.0), std::invalid_argument);
    CHECK_THROWS_AS(regularity_weight::power(0.6), std::invalid_argument);
}
