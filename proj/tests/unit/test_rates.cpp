#include <doctest.h>

#include <cmath>
#include <limits>

#include "cwbell/errors.hpp"
#include "cwbell/rates.hpp"

using namespace cwbell;

namespace {
const double kTsirelson = 2.0 * std::sqrt(2.0);
const double kWMax = (2.0 + std::sqrt(2.0)) / 4.0;
}  // namespace

TEST_CASE("binary_entropy") {
    CHECK(binary_entropy(0.5) == 1.0);
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.11) == doctest::Approx(0.49991595816452799564).epsilon(1e-14));
    CHECK_THROWS_AS(binary_entropy(-0.01), DomainError);
    CHECK_THROWS_AS(binary_entropy(1.01), DomainError);
}

TEST_CASE("pironio_bound and asymptotic rate") {
    CHECK(pironio_bound(2.0) == doctest::Approx(0.0));
    CHECK(pironio_bound(kTsirelson) == doctest::Approx(1.0));
    CHECK(pironio_bound(2.016) == doctest::Approx(0.0058290803217736509123).epsilon(1e-10));
    CHECK_THROWS_AS(pironio_bound(1.9), DomainError);
    CHECK_THROWS_AS(pironio_bound(2.9), DomainError);

    CHECK(asymptotic_rate(2.0, 1e-5) == 0.0);
    CHECK(asymptotic_rate(kTsirelson, 1e-5) == doctest::Approx(1e5));
    CHECK(asymptotic_rate_per_round(2.016) == doctest::Approx(0.011618951857040534744).epsilon(1e-10));
    CHECK_THROWS_AS(asymptotic_rate(2.1, 0.0), DomainError);
}

TEST_CASE("property: both bounds in [0,1] with common endpoints") {
    for (int i = 0; i <= 1000; ++i) {
        const double s = 2.0 + (kTsirelson - 2.0) * i / 1000.0;
        const double a = pironio_bound(s), b = asymptotic_rate_per_round(s);
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
        CHECK(b >= 0.0);
        CHECK(b <= 1.0 + 1e-15);
    }
}

TEST_CASE("winning_probability") {
    CHECK(winning_probability(2.0) == 0.75);
    CHECK(winning_probability(kTsirelson) == doctest::Approx(kWMax).epsilon(1e-15));
    CHECK(winning_probability(2.016) == doctest::Approx(0.752).epsilon(1e-15));
}

TEST_CASE("g_function and derivative") {
    CHECK(g_function(kWMax, 1.0) == 1.0);
    CHECK(g_function(0.75, 1.0) == 0.0);
    CHECK(g_function(0.8, 1.0) == doctest::Approx(0.34611243579453872305).epsilon(1e-12));
    CHECK(g_derivative(0.8, 1.0) == doctest::Approx(8.338506214397443824).epsilon(1e-10));
    CHECK(g_derivative(0.4, 0.5) == doctest::Approx(16.677012428794887648).epsilon(1e-10));
    CHECK(g_derivative(0.9, 1.0) == 0.0);
    // limit at the lower branch end: 4/ln2
    CHECK(g_derivative(0.75, 1.0) == doctest::Approx(4.0 / std::log(2.0)).epsilon(1e-9));
    CHECK_THROWS_AS(g_function(0.6, 0.5), DomainError);
    CHECK_THROWS_AS(g_function(-0.1, 1.0), DomainError);
}

TEST_CASE("property: g_derivative matches central differences") {
    for (double gamma : {1.0, 0.3}) {
        for (int i = 1; i <= 100; ++i) {
            const double w = 0.75 + (kWMax - 0.75) * i / 101.0;
            const double p = w * gamma, h = 1e-6 * gamma;
            const double fd = (g_function(p + h, gamma) - g_function(p - h, gamma)) / (2 * h);
            CAPTURE(w);
            CHECK(g_derivative(p, gamma) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("epsilon_budget") {
    const auto b = epsilon_budget(1e6, 1.0, 1e-10, 1e-10);
    CHECK(b.eps_sa == 0.0);
    CHECK(b.eps_ea == doctest::Approx(2.5e-11));
    CHECK(b.eps_ex == doctest::Approx(2.5e-11));
    CHECK(b.eps_prime == doctest::Approx(5e-11));
    CHECK(b.eps_1 == doctest::Approx(1.25e-17));
    CHECK(b.feasible());

    const auto h = epsilon_budget(1e8, 0.01, 1e-10, 1e-10);
    CHECK(h.l_max == doctest::Approx(6.6438561897747246957).epsilon(1e-14));
    CHECK(h.eps_sa == 0.0);  // exp(-~6e4) underflows
    CHECK(h.eps_est == doctest::Approx(1e-10));
    CHECK(h.delta_est == doctest::Approx(0.00033930702122075558989).epsilon(1e-12));
    CHECK(h.eps_1 == doctest::Approx(1.25e-19));
    CHECK(h.feasible());

    // small n with gamma < 1: sampling error dominates the budget
    CHECK_THROWS_AS(epsilon_budget(100, 0.01, 1e-10, 1e-10), InfeasibleBudget);
    const auto m = epsilon_budget(3, 0.2, 1e-3, 1e-3);
    CHECK(m.eps_sa > 0.0);
    CHECK(m.eps_sa + m.eps_est == doctest::Approx(1e-3));
    CHECK(m.feasible());

    const auto q = epsilon_budget(4e6, 1.0, 1e-10, 1e-10);
    CHECK(q.delta_est == doctest::Approx(b.delta_est / 2).epsilon(1e-12));
    CHECK_THROWS_AS(epsilon_budget(1e6, 0.0, 1e-10, 1e-10), DomainError);
}

TEST_CASE("property: budgets are self-consistent") {
    for (double n : {1e4, 1e6, 1e9})
        for (double gamma : {0.05, 0.3, 0.5, 0.9, 1.0})
            for (double eps : {1e-3, 1e-10}) {
                try {
                    CHECK(epsilon_budget(n, gamma, eps, eps).feasible());
                } catch (const InfeasibleBudget&) {
                    CHECK(gamma < 1.0);
                }
            }
}

TEST_CASE("eta_opt") {
    const double s = 2.1;
    ProtocolParams p{1.0, winning_probability(s), 0.0, 1e18, 1.0};
    const auto e = eta_opt(p, 5e-11, 2.5e-11);
    CHECK(e.value == doctest::Approx(asymptotic_rate_per_round(s)).epsilon(1e-6));

    p.omega_exp = 0.75;
    p.n = 1e8;
    CHECK(eta_opt(p, 5e-11, 2.5e-11).value == 0.0);

    // second implementation (float64 + scipy)
    struct Case {
        double s, n, gamma, expect;
    };
    for (const Case c : {Case{2.016, 1.75e8, 1.0, -0.006873796736061798},
                         Case{2.1, 1e8, 1.0, 0.0496740159996608},
                         Case{2.2, 1e7, 1.0, 0.07270543073530016},
                         Case{2.3, 1e9, 0.5, 0.23153762540905953}}) {
        const double delta = std::sqrt(std::log(1e10) / (2 * c.n));
        ProtocolParams q{c.gamma, winning_probability(c.s), delta, c.n, 1.0};
        const auto r = eta_opt(q, 5e-11, 2.5e-11);
        CAPTURE(c.s);
        CHECK(r.raw == doctest::Approx(c.expect).epsilon(1e-4));
        CHECK(r.value == std::max(0.0, r.raw));
    }
}

TEST_CASE("property: eta_opt is non-decreasing in n") {
    for (double s : {2.05, 2.2, 2.6}) {
        double prev = -1.0;
        for (double n = 1e5; n <= 1e12; n *= 3) {
            ProtocolParams p{1.0, winning_probability(s), 1e-4, n, 1.0};
            const double v = eta_opt(p, 5e-11, 2.5e-11).raw;
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("output_length") {
    CHECK(output_length(1e6, 0.0, 1e-10) == 0);
    CHECK(output_length(1048576, 0.01, std::ldexp(1.0, -40)) == 10235);
    CHECK(output_length(1e3, 0.001, 1e-10) == 0);
    CHECK(output_length(100, 1.0, 0.5) <= 200);
}

TEST_CASE("seed_length: hand cases") {
    struct Case {
        double n;
        std::int64_t m;
        double eps1;
        std::int64_t ell, a, d;
    };
    for (const Case c : {Case{1048576, 10000, std::ldexp(1.0, -40), 103, 20, 848720},
                         Case{1048576, 207, std::ldexp(1.0, -40), 103, 1, 42436},
                         Case{1e6, 50000, 1e-12, 103, 28, 1188208},
                         Case{1000, 100, 0.01, 27, 4, 11664},
                         Case{1073741824, 1000000, std::ldexp(1.0, -50), 133, 41, 2900996}}) {
        const auto s = seed_length(c.n, c.m, c.eps1);
        CAPTURE(c.m);
        CHECK(s.ell == c.ell);
        CHECK(s.a == c.a);
        CHECK(s.d == c.d);
    }
    CHECK_THROWS_AS(seed_length(1e6, 5, 1e-10), DomainError);
    CHECK_THROWS_AS(seed_length(1e6, 1000, 0.0), DomainError);
}

TEST_CASE("property: seed length grows as eps_1 shrinks") {
    std::int64_t prev = 0;
    for (double e = 1e-2; e > 1e-30; e /= 7) {
        const auto s = seed_length(1e6, 100000, e);
        CHECK(s.d == s.a * (2 * s.ell) * (2 * s.ell));
        CHECK(s.d >= prev);
        prev = s.d;
    }
    CHECK(seed_length(1e6, 100000, 1e-30).d > seed_length(1e6, 100000, 1e-3).d);
}

TEST_CASE("finite and net rates") {
    const double s = 2.1, tau = 1e-5;
    const auto inf = compute_rates(s, tau, std::numeric_limits<double>::infinity(), 1.0, 1e-10, 1e-10);
    CHECK(inf.r_n == doctest::Approx(inf.r_inf).epsilon(1e-6));

    double prev = -1e300;
    for (double n : {1e7, 1e8, 1e9, 1e10}) {
        const auto r = compute_rates(s, tau, n, 1.0, 1e-10, 1e-10);
        CHECK(r.r_n > prev);
        CHECK(r.r_n < inf.r_n);
        CHECK(r.r_net < 0.0);  // gamma = 1 consumes 4 bits per round
        CHECK(r.m <= 2 * static_cast<std::int64_t>(n));
        prev = r.r_n;
    }

    const auto b = epsilon_budget(1e9, 1.0, 1e-10, 1e-10);
    ProtocolParams p{1.0, winning_probability(s), b.delta_est, 1e9, tau};
    const auto r = compute_rates(s, tau, 1e9, 1.0, 1e-10, 1e-10);
    CHECK(finite_rate(p, b) == doctest::Approx(r.r_n).epsilon(1e-12));
    CHECK(net_rate(p, b, static_cast<double>(r.d)) == doctest::Approx(r.r_net).epsilon(1e-12));
    CHECK(asymptotic_net_rate(2.0, tau, 1.0) == doctest::Approx(-2.0 / tau));

    const auto none = compute_rates(2.0, tau, 1e8, 1.0, 1e-10, 1e-10);
    CHECK(none.r_inf == 0.0);
    CHECK(none.m == 0);
}
