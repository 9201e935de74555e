#include <doctest.h>

#include <cmath>
#include <numbers>

#include "meanlab/error.hpp"
#include "meanlab/primesums.hpp"

using namespace meanlab;

TEST_CASE("constants: closed forms") {
    CHECK(std::abs(beta_of(std::numbers::pi) - 1.0) < 1e-15);
    CHECK(beta_of(0) == 0);
    CHECK(sifted_delta(1, 1) == doctest::Approx(1.0 / 12).epsilon(1e-15));
    CHECK(elliott_exponent(1, 1) == doctest::Approx(1.0 / 3457).epsilon(1e-15));
    CHECK(elliott_exponent(0.2, 1) == doctest::Approx(0.008 / (0.04 + 3456)).epsilon(1e-15));
    for (double b = 0.05; b <= 1.0; b += 0.05)
        for (double A = 1; A <= 4; A += 0.5) CHECK(sifted_delta(b, A) >= b * b * b / (12 * A * A));
    Params p;
    p.b = 0.2;
    const Constants c = constants(p, true);
    CHECK(c.w_f == 1);
    CHECK(constants(p, false).w_f == 0.5);
    CHECK(c.beta0 == doctest::Approx(beta_of(2 * std::numbers::pi * 0.2)));
    CHECK(c.delta0 == doctest::Approx(0.2 * c.beta0 / 3));
    CHECK(c.h == doctest::Approx(0.8 / 0.8));
    p.rho = 0.5;
    CHECK(constants(p, true).h == doctest::Approx(0.8 / 0.3));
    p.b = 0;
    CHECK_THROWS_AS(constants(p, true), ContractError);
    p.b = 0.2;
    p.A = -1;
    CHECK_THROWS_AS(constants(p, true), ContractError);
}

TEST_CASE("params: default eps and eta") {
    CHECK(Params::default_eps(10000000) == doctest::Approx(1 / std::sqrt(std::log(1e7))));
    CHECK(Params::default_eps(std::uint64_t{1} << 62) >= 0.02);
    CHECK(Params::eta(10000) == doctest::Approx(std::pow(std::log(1e4), -0.25)));
    const Params r = resolve(Params{}, 1000000);
    CHECK(r.eps == doctest::Approx(Params::default_eps(1000000)));
    CHECK(r.eps1() == doctest::Approx(std::sqrt(r.eps)));
}

TEST_CASE("prime sums: Mertens and additivity") {
    const PrimeTable primes = build_primes(1000000);
    const double z = prime_sum_Z(1000000, one(), primes).real();
    CHECK(z == doctest::Approx(std::log(std::log(1e6)) + 0.2614972128).epsilon(1e-4));
    // Z(x; f + g) = Z(x; f) + Z(x; g) on primes
    const cplx a = prime_sum_Z(100000, divisor(0.3), primes);
    const cplx b = prime_sum_Z(100000, divisor(0.7), primes);
    CHECK(std::abs(a + b - prime_sum_Z(100000, one(), primes)) < 1e-12);
    const AdditiveStats st = additive_stats(10, omega(), one(), primes);
    CHECK(st.E == doctest::Approx(1.0 / 2 + 1.0 / 3 + 1.0 / 5 + 1.0 / 7));
    CHECK(st.D == doctest::Approx(std::sqrt(st.E)));
    CHECK(st.theta == doctest::Approx(2 / st.D));
    const AddSpec zero = custom_additive("zero", [](std::uint64_t, int) { return 0.0; }, true);
    CHECK_THROWS_AS(additive_stats(100, zero, one(), primes), EvaluationError);
}

TEST_CASE("conditions: trivial cases") {
    const PrimeTable primes = build_primes(1000000);
    const Params p = resolve(Params{}, 1000000);
    const ConditionReport r = check_condition(ConditionId::C1_3, p, one(), one(), 1000000, primes);
    CHECK(r.holds);
    CHECK(r.measured_constant == 0);
    const ConditionReport m = class_membership(squarefree(), 1, 0.001, 1000000, primes);
    CHECK(m.holds);
    CHECK(m.measured_constant == 0);
    CHECK_FALSE(class_membership(divisor(2), 1, 10, 1000000, primes).holds);
    CHECK_THROWS_AS(geometric_grid(5, 5, 8), RangeError);
    const auto g = geometric_grid(2, 1000, 64);
    CHECK(g.size() == 64);
    CHECK(g.back() == doctest::Approx(1000));
    CHECK(g.front() > 2);
    for (auto id : {ConditionId::C1_4, ConditionId::C1_5, ConditionId::C1_7, ConditionId::C1_8})
        CHECK(check_condition(id, p, one(), one(), 1000000, primes).holds);
    CHECK(condition_from_string(to_string(ConditionId::C3_1_iv)) == ConditionId::C3_1_iv);
}

TEST_CASE("gaussian hypotheses for (one, omega)") {
    const PrimeTable primes = build_primes(1000000);
    const GaussianHypotheses g = gaussian_hypotheses(omega(), one(), 1000000, primes);
    CHECK(g.min_r == 1);
    // omega(p^nu) = 1: sum of log p^nu / p^nu over nu >= 2
    CHECK(g.prime_power == doctest::Approx(1.98).epsilon(0.01));
    CHECK(g.warnings.empty());
    CHECK(g.mu <= 1);
}
