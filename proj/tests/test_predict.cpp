#include <doctest.h>

#include <cmath>
#include <numbers>

#include "meanlab/error.hpp"
#include "meanlab/predict.hpp"

using namespace meanlab;

namespace {

const PrimeTable& primes1m() {
    static const PrimeTable t = build_primes(1000000);
    return t;
}

} // namespace

TEST_CASE("compare: arithmetic") {
    Prediction pr;
    pr.main_term = 7.385;
    pr.error_budget = 1;
    const Comparison c = compare(7, pr);
    CHECK(c.rel_err == doctest::Approx(0.055));
    pr.main_term = 7;
    CHECK(compare(7, pr).rel_err == 0);
    const Comparison z = compare(0, pr);
    CHECK(std::isinf(z.rel_err));
    CHECK(std::isfinite(z.abs_err));
}

TEST_CASE("local factors") {
    const PrimeTable& P = primes1m();
    CHECK(min_local_factor(one(), 100, P) >= 1);
    const MultSpec alt = custom("alt", [](std::uint64_t, int nu) { return cplx(nu % 2 ? -1 : 1); },
                                true, false);
    // p = 2: 1 - 1/2 + 1/4, p = 3: 1 - 1/3
    CHECK(min_local_factor(alt, 4, P) == doctest::Approx(2.0 / 3));
    CHECK(min_local_factor(squarefree(), 10, P) == doctest::Approx(8.0 / 7));
    CHECK(local_factor(one(), 2, 10).real() == doctest::Approx(1 + 0.5 + 0.25 + 0.125));
}

TEST_CASE("euler product: direct multiplication oracle and vanishing factor") {
    const PrimeTable& P = primes1m();
    cplx direct = 1;
    const MultSpec f = twist(divisor(0.5), 0.7);
    for (std::uint32_t p : P.primes) {
        if (p > 10000) break;
        direct *= local_factor(f, p, 10000);
    }
    const cplx got = euler_product(f, 10000, P);
    CHECK(std::abs(got - direct) / std::abs(direct) < 1e-11);
    CHECK(euler_product(f, 10000, P, 4) == got);
    const MultSpec killer = custom("k", [](std::uint64_t p, int nu) {
        return cplx(p == 3 && nu == 1 ? -3.0 : 0.0);
    }, true, false);
    try {
        euler_product(killer, 100, P);
        FAIL("expected EvaluationError");
    } catch (const EvaluationError& e) {
        CHECK(std::string(e.what()).find("3") != std::string::npos);
    }
}

TEST_CASE("gamma identity") { CHECK(std::exp(std::lgamma(0.5)) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12)); }

TEST_CASE("predict_1_13: f = r and tau = 0 reductions") {
    const PrimeTable& P = primes1m();
    const Params p = resolve(Params{}, 100000);
    const Prediction a = predict_1_13(divisor(0.5), divisor(0.5), 1234.5, p, 100000, P);
    CHECK(a.main_term.real() == doctest::Approx(1234.5).epsilon(1e-14));
    const Prediction b = predict_1_13(squarefree(), one(), 100000, p, 100000, P);
    const Prediction c = predict_2_3(squarefree(), one(), 0.0, 100000, p, 100000, P);
    CHECK(b.main_term == c.main_term);
}

TEST_CASE("predict_2_3: conjugation symmetry") {
    const PrimeTable& P = primes1m();
    Params p = resolve(Params{}, 100000);
    const Prediction a = predict_2_3(twist(one(), -1), one(), 1.0, 100000, p, 100000, P);
    const Prediction b = predict_2_3(twist(one(), 1), one(), -1.0, 100000, p, 100000, P);
    CHECK(std::abs(a.main_term) == doctest::Approx(std::abs(b.main_term)).epsilon(1e-12));
    CHECK(std::abs(a.main_term - std::conj(b.main_term)) < 1e-6 * std::abs(a.main_term));
}

TEST_CASE("sifted: densities, reductions and preconditions") {
    const PrimeTable& P = primes1m();
    CHECK(sifting_density(one(), 1) == 1);
    CHECK(sifting_density(one(), 6) == doctest::Approx(2.0 * 1.5));
    CHECK(sifting_density(squarefree(), 6) == doctest::Approx(1.5 * (4.0 / 3)));
    const Params p = resolve(Params{}, 30);
    const Prediction d1 = predict_4_5(one(), 1, 30, p, 30, P);
    CHECK(d1.main_term.real() == doctest::Approx(30));
    const Prediction d6 = predict_4_5(one(), 6, 30, p, 30, P);
    CHECK(d6.main_term.real() == doctest::Approx(10));
    CHECK_THROWS_AS(predict_4_5(one(), 30030, 10, p, 10, P), PreconditionError);
    const MultSpec grow = custom("g", [](std::uint64_t p, int nu) { return cplx(std::pow(double(p), nu)); },
                                 true, true);
    CHECK_THROWS_AS(sifting_density(grow, 2), EvaluationError);
    const Prediction e = predict_4_5(one(), 30030, 1000000, resolve(Params{}, 1000000), 1000000, P);
    CHECK(e.aux_value("exponent_4_5") > e.aux_value("exponent_4_2"));
}

TEST_CASE("formula ids round trip") {
    for (auto id : {FormulaId::T1_6, FormulaId::T1_10, FormulaId::T1_13, FormulaId::T2_3,
                    FormulaId::T4_5, FormulaId::L2_4})
        CHECK(formula_from_string(to_string(id)) == id);
}
