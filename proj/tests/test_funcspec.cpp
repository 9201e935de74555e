#include <doctest.h>

#include <cmath>
#include <random>

#include "meanlab/error.hpp"
#include "meanlab/funcspec.hpp"
#include "meanlab/primesums.hpp"

using namespace meanlab;

namespace {

const SpfTable& spf100k() {
    static const SpfTable s = build_spf(100000);
    return s;
}

// naive mu^2 sieve
std::vector<int> mu2_oracle(std::uint64_t N) {
    std::vector<int> m(N + 1, 1);
    for (std::uint64_t d = 2; d * d <= N; ++d)
        for (std::uint64_t k = d * d; k <= N; k += d * d) m[k] = 0;
    return m;
}

std::uint64_t gcd(std::uint64_t a, std::uint64_t b) { return b ? gcd(b, a % b) : a; }

} // namespace

TEST_CASE("eval: catalog examples at x = 10") {
    const SpfTable s = build_spf(10);
    const ValueTable o = eval_mult(one(), 10, s);
    for (int n = 1; n <= 10; ++n) CHECK(o.value(n) == cplx(1));
    CHECK(summatory(o, 10) == cplx(10));
    const ValueTable q = eval_mult(squarefree(), 10, s);
    CHECK(summatory(q, 10).real() == doctest::Approx(7));
    const SpfTable s12 = build_spf(12);
    CHECK(eval_mult(omega_exp(2), 12, s12).value(12).real() == doctest::Approx(4));
    CHECK(summatory(eval_mult(omega_exp(2), 12, s12), 4).real() == doctest::Approx(7));
    CHECK_THROWS_AS(summatory(o, 11), ContractError);
    CHECK_THROWS_AS(summatory(o, 0), ContractError);
}

TEST_CASE("eval: squarefree against mu^2 oracle") {
    const auto m = mu2_oracle(100000);
    const ValueTable q = eval_mult(squarefree(), 100000, spf100k());
    long cnt = 0;
    for (int n = 1; n <= 100000; ++n) {
        REQUIRE(q.value(n).real() == m[n]);
        cnt += m[n];
    }
    CHECK(q.prefix(100000).real() == cnt);
}

TEST_CASE("eval: non-finite rule raises naming (p, nu)") {
    const MultSpec bad = custom("bad", [](std::uint64_t p, int nu) {
        return p == 3 && nu == 2 ? cplx(NAN) : cplx(1);
    }, true, true);
    try {
        eval_mult(bad, 100, spf100k());
        FAIL("expected EvaluationError");
    } catch (const EvaluationError& e) {
        const std::string w = e.what();
        CHECK(w.find("3") != std::string::npos);
    }
}

TEST_CASE("property: multiplicativity fuzz") {
    std::mt19937_64 rng(11);
    const MultSpec f = divisor(0.37);
    const ValueTable t = eval_mult(f, 100000, spf100k());
    for (int i = 0; i < 3000; ++i) {
        const std::uint64_t a = 1 + rng() % 316, b = 1 + rng() % 316;
        if (gcd(a, b) != 1) continue;
        CHECK(std::abs(t.value(a * b) - t.value(a) * t.value(b)) < 1e-12);
    }
}

TEST_CASE("property: additivity of omega and bigomega") {
    const ValueTable w = eval_add(omega(), 100000, spf100k());
    const ValueTable W = eval_add(bigomega(), 100000, spf100k());
    CHECK(w.value(360).real() == 3);
    CHECK(W.value(360).real() == 6);
    CHECK(w.value(1).real() == 0);
    for (std::uint64_t a = 1; a < 300; a += 7)
        for (std::uint64_t b = 1; b < 300; b += 11)
            if (gcd(a, b) == 1) CHECK(w.value(a * b) == w.value(a) + w.value(b));
}

TEST_CASE("convolution: examples and table oracle") {
    const SpfTable s = build_spf(1000);
    const ValueTable d = eval_mult(convolve_spec(one(), one()), 1000, s);
    CHECK(d.value(6).real() == doctest::Approx(4));
    const ValueTable c = eval_mult(convolve_spec(one(), squarefree()), 1000, s);
    CHECK(c.value(4).real() == doctest::Approx(2));
    // spec-level convolution equals the direct Dirichlet convolution
    const MultSpec f = divisor(0.5), g = twist(squarefree(), 0.3);
    const ValueTable direct =
        convolve_table(eval_mult(f, 1000, s), eval_mult(g, 1000, s), 1000);
    const ValueTable viaspec = eval_mult(convolve_spec(f, g), 1000, s);
    for (int n = 1; n <= 1000; ++n) REQUIRE(std::abs(direct.value(n) - viaspec.value(n)) < 1e-12);
    CHECK_THROWS_AS(convolve_table(eval_mult(f, 1000, s), eval_mult(g, 1000, s), 1001),
                    ContractError);
}

TEST_CASE("exp_extension examples") {
    const MultSpec s1 = exp_extension(PrimeValues{{2, 1.0}, {3, 0.0}, {5, 2.0}});
    CHECK(s1(2, 2).real() == doctest::Approx(0.5));
    CHECK(s1(3, 1).real() == 0);
    CHECK(s1(3, 4).real() == 0);
    CHECK(s1(5, 3).real() == doctest::Approx(8.0 / 6.0));
    CHECK(s1(7, 1).real() == 0);
}

TEST_CASE("cofactor: r = s gives the identity, round trip on a table") {
    const MultSpec r = divisor(0.8);
    const MultSpec t = cofactor(r, r);
    for (std::uint64_t p : {2u, 3u, 101u})
        for (int nu = 1; nu <= 5; ++nu) CHECK(std::abs(t(p, nu)) < 1e-15);
    const MultSpec s = exp_extension(PrimeValues{{2, 0.3}, {7, 0.25}, {11, 0.4}});
    const SpfTable& sp = spf100k();
    const ValueTable st = eval_mult(convolve_spec(s, cofactor(r, s)), 100000, sp);
    const ValueTable rt = eval_mult(r, 100000, sp);
    for (int n = 1; n <= 100000; ++n) REQUIRE(std::abs(st.value(n) - rt.value(n)) < 1e-9);
}

TEST_CASE("twist and coprime") {
    CHECK(twist(one(), 0).canonical() == one().canonical());
    const cplx v = twist(one(), 1.0)(2, 1);
    CHECK(v.real() == doctest::Approx(0.769239).epsilon(1e-6));
    CHECK(v.imag() == doctest::Approx(-0.638961).epsilon(1e-6));
    CHECK_FALSE(twist(one(), 1.0).is_real());
    CHECK(restrict_coprime(one(), 1).canonical() == one().canonical());
    const MultSpec c = restrict_coprime(divisor(0.5), 30030);
    CHECK(c(2, 1) == cplx(0));
    CHECK(c(13, 3) == cplx(0));
    CHECK(c(17, 1).real() == doctest::Approx(0.5));
}

TEST_CASE("catalog: divisor rule and bigomega_exp guard") {
    const MultSpec d = divisor(0.5);
    CHECK(d(3, 1).real() == doctest::Approx(0.5));
    CHECK(d(3, 2).real() == doctest::Approx(0.375));  // C(1.5, 2)
    CHECK(divisor(2)(5, 3).real() == doctest::Approx(4)); // d(p^3) = 4
    CHECK_THROWS_AS(bigomega_exp(2.0), ContractError);
    CHECK(bigomega_exp(1.5)(2, 3).real() == doctest::Approx(3.375));
}

TEST_CASE("block minorant: 0 <= s <= r/2, s <= r on a non-constant r, empty range") {
    const PrimeTable primes = build_primes(1000000);
    const BlockMinorant bm = block_minorant(one(), 0.2, 0.05, 1000000, primes);
    CHECK(bm.eps2 == doctest::Approx(0.05 * 0.05 * 0.05));
    CHECK(bm.k_lo <= bm.k_hi);
    for (std::uint32_t p : primes.primes) {
        const double s = bm.s_at(p);
        REQUIRE(s >= 0);
        REQUIRE(s <= 0.5 + 1e-15);
    }
    const MultSpec r2 = custom("alt", [](std::uint64_t p, int) { return cplx(p % 4 == 1 ? 1.5 : 0.5); },
                               true, true);
    const BlockMinorant b2 = block_minorant(r2, 0.2, 0.05, 1000000, primes);
    for (std::uint32_t p : primes.primes) REQUIRE(b2.s_at(p) <= r2(p, 1).real() / 2 + 1e-15);
    CHECK_THROWS_AS(block_minorant(one(), 0.2, 0.5, 3, build_primes(10)), RangeError);
}

TEST_CASE("squarefree split: Z additivity") {
    const PrimeTable primes = build_primes(1000000);
    const BlockMinorant bm = block_minorant(one(), 0.2, 0.05, 1000000, primes);
    const auto [s1, t1] = squarefree_split(one(), bm, primes);
    const cplx zr = prime_sum_Z(1000000, one(), primes);
    const cplx zs = prime_sum_Z(1000000, s1, primes) + prime_sum_Z(1000000, t1, primes);
    CHECK(std::abs(zr - zs) < 1e-12);
    CHECK(s1(2, 2) == cplx(0));
    CHECK(t1(3, 2) == cplx(0));
}

TEST_CASE("streaming matches tables and is thread independent") {
    const std::uint64_t x = 100000;
    const ValueTable rt = eval_mult(divisor(0.5), x, spf100k());
    const ValueTable ht = eval_add(omega(), x, spf100k());
    StreamOptions opt;
    opt.segment_size = 6000;
    for (unsigned th : {1u, 4u}) {
        opt.threads = th;
        std::vector<double> rs(x + 1), hs(x + 1);
        stream_values(divisor(0.5), omega(), x, opt,
                      [&](std::size_t, std::uint64_t lo, std::span<const double> r,
                          std::span<const double> h) {
                          for (std::size_t i = 0; i < r.size(); ++i) {
                              rs[lo + i] = r[i];
                              hs[lo + i] = h[i];
                          }
                      });
        for (std::uint64_t n = 1; n <= x; ++n) {
            REQUIRE(rs[n] == doctest::Approx(rt.value(n).real()).epsilon(1e-14));
            REQUIRE(hs[n] == ht.value(n).real());
        }
    }
    CHECK(stream_segment_count(x, opt) == (x + 5999) / 6000);
}
