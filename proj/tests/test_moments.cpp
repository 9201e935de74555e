#include <doctest.h>

#include <cmath>
#include <numbers>

#include "meanlab/error.hpp"
#include "meanlab/moments.hpp"

using namespace meanlab;

namespace {

// composite Simpson on [-12, 12]
double normal_quad(int m) {
    const int n = 24000;
    const double a = -12, h = 24.0 / n;
    double s = 0;
    for (int i = 0; i <= n; ++i) {
        const double z = a + i * h;
        const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
        s += w * std::pow(z, m) * std::exp(-z * z / 2);
    }
    return s * h / 3 / std::sqrt(2 * std::numbers::pi);
}

const PrimeTable& primes() {
    static const PrimeTable t = build_primes(100000);
    return t;
}

} // namespace

TEST_CASE("phi and gaussian moments") {
    CHECK(std::abs(phi(0) - 0.5) < 1e-12);
    CHECK(phi(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
    CHECK(gaussian_moment(2) == 1);
    CHECK(gaussian_moment(3) == 0);
    CHECK(gaussian_moment(4) == 3);
    for (int m = 1; m <= 8; ++m) CHECK(std::abs(gaussian_moment(m) - normal_quad(m)) < 1e-8 * std::max(1.0, gaussian_moment(m)));
    CHECK(std::abs(phi(-0.7) - (1 - phi(0.7))) < 1e-15);
}

TEST_CASE("dist_F examples") {
    CHECK(dist_F(1, omega(), one(), 10) == doctest::Approx(0.8));
    CHECK(dist_F(100, omega(), one(), 1000) == 1);
    CHECK(dist_F(-1, omega(), one(), 1000) == 0);
    // M(3; r) = 1 - 3 + 0 < 0
    const MultSpec neg = custom("neg", [](std::uint64_t p, int) { return cplx(p == 2 ? -3.0 : 0.0); },
                                true, false);
    CHECK_THROWS_AS(dist_F(0, omega(), neg, 3), EvaluationError);
}

TEST_CASE("moment_G: small-x example and guards") {
    const MomentReport g = moment_G(1, omega(), one(), 10, primes());
    CHECK(g.G_m == doctest::Approx(1.1 - 1.1761904761904762).epsilon(1e-12));
    CHECK_THROWS_AS(moment_G(0, omega(), one(), 10, primes()), ContractError);
    const AddSpec loglike = custom_additive("nu", [](std::uint64_t, int nu) { return double(nu); }, false);
    CHECK_THROWS_AS(moment_G(2, loglike, one(), 100, primes()), ContractError);
    MomentOptions o;
    o.allow_non_strong = true;
    CHECK_NOTHROW(moment_G(2, loglike, one(), 100, primes(), o));
}

TEST_CASE("property: binomial expansion of G_m") {
    const std::uint64_t x = 100000;
    const std::vector<double> raw = weighted_raw_moments(4, omega(), divisor(0.5), x);
    for (int m = 1; m <= 4; ++m) {
        const MomentReport g = moment_G(m, omega(), divisor(0.5), x, primes());
        double s = 0;
        for (int k = 0; k <= m; ++k) s += std::tgamma(m + 1) / (std::tgamma(k + 1) * std::tgamma(m - k + 1)) * std::pow(-g.E, m - k) * raw[k];
        CHECK(g.G_m == doctest::Approx(s).epsilon(1e-8));
    }
}

TEST_CASE("ek_report: F monotone in [0,1], sup distance and threads") {
    const auto grid = default_z_grid();
    CHECK(grid.size() == 201);
    CHECK(grid.front() == -4);
    CHECK(grid.back() == 4);
    MomentOptions o1, o4;
    o1.stream.segment_size = o4.stream.segment_size = 10000;
    o4.stream.threads = 4;
    const DistReport a = ek_report(omega(), one(), 100000, primes(), grid, o1);
    const DistReport b = ek_report(omega(), one(), 100000, primes(), grid, o4);
    CHECK(a.F_values == b.F_values);
    double sup = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(a.F_values[i] >= 0);
        CHECK(a.F_values[i] <= 1);
        if (i) CHECK(a.F_values[i] >= a.F_values[i - 1]);
        sup = std::max(sup, std::abs(a.F_values[i] - a.Phi_values[i]));
        CHECK(a.F_values[i] == doctest::Approx(dist_F(a.E + grid[i] * a.D, omega(), one(), 100000)));
    }
    CHECK(a.sup_distance == sup);
}

TEST_CASE("tail check") {
    const TailCheck t0 = tail_check(0, omega(), one(), 10000, primes());
    CHECK(t0.value == doctest::Approx(1).epsilon(1e-14));
    CHECK_THROWS_AS(tail_check(10, omega(), one(), 10000, primes()), ContractError);
    CHECK_THROWS_AS(tail_check(-0.1, omega(), one(), 10000, primes()), ContractError);
}
