#include "meanlab/primesums.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "meanlab/error.hpp"
#include "meanlab/numeric.hpp"

namespace meanlab {

double Params::eps1() const { return std::sqrt(eps); }
double Params::eps2() const { return eps * std::sqrt(eps); }

double Params::default_eps(std::uint64_t x) {
    return std::max(1.0 / std::sqrt(std::log(static_cast<double>(x))), 0.02);
}

double Params::eta(std::uint64_t x) {
    return std::pow(std::log(static_cast<double>(x)), -0.25);
}

Params resolve(Params p, std::uint64_t x) {
    if (std::isnan(p.eps)) p.eps = Params::default_eps(x);
    return p;
}

void validate(const Params& p, std::uint64_t x, Regime regime) {
    auto fail = [](const std::string& m) { throw ContractError("params: " + m); };
    const double lx = std::log(static_cast<double>(x));
    if (!(p.A > 0)) fail("A must be > 0");
    if (!(p.B > 0)) fail("B must be > 0");
    switch (regime) {
    case Regime::Comparison:
        if (!(p.a > 0 && p.a <= 0.5)) fail("a must lie in (0, 1/2]");
        if (!(p.b >= p.a && p.b < 1)) fail("b must lie in [a, 1)");
        if (!(p.A >= 2 * p.b)) fail("A must be >= 2b");
        if (!(p.rho >= 2 * p.b && p.rho <= p.A)) fail("rho must lie in [2b, A]");
        break;
    case Regime::Ratio:
        if (!(p.a > 0 && p.a <= 0.25)) fail("a must lie in (0, 1/4]");
        if (!(p.b >= p.a && p.b < 0.5)) fail("b must lie in [a, 1/2)");
        if (!(p.A >= 2 * p.b)) fail("A must be >= 2b");
        break;
    case Regime::Sifted:
        if (!(p.b > 0 && p.b <= std::min(1.0, p.A))) fail("b must lie in (0, min(1, A)]");
        break;
    }
    if (regime != Regime::Sifted) {
        if (lx < 4) fail("x must be >= e^4");
        if (!(p.eps > 1.0 / std::sqrt(lx) && p.eps <= 0.5))
            fail("eps must lie in (1/sqrt(log x), 1/2]");
    }
}

double beta_of(double P) {
    if (P == 0.0) return 0.0;
    return 1.0 - std::sin(P) / P;
}

double sifted_delta(double b, double A) {
    return b * beta_of(std::numbers::pi * b / A) / 12.0;
}

double elliott_exponent(double b, double A) { return b * b * b / (b * b + 3456.0 * A * A); }

double regime_h(const Params& p, Regime regime) {
    if (p.h_exponent) return *p.h_exponent;
    if (regime == Regime::Comparison) {
        const double den = std::min(1.0, p.rho) - p.b;
        return den > 0 ? (1.0 - p.b) / den : std::numeric_limits<double>::quiet_NaN();
    }
    return (1.0 - p.b) / p.b;
}

double default_delta1(const Params& p, Regime regime) {
    if (p.delta1) return *p.delta1;
    switch (regime) {
    case Regime::Comparison:
        return 2.0 / 3.0 * beta_of(std::numbers::pi * p.rho / p.A) * p.b;
    case Regime::Ratio:
        return p.b * beta_of(2 * std::numbers::pi * p.b / p.A) / 3.0;
    case Regime::Sifted:
        return sifted_delta(p.b, p.A);
    }
    return 0;
}

Constants constants(const Params& p, bool f_is_real, Regime regime) {
    if (!(p.A > 0) || !(p.b > 0) || !(p.rho > 0) || p.b > 1)
        throw ContractError("constants: need A > 0, rho > 0 and 0 < b <= 1");
    Constants c{};
    c.beta = beta_of(std::numbers::pi * p.rho / p.A);
    c.beta0 = beta_of(2 * std::numbers::pi * p.b / p.A);
    c.delta0 = p.b * c.beta0 / 3.0;
    c.w_f = f_is_real ? 1.0 : 0.5;
    c.delta_thm = c.w_f * default_delta1(p, regime);
    const double den = std::min(1.0, p.rho) - p.b;
    c.h = den > 0 ? (1.0 - p.b) / den : std::numeric_limits<double>::quiet_NaN();
    c.delta_4_3 = sifted_delta(p.b, p.A);
    c.c_4_2 = elliott_exponent(p.b, p.A);
    return c;
}

cplx prime_sum_Z(std::uint64_t x, const MultSpec& f, const PrimeTable& primes) {
    if (x > primes.bound && x >= 2) throw ContractError("prime_sum_Z: primes do not cover x");
    CompensatedComplexSum acc;
    for (std::uint32_t p : primes.primes) {
        if (p > x) break;
        acc += f(p, 1) / static_cast<double>(p);
    }
    return acc.value();
}

AdditiveStats additive_stats(std::uint64_t x, const AddSpec& h, const MultSpec& r,
                             const PrimeTable& primes) {
    if (x > primes.bound && x >= 2) throw ContractError("additive_stats: primes do not cover x");
    CompensatedSum e, d2;
    double hmax = 0;
    for (std::uint32_t p : primes.primes) {
        if (p > x) break;
        const double rp = r(p, 1).real();
        const double hp = h(p, 1);
        e += rp * hp / p;
        d2 += rp * hp * hp / p;
        hmax = std::max(hmax, std::fabs(hp));
    }
    AdditiveStats s{};
    s.E = e.value();
    const double dd = d2.value();
    if (!(dd > 0)) throw EvaluationError("additive_stats: degenerate variance (D = 0)");
    s.D = std::sqrt(dd);
    s.mu = hmax / s.D;
    s.theta = s.mu + 1.0 / s.D;
    return s;
}

std::string to_string(ConditionId id) {
    switch (id) {
    case ConditionId::C1_3: return "C1_3";
    case ConditionId::C1_4: return "C1_4";
    case ConditionId::C1_5: return "C1_5";
    case ConditionId::C1_7: return "C1_7";
    case ConditionId::C1_8: return "C1_8";
    case ConditionId::C1_12: return "C1_12";
    case ConditionId::C4_4: return "C4_4";
    case ConditionId::C3_1_iv: return "C3_1_iv";
    case ConditionId::CLASS_M: return "CLASS_M";
    }
    return "?";
}

ConditionId condition_from_string(const std::string& s) {
    for (auto id : {ConditionId::C1_3, ConditionId::C1_4, ConditionId::C1_5, ConditionId::C1_7,
                    ConditionId::C1_8, ConditionId::C1_12, ConditionId::C4_4,
                    ConditionId::C3_1_iv, ConditionId::CLASS_M})
        if (to_string(id) == s) return id;
    throw UsageError("unknown condition id '" + s + "'");
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
    if (!(lo > 0) || !(hi > lo) || n < 1)
        throw RangeError("empty y-grid: ]" + format_double(lo) + ", " + format_double(hi) + "]");
    std::vector<double> g(static_cast<std::size_t>(n));
    const double ratio = std::log(hi / lo);
    for (int i = 1; i <= n; ++i) g[i - 1] = lo * std::exp(ratio * i / n);
    g.back() = hi;
    return g;
}

namespace {

// Prefix sums over the primes <= x of a per-prime quantity; prefix[i] is the
// sum over the first i primes.
class PrimePrefix {
public:
    template <class Fn>
    PrimePrefix(const PrimeTable& primes, std::uint64_t x, Fn&& term)
        : primes_(primes), n_(primes.count_upto(x)), prefix_(n_ + 1, 0.0) {
        CompensatedSum acc;
        for (std::size_t i = 0; i < n_; ++i) {
            acc += term(primes.primes[i]);
            prefix_[i + 1] = acc.value();
        }
    }
    // sum over lo < p <= hi
    double range(double lo, double hi) const { return upto(hi) - upto(lo); }
    double upto(double y) const {
        if (y < 2) return 0.0;
        const auto fy = static_cast<std::uint64_t>(std::floor(y));
        return prefix_[std::min(primes_.count_upto(fy), n_)];
    }

private:
    const PrimeTable& primes_;
    std::size_t n_;
    std::vector<double> prefix_;
};

// r(p) - Re f(p), clamped at 0; counts clamped primes.
struct Deficit {
    const MultSpec& f;
    const MultSpec& r;
    mutable std::size_t violations = 0;
    double operator()(std::uint64_t p) const {
        const double rp = r(p, 1).real();
        const double d = rp - f(p, 1).real();
        if (d < -1e-12 * std::max(1.0, std::fabs(rp))) ++violations;
        return std::max(d, 0.0);
    }
};

std::uint64_t floor_u(double y) { return static_cast<std::uint64_t>(std::floor(y)); }

} // namespace

ConditionReport check_condition(ConditionId id, const Params& params, const MultSpec& f,
                                const MultSpec& r, std::uint64_t x, const PrimeTable& primes,
                                const CheckOptions& opt) {
    if (std::isnan(params.eps)) throw ContractError("check_condition: params not resolved");
    if (x > primes.bound) throw ContractError("check_condition: primes do not cover x");
    if (id == ConditionId::CLASS_M) return class_membership(r, params.A, params.B, x, primes);

    ConditionReport rep;
    rep.id = id;
    const double lx = std::log(static_cast<double>(x));
    const double eps = params.eps;
    const double xeps = std::exp(eps * lx);
    const double delta1 = default_delta1(params, opt.regime);
    Deficit deficit{f, r};

    auto finish_note = [&] {
        if (deficit.violations)
            rep.note = "|f(p)| <= r(p) fails at " + std::to_string(deficit.violations) +
                       " primes (deficit clamped at 0)";
    };

    switch (id) {
    case ConditionId::C1_3: {
        PrimePrefix pre(primes, x, [&](std::uint64_t p) { return deficit(p) / p; });
        const Constants c = constants(params, f.is_real(), opt.regime);
        const double lhs = pre.upto(static_cast<double>(x));
        const double rhs = 0.5 * c.beta * params.b * std::log(1.0 / eps);
        rep.y_grid = {static_cast<double>(x)};
        rep.worst_y = x;
        rep.value = lhs;
        rep.measured_constant = lhs == 0.0 ? 0.0 : lhs / rhs;
        rep.holds = lhs <= rhs;
        break;
    }
    case ConditionId::C1_4: {
        const double h = params.printed_b_exponent ? params.b : regime_h(params, opt.regime);
        if (!std::isfinite(h) || h <= 0) throw ContractError("C1_4: exponent undefined");
        PrimePrefix pre(primes, x, [&](std::uint64_t p) {
            const double lp = std::log(static_cast<double>(p));
            return std::pow(deficit(p), h) * lp / p;
        });
        rep.y_grid = geometric_grid(xeps, static_cast<double>(x), opt.grid_points);
        const double scale = std::pow(eps, delta1 * h);
        for (double y : rep.y_grid) {
            const double lhs = pre.range(xeps, y);
            const double ratio = std::fabs(lhs) / (scale * std::log(y));
            if (ratio >= rep.measured_constant) {
                rep.measured_constant = ratio;
                rep.worst_y = floor_u(y);
                rep.value = lhs;
            }
        }
        rep.holds = rep.measured_constant <= params.threshold;
        if (params.printed_b_exponent) rep.note = "exponent b (printed variant)";
        break;
    }
    case ConditionId::C1_5: {
        PrimePrefix pre(primes, x, [&](std::uint64_t p) {
            const double lp = std::log(static_cast<double>(p));
            return (r(p, 1).real() - params.rho) * lp / p;
        });
        rep.y_grid = geometric_grid(xeps, static_cast<double>(x), opt.grid_points);
        for (double y : rep.y_grid) {
            const double lhs = pre.upto(y);
            const double ratio = std::fabs(lhs) / (eps * std::log(y));
            if (ratio >= rep.measured_constant) {
                rep.measured_constant = ratio;
                rep.worst_y = floor_u(y);
                rep.value = lhs;
            }
        }
        rep.holds = rep.measured_constant <= params.threshold;
        break;
    }
    case ConditionId::C1_7: {
        const double h = opt.regime == Regime::Comparison ? regime_h(params, opt.regime) : 1.0;
        PrimePrefix pre(primes, x, [&](std::uint64_t p) { return std::pow(deficit(p), h) / p; });
        const double lhs = pre.range(xeps, static_cast<double>(x));
        rep.y_grid = {static_cast<double>(x)};
        rep.worst_y = x;
        rep.value = lhs;
        rep.measured_constant = std::fabs(lhs) / std::pow(eps, delta1 * h);
        rep.holds = rep.measured_constant <= params.threshold;
        break;
    }
    case ConditionId::C1_8: {
        double worst = 0;
        std::uint64_t worst_p = x;
        for (std::uint32_t p : primes.primes) {
            if (p > x) break;
            if (p <= xeps) continue;
            const double d = deficit(p);
            if (d > worst) {
                worst = d;
                worst_p = p;
            }
        }
        rep.y_grid = {static_cast<double>(x)};
        rep.worst_y = worst_p;
        rep.value = worst;
        rep.measured_constant = worst / std::pow(eps, delta1);
        rep.holds = rep.measured_constant <= params.threshold;
        break;
    }
    case ConditionId::C1_12:
    case ConditionId::C4_4: {
        const bool sifted = id == ConditionId::C4_4;
        const double width = sifted ? Params::eta(x) : params.eps1();
        const double cst = sifted ? params.b : 4.0 * params.b;
        PrimePrefix pre(primes, x, [&](std::uint64_t p) {
            const double lp = std::log(static_cast<double>(p));
            return r(p, 1).real() * lp / p;
        });
        rep.y_grid = geometric_grid(std::exp(1.0 / width), std::exp(lx / (1.0 + width)),
                                    opt.grid_points);
        rep.measured_constant = std::numeric_limits<double>::infinity();
        for (double y : rep.y_grid) {
            const double ly = std::log(y);
            const double lhs = pre.range(y, std::exp((1.0 + width) * ly));
            const double ratio = lhs / (cst * width * ly);
            if (ratio < rep.measured_constant) {
                rep.measured_constant = ratio;
                rep.worst_y = floor_u(y);
                rep.value = lhs;
            }
        }
        rep.holds = rep.measured_constant >= 1.0;
        break;
    }
    case ConditionId::C3_1_iv: {
        if (!opt.h) throw ContractError("C3_1_iv requires an additive function h");
        const GaussianHypotheses g = gaussian_hypotheses(*opt.h, r, x, primes, params.threshold);
        rep.y_grid = {static_cast<double>(x)};
        rep.worst_y = x;
        rep.value = g.prime_power;
        rep.measured_constant = g.prime_power;
        rep.holds = g.prime_power <= params.threshold;
        break;
    }
    case ConditionId::CLASS_M:
        break;
    }
    finish_note();
    return rep;
}

ConditionReport class_membership(const MultSpec& spec, double A, double B, std::uint64_t x,
                                 const PrimeTable& primes) {
    if (x > primes.bound) throw ContractError("class_membership: primes do not cover x");
    ConditionReport rep;
    rep.id = ConditionId::CLASS_M;
    double fmax = 0;
    std::uint64_t argmax = 1;
    CompensatedSum tail;
    for (std::uint32_t p32 : primes.primes) {
        if (p32 > x) break;
        const std::uint64_t p = p32;
        const double a = std::abs(spec(p, 1));
        if (a > fmax) {
            fmax = a;
            argmax = p;
        }
        const double lp = std::log(static_cast<double>(p));
        std::uint64_t pw = p;
        for (int nu = 2; pw <= x / p; ++nu) {
            pw *= p;
            tail += std::abs(spec(p, nu)) * nu * lp / static_cast<double>(pw);
        }
    }
    rep.y_grid = {static_cast<double>(x)};
    rep.worst_y = argmax;
    rep.value = fmax;
    rep.measured_constant = tail.value();
    rep.holds = fmax <= A && rep.measured_constant <= B;
    return rep;
}

GaussianHypotheses gaussian_hypotheses(const AddSpec& h, const MultSpec& r, std::uint64_t x,
                                       const PrimeTable& primes, double threshold) {
    const AdditiveStats st = additive_stats(x, h, r, primes);
    GaussianHypotheses g{};
    g.D = st.D;
    g.mu = st.mu;
    const double lx = std::log(static_cast<double>(x));
    const double lo = std::exp(std::sqrt(lx));
    g.min_r = std::numeric_limits<double>::infinity();
    CompensatedSum pp;
    for (std::uint32_t p32 : primes.primes) {
        if (p32 > x) break;
        const std::uint64_t p = p32;
        if (p > lo) g.min_r = std::min(g.min_r, r(p, 1).real());
        const double lp = std::log(static_cast<double>(p));
        std::uint64_t pw = p;
        for (int nu = 2; pw <= x / p; ++nu) {
            pw *= p;
            pp += r(p, nu).real() * std::fabs(h(p, nu)) * nu * lp / static_cast<double>(pw);
        }
    }
    g.prime_power = pp.value();
    if (!(g.min_r > 0))
        g.warnings.push_back("(i) min r(p) over exp(sqrt(log x)) < p <= x is " +
                             format_double(g.min_r));
    if (g.D < 1) g.warnings.push_back("(ii) D_h(x; r) = " + format_double(g.D) + " < 1");
    if (g.mu > 1) g.warnings.push_back("(iii) mu_x = " + format_double(g.mu) + " > 1");
    if (g.prime_power > threshold)
        g.warnings.push_back("(iv) prime-power sum " + format_double(g.prime_power) +
                             " exceeds threshold");
    return g;
}

} // namespace meanlab
