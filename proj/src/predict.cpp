#include "meanlab/predict.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "meanlab/error.hpp"
#include "meanlab/numeric.hpp"

namespace meanlab {

namespace {

constexpr std::size_t kPrimeBlock = 1 << 14;
constexpr double kVanishing = 1e-14;

void need_primes(const PrimeTable& primes, std::uint64_t x, const char* who) {
    if (x > primes.bound && x >= 2)
        throw ContractError(std::string(who) + ": prime table does not cover x");
}

// Sum of principal logs of factor(p) over p <= x, in fixed prime blocks.
LogProduct log_product(const std::function<cplx(std::uint64_t)>& factor, std::uint64_t x,
                       const PrimeTable& primes, unsigned threads) {
    const std::size_t n = x < 2 ? 0 : primes.count_upto(x);
    const std::size_t nblocks = (n + kPrimeBlock - 1) / kPrimeBlock;
    std::vector<CompensatedSum> mod(nblocks), arg(nblocks);
    std::vector<std::uint64_t> bad(nblocks, 0);
    parallel_blocks(nblocks, threads, [&](std::size_t b) {
        const std::size_t end = std::min(n, (b + 1) * kPrimeBlock);
        for (std::size_t i = b * kPrimeBlock; i < end; ++i) {
            const std::uint64_t p = primes.primes[i];
            const cplx v = factor(p);
            const double m = std::abs(v);
            if (!(m >= kVanishing)) {
                bad[b] = p;
                return;
            }
            mod[b] += std::log(m);
            arg[b] += std::arg(v);
        }
    });
    LogProduct out;
    CompensatedSum lm, ph;
    for (std::size_t b = 0; b < nblocks; ++b) {
        if (bad[b])
            throw EvaluationError("euler product: local factor at p = " + std::to_string(bad[b]) +
                                  " is (nearly) zero");
        lm.merge(mod[b]);
        ph.merge(arg[b]);
    }
    out.log_modulus = lm.value();
    out.phase = ph.value();
    return out;
}

cplx from_log(double log_modulus, double phase) {
    const double m = std::exp(log_modulus);
    return {m * std::cos(phase), m * std::sin(phase)};
}

// log of e^{-gamma rho} x / (Gamma(rho) log x)
double log_density_factor(double rho, std::uint64_t x) {
    const double lx = std::log(static_cast<double>(x));
    return -kEulerGamma * rho + lx - std::lgamma(rho) - std::log(lx);
}

template <class Fn>
void run_check(std::vector<std::string>& warnings, Fn&& fn) {
    try {
        const ConditionReport rep = fn();
        if (!rep.holds)
            warnings.push_back(to_string(rep.id) +
                               " fails (measured constant " + format_double(rep.measured_constant) +
                               " at y = " + std::to_string(rep.worst_y) + ")");
    } catch (const RangeError& e) {
        warnings.push_back(std::string("check skipped: ") + e.what());
    }
}

void ratio_checks(Prediction& pr, const MultSpec& f, const MultSpec& r, const Params& params,
                  std::uint64_t x, const PrimeTable& primes) {
    CheckOptions opt;
    opt.regime = Regime::Ratio;
    for (auto id : {ConditionId::C1_3, ConditionId::C1_4, ConditionId::C1_7, ConditionId::C1_12})
        run_check(pr.warnings, [&] { return check_condition(id, params, f, r, x, primes, opt); });
}

} // namespace

std::string to_string(FormulaId id) {
    switch (id) {
    case FormulaId::T1_6: return "T1_6";
    case FormulaId::T1_10: return "T1_10";
    case FormulaId::T1_13: return "T1_13";
    case FormulaId::T2_3: return "T2_3";
    case FormulaId::T4_5: return "T4_5";
    case FormulaId::L2_4: return "L2_4";
    }
    return "?";
}

FormulaId formula_from_string(const std::string& s) {
    for (auto id : {FormulaId::T1_6, FormulaId::T1_10, FormulaId::T1_13, FormulaId::T2_3,
                    FormulaId::T4_5, FormulaId::L2_4})
        if (to_string(id) == s) return id;
    throw UsageError("unknown formula id '" + s + "'");
}

double Prediction::aux_value(const std::string& key) const {
    for (const auto& [k, v] : aux)
        if (k == key) return v;
    return std::numeric_limits<double>::quiet_NaN();
}

cplx LogProduct::value() const { return from_log(log_modulus, phase); }

Comparison compare(cplx observed, const Prediction& prediction) {
    Comparison c;
    c.id = prediction.id;
    c.x = prediction.x;
    c.observed = observed;
    c.predicted = prediction.main_term;
    c.abs_err = std::abs(observed - prediction.main_term);
    const double mo = std::abs(observed);
    c.rel_err = mo == 0.0 ? std::numeric_limits<double>::infinity() : c.abs_err / mo;
    if (prediction.error_budget > 0)
        c.budget_ratio = c.abs_err / prediction.error_budget;
    else
        c.budget_ratio = c.abs_err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return c;
}

cplx local_factor(const MultSpec& spec, std::uint64_t p, std::uint64_t x) {
    if (p < 2) throw ContractError("local_factor: p must be prime");
    cplx acc = 1.0;
    if (p > x) return acc;
    std::uint64_t pw = 1;
    for (int nu = 1; pw <= x / p; ++nu) {
        pw *= p;
        acc += spec(p, nu) / static_cast<double>(pw);
    }
    return acc;
}

LogProduct euler_log_product(const MultSpec& spec, std::uint64_t x, const PrimeTable& primes,
                             unsigned threads) {
    need_primes(primes, x, "euler_product");
    return log_product([&](std::uint64_t p) { return local_factor(spec, p, x); }, x, primes,
                       threads);
}

cplx euler_product(const MultSpec& spec, std::uint64_t x, const PrimeTable& primes,
                   unsigned threads) {
    return euler_log_product(spec, x, primes, threads).value();
}

LogProduct euler_log_ratio(const MultSpec& f, const MultSpec& g, std::uint64_t x,
                           const PrimeTable& primes, unsigned threads) {
    need_primes(primes, x, "euler_log_ratio");
    // Re-run the denominator on its own first so a vanishing factor of g is
    // reported as such rather than as a blow-up of the ratio.
    log_product([&](std::uint64_t p) { return local_factor(g, p, x); }, x, primes, threads);
    return log_product(
        [&](std::uint64_t p) { return local_factor(f, p, x) / local_factor(g, p, x); }, x, primes,
        threads);
}

double min_local_factor(const MultSpec& spec, std::uint64_t x, const PrimeTable& primes) {
    need_primes(primes, x, "min_local_factor");
    double m = std::numeric_limits<double>::infinity();
    for (std::uint32_t p : primes.primes) {
        if (p > x) break;
        m = std::min(m, std::abs(local_factor(spec, p, x)));
    }
    return m;
}

Prediction predict_1_6(const MultSpec& f, const Params& params_in, std::uint64_t x,
                       const PrimeTable& primes, unsigned threads) {
    if (x < 2) throw ContractError("predict_1_6: x must be >= 2");
    const Params params = resolve(params_in, x);
    if (!(params.rho > 0)) throw ContractError("predict_1_6: rho must be > 0");
    Prediction pr;
    pr.id = FormulaId::T1_6;
    pr.x = x;
    pr.params = params;
    const LogProduct prod = euler_log_product(f, x, primes, threads);
    const double dens = log_density_factor(params.rho, x);
    pr.main_term = from_log(dens + prod.log_modulus, prod.phase);

    const double w = f.is_real() ? 1.0 : 0.5;
    pr.delta = w * default_delta1(params, Regime::Comparison);
    const double z = prime_sum_Z(x, f, primes).real();
    pr.error_budget = std::pow(params.eps, pr.delta) * std::exp(z + dens);

    CheckOptions opt;
    opt.regime = Regime::Comparison;
    // hypotheses need a majorant r; divisor(rho) has r(p) = rho
    const MultSpec r = divisor(params.rho);
    run_check(pr.warnings, [&] {
        return check_condition(ConditionId::C1_3, params, f, r, x, primes, opt);
    });
    run_check(pr.warnings, [&] {
        return check_condition(ConditionId::C1_4, params, f, r, x, primes, opt);
    });
    run_check(pr.warnings, [&] {
        return check_condition(ConditionId::C1_5, params, f, r, x, primes, opt);
    });
    pr.aux.emplace_back("min_local_factor", min_local_factor(f, x, primes));
    return pr;
}

Prediction predict_1_10(const MultSpec& f, const Params& params, std::uint64_t x,
                        const PrimeTable& primes, unsigned threads) {
    Prediction pr = predict_1_6(f, params, x, primes, threads);
    pr.id = FormulaId::T1_10;
    pr.error_budget = std::pow(pr.params.eps, pr.delta) * std::abs(pr.main_term);
    return pr;
}

Prediction predict_1_13(const MultSpec& f, const MultSpec& r, cplx mean_r, const Params& params_in,
                        std::uint64_t x, const PrimeTable& primes, unsigned threads) {
    if (x < 2) throw ContractError("predict_1_13: x must be >= 2");
    if (mean_r == 0.0) throw ContractError("predict_1_13: M(x; r) must be non-zero");
    const Params params = resolve(params_in, x);
    Prediction pr;
    pr.id = FormulaId::T1_13;
    pr.x = x;
    pr.params = params;
    const LogProduct L = euler_log_ratio(f, r, x, primes, threads);
    pr.main_term = mean_r * L.value();

    const double w = f.is_real() ? 1.0 : 0.5;
    pr.delta = w * default_delta1(params, Regime::Ratio);
    const double lx = std::log(static_cast<double>(x));
    const double zr = prime_sum_Z(x, r, primes).real();
    pr.error_budget = static_cast<double>(x) * std::pow(params.eps, pr.delta) * std::exp(zr) / lx;
    ratio_checks(pr, f, r, params, x, primes);
    return pr;
}

Prediction predict_2_3(const MultSpec& f, const MultSpec& r, double tau, cplx mean_r,
                       const Params& params_in, std::uint64_t x, const PrimeTable& primes,
                       unsigned threads) {
    if (x < 2) throw ContractError("predict_2_3: x must be >= 2");
    if (mean_r == 0.0) throw ContractError("predict_2_3: M(x; r) must be non-zero");
    Params params = resolve(params_in, x);
    params.tau = tau;
    const MultSpec ft = twist(f, tau);
    Prediction pr;
    pr.id = FormulaId::T2_3;
    pr.x = x;
    pr.params = params;
    const LogProduct L = euler_log_ratio(ft, r, x, primes, threads);
    pr.main_term = mean_r * L.value();
    if (tau != 0.0) {
        const double ph = tau * std::log(static_cast<double>(x));
        pr.main_term *= cplx(std::cos(ph), std::sin(ph)) / cplx(1.0, tau);
    }
    const double w = f.is_real() ? 1.0 : 0.5;
    pr.delta = w * default_delta1(params, Regime::Ratio);
    pr.error_budget = std::pow(params.eps, pr.delta) * std::abs(mean_r);
    ratio_checks(pr, ft, r, params, x, primes);
    return pr;
}

double sifting_density(const MultSpec& r, std::uint64_t D) {
    if (D < 1) throw ContractError("sifting_density: D must be >= 1");
    double W = 1.0;
    for (const auto& pp : factorize_trial(D).factors) {
        const double p = static_cast<double>(pp.p);
        CompensatedSum sum;
        sum += 1.0;
        double pw = 1.0;
        double prev = std::numeric_limits<double>::infinity();
        bool converged = false;
        for (int nu = 1; nu <= 4000; ++nu) {
            pw *= p;
            const double term = r(pp.p, nu).real() / pw;
            if (!std::isfinite(term) || !std::isfinite(pw))
                throw EvaluationError("sifting_density: local sum at p = " +
                                      std::to_string(pp.p) + " diverges");
            if (nu > 64 && std::fabs(term) >= prev && term != 0.0)
                throw EvaluationError("sifting_density: terms at p = " + std::to_string(pp.p) +
                                      " are not decreasing");
            sum += term;
            prev = std::fabs(term);
            if (std::fabs(term) < 1e-16 * std::fabs(sum.value())) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw EvaluationError("sifting_density: local sum at p = " + std::to_string(pp.p) +
                                  " did not converge");
        W *= sum.value();
    }
    return W;
}

Prediction predict_4_5(const MultSpec& r, std::uint64_t D, cplx mean_r, const Params& params_in,
                       std::uint64_t x, const PrimeTable& primes) {
    if (x < 2) throw ContractError("predict_4_5: x must be >= 2");
    if (D < 1) throw ContractError("predict_4_5: D must be >= 1");
    const std::uint64_t pplus = factorize_trial(D).largest_prime();
    if (pplus > x)
        throw PreconditionError("predict_4_5: P+(D) = " + std::to_string(pplus) + " exceeds x = " +
                                std::to_string(x));
    const Params params = resolve(params_in, x);
    Prediction pr;
    pr.id = FormulaId::T4_5;
    pr.x = x;
    pr.params = params;
    const double W = sifting_density(r, D);
    pr.main_term = mean_r / W;

    const double lx = std::log(static_cast<double>(x));
    const double delta = sifted_delta(params.b, params.A);
    const double c = elliott_exponent(params.b, params.A);
    const double loglog3D = std::log(std::log(3.0 * static_cast<double>(D)));
    const double chi =
        loglog3D > std::pow(lx, params.b * params.b * params.b / (17 * std::pow(params.A, 3)))
            ? 1.0
            : 0.0;
    const double M = std::abs(mean_r);
    const double err45 = M * std::pow(lx, -delta / 2);
    const double loglog2D = std::max(0.0, std::log(std::log(2.0 * static_cast<double>(D))));
    const double err42 = M * std::pow(loglog2D, 1.0 + params.A) * std::pow(lx, -c);
    pr.delta = delta / 2;
    pr.error_budget = err45 + chi * M / W;
    pr.aux = {{"W", W},
              {"chi", chi},
              {"exponent_4_5", delta / 2},
              {"exponent_4_2", c},
              {"error_4_5", err45},
              {"error_4_2", err42}};

    CheckOptions opt;
    opt.regime = Regime::Sifted;
    run_check(pr.warnings, [&] {
        return check_condition(ConditionId::C4_4, params, r, r, x, primes, opt);
    });
    return pr;
}

LemmaRatio lemma_2_2_ratio(const MultSpec& r, const Params& params_in, std::uint64_t x,
                           int grid_size, const ValueTable& r_table, const PrimeTable& primes) {
    if (r_table.bound() < x) throw ContractError("lemma_2_2_ratio: table does not cover x");
    need_primes(primes, x, "lemma_2_2_ratio");
    const Params params = resolve(params_in, x);
    const double lx = std::log(static_cast<double>(x));
    LemmaRatio out;
    CheckOptions opt;
    opt.regime = Regime::Ratio;
    try {
        out.lower_bound = check_condition(ConditionId::C1_12, params, r, r, x, primes, opt);
    } catch (const RangeError&) {
        out.lower_bound.id = ConditionId::C1_12;
        out.lower_bound.note = "empty y-grid";
    }
    const std::vector<double> grid =
        geometric_grid(std::exp(2.0 * params.eps1() * lx), static_cast<double>(x), grid_size);

    // Z(z; r) through a running sum over primes; grid is ascending.
    CompensatedSum z;
    std::size_t pi = 0;
    out.min = std::numeric_limits<double>::infinity();
    out.max = -std::numeric_limits<double>::infinity();
    for (double zz : grid) {
        const auto fz = static_cast<std::uint64_t>(std::floor(zz));
        while (pi < primes.size() && primes.primes[pi] <= fz) {
            z += r(primes.primes[pi], 1).real() / primes.primes[pi];
            ++pi;
        }
        const double M = r_table.prefix(fz).real();
        const double ratio = M * std::log(zz) / (zz * std::exp(z.value()));
        out.points.emplace_back(zz, ratio);
        out.min = std::min(out.min, ratio);
        out.max = std::max(out.max, ratio);
    }
    return out;
}

} // namespace meanlab
