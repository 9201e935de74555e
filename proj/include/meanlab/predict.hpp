// predict.hpp
// Truncated Euler products and the predicted main terms of the mean-value
// estimates, with observed-vs-predicted comparison.
//
// Observed values always come from exact sieved tables supplied by the
// caller; nothing in here evaluates M(x; f) for the function being predicted.
// M(x; r) for the comparison function r is an input.

#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "meanlab/funcspec.hpp"
#include "meanlab/primesums.hpp"
#include "meanlab/sieve.hpp"

namespace meanlab {

inline constexpr double kEulerGamma = 0.5772156649015329;

enum class FormulaId { T1_6, T1_10, T1_13, T2_3, T4_5, L2_4 };
std::string to_string(FormulaId id);
FormulaId formula_from_string(const std::string& s);

struct Prediction {
    FormulaId id = FormulaId::T1_6;
    cplx main_term = 0;
    double error_budget = 0;
    std::uint64_t x = 0;
    Params params;
    double delta = 0;                 // exponent of eps in the budget
    std::vector<std::string> warnings; // failed hypothesis checks
    std::vector<std::pair<std::string, double>> aux;

    double aux_value(const std::string& key) const;
};

struct Comparison {
    FormulaId id = FormulaId::T1_6;
    std::uint64_t x = 0;
    cplx observed = 0;
    cplx predicted = 0;
    double abs_err = 0;
    double rel_err = 0;      // +inf when observed == 0
    double budget_ratio = 0; // abs_err / error_budget
};

Comparison compare(cplx observed, const Prediction& prediction);

// sum_{0 <= nu <= log x / log p} f(p^nu) / p^nu
cplx local_factor(const MultSpec& spec, std::uint64_t p, std::uint64_t x);

// Sum of principal logarithms of per-prime factors, accumulated in fixed
// blocks of primes so the result is independent of the thread count.
struct LogProduct {
    double log_modulus = 0;
    double phase = 0;
    cplx value() const;
};

// prod_{p <= x} local_factor(spec, p, x). Throws EvaluationError naming p when
// a factor has modulus < 1e-14.
LogProduct euler_log_product(const MultSpec& spec, std::uint64_t x, const PrimeTable& primes,
                             unsigned threads = 1);
cplx euler_product(const MultSpec& spec, std::uint64_t x, const PrimeTable& primes,
                   unsigned threads = 1);
// prod_p local_factor(f)/local_factor(g)
LogProduct euler_log_ratio(const MultSpec& f, const MultSpec& g, std::uint64_t x,
                           const PrimeTable& primes, unsigned threads = 1);

double min_local_factor(const MultSpec& spec, std::uint64_t x, const PrimeTable& primes);

// e^{-gamma rho} x / (Gamma(rho) log x) * euler_product(f, x)
Prediction predict_1_6(const MultSpec& f, const Params& params, std::uint64_t x,
                       const PrimeTable& primes, unsigned threads = 1);
// Same main term with the relative budget eps^delta |main|.
Prediction predict_1_10(const MultSpec& f, const Params& params, std::uint64_t x,
                        const PrimeTable& primes, unsigned threads = 1);
// M(x; r) * prod_p lf(f)/lf(r)
Prediction predict_1_13(const MultSpec& f, const MultSpec& r, cplx mean_r, const Params& params,
                        std::uint64_t x, const PrimeTable& primes, unsigned threads = 1);
// x^{i tau} M(x; r)/(1 + i tau) * prod_p lf(f_tau)/lf(r)
Prediction predict_2_3(const MultSpec& f, const MultSpec& r, double tau, cplx mean_r,
                       const Params& params, std::uint64_t x, const PrimeTable& primes,
                       unsigned threads = 1);

// W_r(D) = prod_{p | D} sum_{nu >= 0} r(p^nu)/p^nu (untruncated).
double sifting_density(const MultSpec& r, std::uint64_t D);

// M(x; r)/W_r(D). Throws PreconditionError when P+(D) > x. aux carries
// chi, the exponent delta/2, the older exponent c and both error terms.
Prediction predict_4_5(const MultSpec& r, std::uint64_t D, cplx mean_r, const Params& params,
                       std::uint64_t x, const PrimeTable& primes);

struct LemmaRatio {
    std::vector<std::pair<double, double>> points; // (z, ratio)
    double min = 0;
    double max = 0;
    ConditionReport lower_bound; // the C1_12 check for r
};

// ratio(z) = M(z; r) log z / (z e^{Re Z(z; r)}) over a geometric grid in
// ]x^{2 eps1}, x]. `r_table` must cover x.
LemmaRatio lemma_2_2_ratio(const MultSpec& r, const Params& params, std::uint64_t x,
                           int grid_size, const ValueTable& r_table, const PrimeTable& primes);

} // namespace meanlab
