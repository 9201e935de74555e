// primesums.hpp
// Prime sums Z(x; f), E_h, D_h, the parameter bundle with its derived
// constants, and numerical checkers for the hypotheses of the mean-value
// estimates.
//
// Hypotheses written with an unspecified implicit constant are reported as a
// measured constant (sup over a y-grid of LHS/RHS) and compared against a
// configurable threshold. Hypotheses with explicit constants are checked
// exactly on the grid.

#pragma once
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "meanlab/funcspec.hpp"
#include "meanlab/sieve.hpp"

namespace meanlab {

// Which parameter ranges and default exponents apply.
enum class Regime {
    Comparison,     // Euler-product main term: a in (0,1/2], b in [a,1)
    Ratio,          // comparison with M(x; r), twisted or not: a in (0,1/4], b in [a,1/2)
    Sifted,         // coprimality-sifted sums: 0 < b <= min(1, A)
};

struct Params {
    double a = 0.1;
    double b = 0.2;
    double A = 1.0;
    double B = 2.1;
    double rho = 1.0;
    double eps = std::numeric_limits<double>::quiet_NaN(); // NaN: default_eps(x)
    std::optional<double> delta1;                          // default: regime maximum
    double tau = 0.0;
    std::optional<double> h_exponent;                      // default: regime value
    double threshold = 10.0;                               // for implicit-constant checks
    // Use the exponent b (as printed in the twisted restatement) instead of
    // the regime exponent in the C1_4 check.
    bool printed_b_exponent = false;

    double eps1() const;   // sqrt(eps)
    double eps2() const;   // eps * eps1
    static double default_eps(std::uint64_t x);
    static double eta(std::uint64_t x); // (log x)^(-1/4)
};

// Fills eps when unset.
Params resolve(Params p, std::uint64_t x);
// Throws ContractError when p violates the ranges of `regime` at x.
void validate(const Params& p, std::uint64_t x, Regime regime);

struct Constants {
    double beta;       // 1 - sin(P)/P, P = pi rho / A
    double beta0;      // 1 - sin(2 pi b/A)/(2 pi b/A)
    double delta0;     // b beta0 / 3
    double delta_thm;  // w_f * delta1
    double h;          // (1 - b)/(min(1, rho) - b); NaN when undefined
    double w_f;        // 1 for real f, 1/2 otherwise
    double delta_4_3;  // b beta(b, A) / 12, beta(b, A) = 1 - sin(pi b/A)/(pi b/A)
    double c_4_2;      // b^3 / (b^2 + 3456 A^2)
};

double beta_of(double P);                  // 1 - sin(P)/P, with beta(0) = 0
double sifted_delta(double b, double A);   // b beta(pi b/A) / 12
double elliott_exponent(double b, double A);

// delta1 used when Params::delta1 is unset.
double default_delta1(const Params& p, Regime regime);
double regime_h(const Params& p, Regime regime);

// Throws ContractError for A <= 0, b <= 0, rho <= 0 or b > 1.
Constants constants(const Params& p, bool f_is_real, Regime regime = Regime::Comparison);

// Z(x; f) = sum_{p <= x} f(p)/p
cplx prime_sum_Z(std::uint64_t x, const MultSpec& f, const PrimeTable& primes);

struct AdditiveStats {
    double E;      // sum r(p) h(p) / p
    double D;      // sqrt(sum r(p) h(p)^2 / p)
    double mu;     // max |h(p)| / D
    double theta;  // mu + 1/D
};
// Throws EvaluationError when D = 0.
AdditiveStats additive_stats(std::uint64_t x, const AddSpec& h, const MultSpec& r,
                             const PrimeTable& primes);

enum class ConditionId { C1_3, C1_4, C1_5, C1_7, C1_8, C1_12, C4_4, C3_1_iv, CLASS_M };
std::string to_string(ConditionId id);
ConditionId condition_from_string(const std::string& s);

struct ConditionReport {
    ConditionId id;
    bool holds = false;
    double measured_constant = 0; // see check_condition for per-condition meaning
    std::vector<double> y_grid;
    std::uint64_t worst_y = 0;
    double value = 0;             // LHS at worst_y (CLASS_M: max_p |f(p)|)
    std::string note;
};

struct CheckOptions {
    Regime regime = Regime::Comparison;
    const AddSpec* h = nullptr; // required for C3_1_iv
    int grid_points = 64;
};

// Geometric grid of n points in ]lo, hi]. Throws RangeError if lo >= hi.
std::vector<double> geometric_grid(double lo, double hi, int n);

// Upper-bound conditions: measured_constant = sup over the grid of LHS/RHS.
//   C1_3 holds iff LHS <= RHS (explicit constant).
//   C1_4, C1_5, C1_7, C1_8, C3_1_iv hold iff measured_constant <= threshold.
// Lower-bound conditions C1_12, C4_4: measured_constant = inf over the grid
// of LHS/RHS, holds iff it is >= 1.
// `params` must already be resolved (eps set).
ConditionReport check_condition(ConditionId id, const Params& params, const MultSpec& f,
                                const MultSpec& r, std::uint64_t x, const PrimeTable& primes,
                                const CheckOptions& opt = {});

// max_p |f(p)| <= A and sum_{p^nu <= x, nu >= 2} |f(p^nu)| log p^nu / p^nu <= B.
// measured_constant carries the truncated sum, value carries max |f(p)|.
ConditionReport class_membership(const MultSpec& spec, double A, double B, std::uint64_t x,
                                 const PrimeTable& primes);

// Hypotheses (i)-(iv) of the weighted Erdos-Kac comparison. Failures are
// returned as human-readable warnings; nothing throws except a degenerate D.
struct GaussianHypotheses {
    double min_r;        // (i) min r(p) over exp(sqrt(log x)) < p <= x
    double D;            // (ii)
    double mu;           // (iii) must be <= 1
    double prime_power;  // (iv) sum r(p^nu)|h(p^nu)| log p^nu / p^nu, nu >= 2
    std::vector<std::string> warnings;
};
GaussianHypotheses gaussian_hypotheses(const AddSpec& h, const MultSpec& r, std::uint64_t x,
                                       const PrimeTable& primes, double threshold = 10.0);

} // namespace meanlab
