// funcspec.hpp
// Multiplicative and additive functions described by their values at prime
// powers, exact evaluation over [1, x], and the convolution algebra used to
// build minorants and cofactors.
//
// A MultSpec is a cheap handle on an immutable expression tree. The implicit
// value at exponent 0 is 1; rule(p, nu) is only consulted for nu >= 1.

#pragma once
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "meanlab/numeric.hpp"
#include "meanlab/sieve.hpp"

namespace meanlab {

namespace detail {
struct MultNode;
struct AddNode;
} // namespace detail

// Sorted (prime, value) pairs; primes not listed have value 0.
using PrimeValues = std::vector<std::pair<std::uint64_t, double>>;

class MultSpec {
public:
    explicit MultSpec(std::shared_ptr<const detail::MultNode> node);

    // f(p^nu); nu == 0 yields 1.
    cplx operator()(std::uint64_t p, int nu) const;
    bool is_real() const;
    bool is_nonnegative() const;
    // Re-parseable expression for catalog/combinator specs; table-backed
    // specs render as an opaque tag.
    std::string canonical() const;
    const detail::MultNode& node() const { return *node_; }

private:
    std::shared_ptr<const detail::MultNode> node_;
};

class AddSpec {
public:
    explicit AddSpec(std::shared_ptr<const detail::AddNode> node);

    double operator()(std::uint64_t p, int nu) const;
    bool strongly_additive() const;
    std::string canonical() const;

private:
    std::shared_ptr<const detail::AddNode> node_;
};

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------
MultSpec one();
MultSpec squarefree();
// divisor(rho): f(p^nu) = C(rho + nu - 1, nu), so f(p) = rho.
MultSpec divisor(double rho);
// z^omega(n)
MultSpec omega_exp(double z);
// z^Omega(n); |z| <= 1.9 enforced.
MultSpec bigomega_exp(double z);
// Arbitrary rule; used by tests and by callers emulating characters.
MultSpec custom(std::string name, std::function<cplx(std::uint64_t, int)> rule, bool is_real,
                bool is_nonnegative);

AddSpec omega();
AddSpec bigomega();
AddSpec custom_additive(std::string name, std::function<double(std::uint64_t, int)> rule,
                        bool strongly_additive);

// ---------------------------------------------------------------------------
// Combinators
// ---------------------------------------------------------------------------
// (f*g)(p^nu) = sum_{0<=j<=nu} f(p^j) g(p^{nu-j})
MultSpec convolve_spec(const MultSpec& f, const MultSpec& g);
// f(p^nu) p^{-i nu tau}
MultSpec twist(const MultSpec& f, double tau);
// zero on primes dividing D
MultSpec restrict_coprime(const MultSpec& f, std::uint64_t D);
// t with s * t = r at every prime power
MultSpec cofactor(const MultSpec& r, const MultSpec& s);
// exponentially multiplicative: s(p^nu) = s(p)^nu / nu!
MultSpec exp_extension(PrimeValues prime_values);
// same, using f(p) (real part) as the prime values
MultSpec exp_extension(const MultSpec& f);
// supported on squarefree integers with the given prime values
MultSpec squarefree_support(PrimeValues prime_values);

// ---------------------------------------------------------------------------
// Value tables
// ---------------------------------------------------------------------------
class ValueTable {
public:
    ValueTable() = default;
    ValueTable(std::uint64_t bound, std::vector<cplx> values);

    std::uint64_t bound() const { return bound_; }
    // f(n), 1 <= n <= bound
    cplx value(std::uint64_t n) const { return values_[n]; }
    std::span<const cplx> values() const { return values_; }
    // M(y; f)
    cplx prefix(std::uint64_t y) const { return prefix_[y]; }

private:
    std::uint64_t bound_ = 0;
    std::vector<cplx> values_;  // index 0 unused (0)
    std::vector<cplx> prefix_;  // prefix_[0] = 0
};

ValueTable eval_mult(const MultSpec& spec, std::uint64_t x, const SpfTable& sieve);
ValueTable eval_add(const AddSpec& spec, std::uint64_t x, const SpfTable& sieve);
// M(y; f); throws ContractError unless 1 <= y <= table.bound()
cplx summatory(const ValueTable& table, std::uint64_t y);
// Dirichlet convolution of two tables on [1, x].
ValueTable convolve_table(const ValueTable& a, const ValueTable& b, std::uint64_t x);

// Streams real values r(n), h(n) for n in [1, x] segment by segment. The
// visitor is called as visit(segment_index, lo, r_values, h_values) where the
// spans cover [lo, lo + len). Segment boundaries depend only on
// segment_size, so per-segment partial results reduced in index order are
// independent of `threads`. Visitors may run concurrently.
struct StreamOptions {
    std::size_t segment_size = std::size_t{1} << 20;
    unsigned threads = 1;
};
std::size_t stream_segment_count(std::uint64_t x, const StreamOptions& opt);
void stream_values(const MultSpec& r, const AddSpec& h, std::uint64_t x,
                   const StreamOptions& opt,
                   const std::function<void(std::size_t, std::uint64_t, std::span<const double>,
                                            std::span<const double>)>& visit);

// ---------------------------------------------------------------------------
// Block minorant s <= r/2 built from blocks ]y_k, y_{k+1}], y_k = exp((1+eps1)^k)
// ---------------------------------------------------------------------------
struct MinorantBlock {
    int k;
    double y_lo;        // y_k
    double y_hi;        // y_{k+1}
    double mass;        // sum over the block of r(p) log p / p
    double b_k;         // mass / (eps1 log y_k)
    std::size_t prime_count;
    bool satisfies;     // b_k >= 4b
};

struct BlockMinorant {
    double b = 0;
    double eps1 = 0;
    double eps2 = 0;    // eps * eps1 = eps1^3
    std::uint64_t x = 0;
    int k_lo = 0, k_hi = -1;
    std::vector<MinorantBlock> blocks;
    PrimeValues s;      // s(p) for primes with s(p) != 0, ascending

    // Blocks where the lower bound b_k >= 4b fails (those containing primes).
    std::vector<int> violating_blocks() const;
    double s_at(std::uint64_t p) const;
};

// r must be real and non-negative. On blocks violating b_k >= 4b the value
// s(p) = r(p)/2 is used, so 0 <= s <= r/2 always. Throws RangeError when the
// index range is empty.
BlockMinorant block_minorant(const MultSpec& r, double b, double eps1, std::uint64_t x,
                             const PrimeTable& primes);

// s1(p) = s(p), t1(p) = r(p) - s(p), both supported on squarefree integers.
std::pair<MultSpec, MultSpec> squarefree_split(const MultSpec& r, const BlockMinorant& bm,
                                               const PrimeTable& primes);

} // namespace meanlab
