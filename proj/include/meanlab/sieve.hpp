// sieve.hpp
// Prime tables, smallest-prime-factor tables and factorization.
//
// Everything here is immutable once built and may be shared freely between
// threads. Bounds are limited to < 2^32 so that primes and spf entries fit
// in 32-bit words.

#pragma once
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace meanlab {

inline constexpr std::uint64_t kMaxSieveBound = (std::uint64_t{1} << 32) - 1;

struct PrimeTable {
    std::uint64_t bound = 0;
    std::vector<std::uint32_t> primes;

    std::size_t size() const { return primes.size(); }
    // Number of primes <= y (y may exceed bound only if bound covers it).
    std::size_t count_upto(std::uint64_t y) const;
    bool is_prime(std::uint64_t n) const;
};

// Sieve of Eratosthenes over odd numbers. bound < 2 gives an empty table.
PrimeTable build_primes(std::uint64_t bound);

struct PrimePower {
    std::uint64_t p;
    int nu;
    bool operator==(const PrimePower&) const = default;
};

struct Factorization {
    std::vector<PrimePower> factors; // primes strictly increasing

    bool empty() const { return factors.empty(); }
    std::uint64_t value() const;
    // P+(n), with P+(1) = 1.
    std::uint64_t largest_prime() const { return factors.empty() ? 1 : factors.back().p; }
};

struct SpfOptions {
    bool segmented = false;
    std::size_t segment_size = std::size_t{1} << 22;
    unsigned threads = 1;
    std::size_t memory_budget_bytes = std::size_t{3} << 30;
};

class SpfTable {
public:
    SpfTable() = default;

    std::uint64_t bound() const { return bound_; }
    std::size_t segment_size() const { return segment_size_; }
    // spf(n) for 2 <= n <= bound; spf(1) == 1.
    std::uint32_t spf(std::uint64_t n) const { return spf_[n]; }
    std::span<const std::uint32_t> raw() const { return spf_; }

    Factorization factorize(std::uint64_t n) const;

private:
    friend SpfTable build_spf(std::uint64_t bound, const SpfOptions& opt);
    std::uint64_t bound_ = 0;
    std::size_t segment_size_ = 0;
    std::vector<std::uint32_t> spf_;
};

// Throws ContractError for bound < 2 or bound > kMaxSieveBound, and
// ResourceError when 4*(bound+1) bytes exceed opt.memory_budget_bytes.
SpfTable build_spf(std::uint64_t bound, const SpfOptions& opt = {});

// Trial-division factorization for integers outside any table (sifting
// moduli D and the like).
Factorization factorize_trial(std::uint64_t n);

// Emits every exact prime power p^nu || n for n in [lo, hi), as
// emit(n - lo, p, nu). `base` must contain all primes <= sqrt(hi - 1).
// `rem` is scratch space, resized as needed.
template <class Emit>
void factor_block(std::uint64_t lo, std::uint64_t hi, const PrimeTable& base,
                  std::vector<std::uint32_t>& rem, Emit&& emit) {
    const std::size_t len = static_cast<std::size_t>(hi - lo);
    rem.resize(len);
    for (std::size_t i = 0; i < len; ++i) rem[i] = static_cast<std::uint32_t>(lo + i);
    for (std::uint32_t p : base.primes) {
        const std::uint64_t pp = p;
        if (pp * pp > hi - 1) break;
        std::uint64_t start = (lo + pp - 1) / pp * pp;
        for (std::uint64_t m = start; m < hi; m += pp) {
            std::size_t i = static_cast<std::size_t>(m - lo);
            std::uint32_t r = rem[i] / p;
            int nu = 1;
            while (r % p == 0) {
                r /= p;
                ++nu;
            }
            rem[i] = r;
            emit(i, pp, nu);
        }
    }
    for (std::size_t i = 0; i < len; ++i)
        if (rem[i] > 1) emit(i, std::uint64_t{rem[i]}, 1);
}

} // namespace meanlab
