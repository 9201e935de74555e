#include "meanlab/sieve.hpp"

#include <algorithm>
#include <string>

#include "meanlab/error.hpp"
#include "meanlab/numeric.hpp"

namespace meanlab {

std::size_t PrimeTable::count_upto(std::uint64_t y) const {
    if (y >= kMaxSieveBound) return primes.size();
    return static_cast<std::size_t>(
        std::upper_bound(primes.begin(), primes.end(), static_cast<std::uint32_t>(y)) -
        primes.begin());
}

bool PrimeTable::is_prime(std::uint64_t n) const {
    if (n > kMaxSieveBound) return false;
    return std::binary_search(primes.begin(), primes.end(), static_cast<std::uint32_t>(n));
}

PrimeTable build_primes(std::uint64_t bound) {
    if (bound > kMaxSieveBound)
        throw ContractError("build_primes: bound exceeds 2^32 - 1");
    PrimeTable t;
    t.bound = bound;
    if (bound < 2) return t;
    t.primes.push_back(2);
    if (bound < 3) return t;

    // composite[i] describes the odd number 2i + 3
    const std::uint64_t nodd = (bound - 1) / 2;
    std::vector<std::uint8_t> composite(nodd, 0);
    for (std::uint64_t i = 0; i < nodd; ++i) {
        if (composite[i]) continue;
        const std::uint64_t p = 2 * i + 3;
        if (p * p <= bound)
            for (std::uint64_t j = (p * p - 3) / 2; j < nodd; j += p) composite[j] = 1;
    }
    // pi(x) ~ x / (log x - 1.1)
    double lg = std::log(static_cast<double>(bound));
    t.primes.reserve(static_cast<std::size_t>(1.1 * bound / std::max(1.0, lg - 1.1)) + 8);
    for (std::uint64_t i = 0; i < nodd; ++i)
        if (!composite[i]) t.primes.push_back(static_cast<std::uint32_t>(2 * i + 3));
    return t;
}

std::uint64_t Factorization::value() const {
    std::uint64_t v = 1;
    for (const auto& f : factors)
        for (int k = 0; k < f.nu; ++k) v *= f.p;
    return v;
}

Factorization SpfTable::factorize(std::uint64_t n) const {
    if (n < 1 || n > bound_)
        throw ContractError("factorize: n = " + std::to_string(n) + " outside [1, " +
                            std::to_string(bound_) + "]");
    Factorization f;
    while (n > 1) {
        const std::uint64_t p = spf_[n];
        int nu = 0;
        while (n % p == 0) {
            n /= p;
            ++nu;
        }
        f.factors.push_back({p, nu});
    }
    return f;
}

namespace {

void linear_spf(std::vector<std::uint32_t>& spf, std::uint64_t bound) {
    std::vector<std::uint32_t> primes;
    for (std::uint64_t i = 2; i <= bound; ++i) {
        if (spf[i] == 0) {
            spf[i] = static_cast<std::uint32_t>(i);
            primes.push_back(static_cast<std::uint32_t>(i));
        }
        const std::uint32_t si = spf[i];
        for (std::uint32_t p : primes) {
            if (p > si || p * i > bound) break;
            spf[p * i] = p;
        }
    }
}

void segment_spf(std::vector<std::uint32_t>& spf, std::uint64_t lo, std::uint64_t hi,
                 const PrimeTable& base) {
    for (std::uint32_t p32 : base.primes) {
        const std::uint64_t p = p32;
        if (p * p >= hi) break;
        std::uint64_t start = std::max(p * p, (lo + p - 1) / p * p);
        for (std::uint64_t m = start; m < hi; m += p)
            if (spf[m] == 0) spf[m] = p32;
    }
    for (std::uint64_t m = std::max<std::uint64_t>(lo, 2); m < hi; ++m)
        if (spf[m] == 0) spf[m] = static_cast<std::uint32_t>(m);
}

} // namespace

SpfTable build_spf(std::uint64_t bound, const SpfOptions& opt) {
    if (bound < 2) throw ContractError("build_spf: bound must be >= 2");
    if (bound > kMaxSieveBound) throw ContractError("build_spf: bound exceeds 2^32 - 1");
    const std::uint64_t bytes = (bound + 1) * sizeof(std::uint32_t);
    if (bytes > opt.memory_budget_bytes)
        throw ResourceError("build_spf: table of " + std::to_string(bytes) +
                            " bytes exceeds memory budget of " +
                            std::to_string(opt.memory_budget_bytes));
    if (opt.segment_size == 0) throw ContractError("build_spf: segment_size must be > 0");

    SpfTable t;
    t.bound_ = bound;
    t.segment_size_ = opt.segment_size;
    t.spf_.assign(static_cast<std::size_t>(bound + 1), 0);
    t.spf_[1] = 1;

    if (!opt.segmented) {
        linear_spf(t.spf_, bound);
        return t;
    }

    const PrimeTable base = build_primes(isqrt(bound));
    const std::uint64_t seg = opt.segment_size;
    const std::size_t nseg = static_cast<std::size_t>((bound + 1 + seg - 1) / seg);
    parallel_blocks(nseg, opt.threads, [&](std::size_t s) {
        std::uint64_t lo = s * seg;
        std::uint64_t hi = std::min<std::uint64_t>(lo + seg, bound + 1);
        segment_spf(t.spf_, lo, hi, base);
    });
    return t;
}

Factorization factorize_trial(std::uint64_t n) {
    if (n < 1) throw ContractError("factorize_trial: n must be >= 1");
    Factorization f;
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p) continue;
        int nu = 0;
        while (n % p == 0) {
            n /= p;
            ++nu;
        }
        f.factors.push_back({p, nu});
    }
    if (n > 1) f.factors.push_back({n, 1});
    return f;
}

} // namespace meanlab
