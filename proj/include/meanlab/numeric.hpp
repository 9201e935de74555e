// numeric.hpp
// Small numerical helpers: compensated summation, shortest round-trip
// formatting, deterministic block-parallel loops.

#pragma once
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace meanlab {

using cplx = std::complex<double>;

// Neumaier variant of Kahan summation.
class CompensatedSum {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::fabs(sum_) >= std::fabs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double v) { add(v); return *this; }
    void merge(const CompensatedSum& o) { add(o.sum_); add(o.comp_); }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class CompensatedComplexSum {
public:
    void add(cplx v) { re_.add(v.real()); im_.add(v.imag()); }
    CompensatedComplexSum& operator+=(cplx v) { add(v); return *this; }
    void merge(const CompensatedComplexSum& o) { re_.merge(o.re_); im_.merge(o.im_); }
    cplx value() const { return {re_.value(), im_.value()}; }

private:
    CompensatedSum re_, im_;
};

// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Runs fn(block) for block in [0, nblocks) on up to `threads` workers.
// Callers write results into per-block slots and reduce them in block
// order afterwards, so output does not depend on the thread count.
inline void parallel_blocks(std::size_t nblocks, unsigned threads,
                            const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || nblocks <= 1) {
        for (std::size_t b = 0; b < nblocks; ++b) fn(b);
        return;
    }
    unsigned nt = static_cast<unsigned>(std::min<std::size_t>(threads, nblocks));
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t b = t; b < nblocks; b += nt) fn(b);
        });
    }
    for (auto& th : pool) th.join();
}

// Integer floor of y^(1/k) style helpers used when iterating p^nu <= x.
inline int max_exponent(std::uint64_t p, std::uint64_t x) {
    int nu = 0;
    std::uint64_t pw = 1;
    while (pw <= x / p) {
        pw *= p;
        ++nu;
    }
    return nu;
}

inline std::uint64_t isqrt(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

} // namespace meanlab
