#include "meanlab/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "meanlab/error.hpp"
#include "meanlab/numeric.hpp"

namespace meanlab {

double phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double gaussian_moment(int m) {
    if (m < 0) throw ContractError("gaussian_moment: m must be >= 0");
    if (m % 2) return 0.0;
    double v = 1.0;
    for (int k = m - 1; k > 1; k -= 2) v *= k;
    return v;
}

namespace {

void check_measure(double M) {
    if (!(M > 0)) throw EvaluationError("degenerate measure: M(x; r) = " + format_double(M));
}

// Runs a streaming pass with one Acc per segment and merges them in order.
template <class Acc, class Fn>
Acc reduce_stream(const MultSpec& r, const AddSpec& h, std::uint64_t x, const StreamOptions& opt,
                  const Acc& init, Fn&& per_segment) {
    std::vector<Acc> parts(stream_segment_count(x, opt), init);
    stream_values(r, h, x, opt,
                  [&](std::size_t s, std::uint64_t lo, std::span<const double> rv,
                      std::span<const double> hv) { per_segment(parts[s], lo, rv, hv); });
    Acc total = init;
    for (const auto& p : parts) total.merge(p);
    return total;
}

struct SumsAcc {
    std::vector<CompensatedSum> s;
    void merge(const SumsAcc& o) {
        for (std::size_t i = 0; i < s.size(); ++i) s[i].merge(o.s[i]);
    }
};

double budget_for(double theta, int m) {
    if (!(theta < 1)) return std::numeric_limits<double>::quiet_NaN();
    return theta * std::pow(std::log(1.0 / theta), m / 2.0);
}

} // namespace

double dist_F(double z, const AddSpec& h, const MultSpec& r, std::uint64_t x,
              const StreamOptions& opt) {
    SumsAcc init{std::vector<CompensatedSum>(2)};
    auto acc = reduce_stream(r, h, x, opt, init,
                             [z](SumsAcc& a, std::uint64_t, std::span<const double> rv,
                                 std::span<const double> hv) {
                                 for (std::size_t i = 0; i < rv.size(); ++i) {
                                     a.s[0] += rv[i];
                                     if (hv[i] <= z) a.s[1] += rv[i];
                                 }
                             });
    const double M = acc.s[0].value();
    check_measure(M);
    return acc.s[1].value() / M;
}

std::vector<double> default_z_grid() {
    std::vector<double> g(201);
    for (int i = 0; i <= 200; ++i) g[i] = -4.0 + 8.0 * i / 200.0;
    return g;
}

DistReport ek_report(const AddSpec& h, const MultSpec& r, std::uint64_t x,
                     const PrimeTable& primes, std::span<const double> z_grid,
                     const MomentOptions& opt) {
    if (z_grid.empty()) throw ContractError("ek_report: empty z-grid");
    if (!std::is_sorted(z_grid.begin(), z_grid.end()))
        throw ContractError("ek_report: z-grid must be ascending");
    const AdditiveStats st = additive_stats(x, h, r, primes);
    DistReport rep;
    rep.x = x;
    rep.E = st.E;
    rep.D = st.D;
    rep.mu = st.mu;
    rep.theta = st.theta;
    rep.warnings = gaussian_hypotheses(h, r, x, primes).warnings;
    rep.z_grid.assign(z_grid.begin(), z_grid.end());

    const std::size_t G = z_grid.size();
    std::vector<double> thresholds(G);
    for (std::size_t j = 0; j < G; ++j) thresholds[j] = st.E + z_grid[j] * st.D;

    // bin j collects r(n) with t_{j-1} < h(n) <= t_j; bin G is above all.
    SumsAcc init{std::vector<CompensatedSum>(G + 2)};
    auto acc = reduce_stream(r, h, x, opt.stream, init,
                             [&](SumsAcc& a, std::uint64_t, std::span<const double> rv,
                                 std::span<const double> hv) {
                                 double last_h = std::numeric_limits<double>::quiet_NaN();
                                 std::size_t idx = 0;
                                 for (std::size_t i = 0; i < rv.size(); ++i) {
                                     if (hv[i] != last_h) {
                                         last_h = hv[i];
                                         idx = static_cast<std::size_t>(
                                             std::lower_bound(thresholds.begin(),
                                                              thresholds.end(), hv[i]) -
                                             thresholds.begin());
                                     }
                                     a.s[idx] += rv[i];
                                     a.s[G + 1] += rv[i];
                                 }
                             });
    const double M = acc.s[G + 1].value();
    check_measure(M);
    CompensatedSum running;
    rep.F_values.resize(G);
    rep.Phi_values.resize(G);
    for (std::size_t j = 0; j < G; ++j) {
        running.merge(acc.s[j]);
        rep.F_values[j] = std::clamp(running.value() / M, 0.0, 1.0);
        rep.Phi_values[j] = phi(z_grid[j]);
        rep.sup_distance = std::max(rep.sup_distance, std::fabs(rep.F_values[j] - rep.Phi_values[j]));
    }
    return rep;
}

std::vector<MomentReport> moments_G(std::span<const int> ms, const AddSpec& h, const MultSpec& r,
                                    std::uint64_t x, const PrimeTable& primes,
                                    const MomentOptions& opt) {
    if (ms.empty()) return {};
    for (int m : ms)
        if (m < 1) throw ContractError("moment_G: m must be >= 1");
    if (!h.strongly_additive() && !opt.allow_non_strong)
        throw ContractError("moment_G: h must be strongly additive (override with allow_non_strong)");
    const AdditiveStats st = additive_stats(x, h, r, primes);
    const auto warnings = gaussian_hypotheses(h, r, x, primes).warnings;
    const int mmax = *std::max_element(ms.begin(), ms.end());

    // s[0] = M, s[k] = sum r (h - E)^k
    SumsAcc init{std::vector<CompensatedSum>(static_cast<std::size_t>(mmax) + 1)};
    const double E = st.E;
    auto acc = reduce_stream(r, h, x, opt.stream, init,
                             [&](SumsAcc& a, std::uint64_t, std::span<const double> rv,
                                 std::span<const double> hv) {
                                 for (std::size_t i = 0; i < rv.size(); ++i) {
                                     const double c = hv[i] - E;
                                     double w = rv[i];
                                     a.s[0] += w;
                                     for (int k = 1; k <= mmax; ++k) {
                                         w *= c;
                                         a.s[k] += w;
                                     }
                                 }
                             });
    const double M = acc.s[0].value();
    check_measure(M);
    std::vector<MomentReport> out;
    for (int m : ms) {
        MomentReport rep;
        rep.m = m;
        rep.G_m = acc.s[m].value() / M;
        rep.nu_m = gaussian_moment(m);
        rep.normalized = std::fabs(rep.G_m / std::pow(st.D, m) - rep.nu_m);
        rep.budget = budget_for(st.theta, m);
        rep.E = st.E;
        rep.D = st.D;
        rep.theta = st.theta;
        rep.warnings = warnings;
        out.push_back(std::move(rep));
    }
    return out;
}

MomentReport moment_G(int m, const AddSpec& h, const MultSpec& r, std::uint64_t x,
                      const PrimeTable& primes, const MomentOptions& opt) {
    const int ms[1] = {m};
    return moments_G(ms, h, r, x, primes, opt).front();
}

std::vector<double> weighted_raw_moments(int kmax, const AddSpec& h, const MultSpec& r,
                                         std::uint64_t x, const StreamOptions& opt) {
    if (kmax < 0) throw ContractError("weighted_raw_moments: kmax must be >= 0");
    SumsAcc init{std::vector<CompensatedSum>(static_cast<std::size_t>(kmax) + 1)};
    auto acc = reduce_stream(r, h, x, opt, init,
                             [&](SumsAcc& a, std::uint64_t, std::span<const double> rv,
                                 std::span<const double> hv) {
                                 for (std::size_t i = 0; i < rv.size(); ++i) {
                                     double w = rv[i];
                                     a.s[0] += w;
                                     for (int k = 1; k <= kmax; ++k) {
                                         w *= hv[i];
                                         a.s[k] += w;
                                     }
                                 }
                             });
    const double M = acc.s[0].value();
    check_measure(M);
    std::vector<double> out(static_cast<std::size_t>(kmax) + 1);
    for (int k = 0; k <= kmax; ++k) out[k] = acc.s[k].value() / M;
    return out;
}

TailCheck tail_check(double t, const AddSpec& h, const MultSpec& r, std::uint64_t x,
                     const PrimeTable& primes, const StreamOptions& opt) {
    const AdditiveStats st = additive_stats(x, h, r, primes);
    if (!(t >= 0) || t > 1.0 / st.mu)
        throw ContractError("tail_check: t = " + format_double(t) + " outside [0, 1/mu_x = " +
                            format_double(1.0 / st.mu) + "]");
    SumsAcc init{std::vector<CompensatedSum>(2)};
    auto acc = reduce_stream(r, h, x, opt, init,
                             [&](SumsAcc& a, std::uint64_t, std::span<const double> rv,
                                 std::span<const double> hv) {
                                 for (std::size_t i = 0; i < rv.size(); ++i) {
                                     a.s[0] += rv[i];
                                     a.s[1] += rv[i] * std::exp(t * std::fabs(hv[i] - st.E) / st.D);
                                 }
                             });
    TailCheck tc;
    tc.mean = acc.s[0].value();
    check_measure(tc.mean);
    tc.raw_sum = acc.s[1].value();
    tc.value = tc.raw_sum / (std::exp(t * t) * tc.mean);
    return tc;
}

} // namespace meanlab
