#include "meanlab/funcspec.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "meanlab/error.hpp"

namespace meanlab {

namespace detail {

struct MultNode {
    virtual ~MultNode() = default;
    virtual cplx value(std::uint64_t p, int nu) const = 0;
    virtual bool is_real() const = 0;
    virtual bool is_nonnegative() const = 0;
    virtual std::string canonical() const = 0;
};

struct AddNode {
    virtual ~AddNode() = default;
    virtual double value(std::uint64_t p, int nu) const = 0;
    virtual bool strongly_additive() const = 0;
    virtual std::string canonical() const = 0;
};

} // namespace detail

using detail::AddNode;
using detail::MultNode;

namespace {

struct RuleNode final : MultNode {
    std::string name;
    std::function<cplx(std::uint64_t, int)> rule;
    bool real, nonneg;
    RuleNode(std::string n, std::function<cplx(std::uint64_t, int)> r, bool re, bool nn)
        : name(std::move(n)), rule(std::move(r)), real(re), nonneg(nn) {}
    cplx value(std::uint64_t p, int nu) const override { return rule(p, nu); }
    bool is_real() const override { return real; }
    bool is_nonnegative() const override { return nonneg; }
    std::string canonical() const override { return name; }
};

struct ConvNode final : MultNode {
    MultSpec f, g;
    ConvNode(MultSpec a, MultSpec b) : f(std::move(a)), g(std::move(b)) {}
    cplx value(std::uint64_t p, int nu) const override {
        cplx acc = 0;
        for (int j = 0; j <= nu; ++j) acc += f(p, j) * g(p, nu - j);
        return acc;
    }
    bool is_real() const override { return f.is_real() && g.is_real(); }
    bool is_nonnegative() const override { return f.is_nonnegative() && g.is_nonnegative(); }
    std::string canonical() const override {
        return "conv(" + f.canonical() + "," + g.canonical() + ")";
    }
};

struct TwistNode final : MultNode {
    MultSpec f;
    double tau;
    TwistNode(MultSpec a, double t) : f(std::move(a)), tau(t) {}
    cplx value(std::uint64_t p, int nu) const override {
        const double phase = -static_cast<double>(nu) * tau * std::log(static_cast<double>(p));
        return f(p, nu) * cplx(std::cos(phase), std::sin(phase));
    }
    bool is_real() const override { return false; }
    bool is_nonnegative() const override { return false; }
    std::string canonical() const override {
        return "twist(" + f.canonical() + "," + format_double(tau) + ")";
    }
};

struct CoprimeNode final : MultNode {
    MultSpec f;
    std::uint64_t D;
    std::vector<std::uint64_t> primes; // primes dividing D
    CoprimeNode(MultSpec a, std::uint64_t d) : f(std::move(a)), D(d) {
        for (const auto& pp : factorize_trial(d).factors) primes.push_back(pp.p);
    }
    cplx value(std::uint64_t p, int nu) const override {
        if (std::binary_search(primes.begin(), primes.end(), p)) return 0.0;
        return f(p, nu);
    }
    bool is_real() const override { return f.is_real(); }
    bool is_nonnegative() const override { return f.is_nonnegative(); }
    std::string canonical() const override {
        return "coprime(" + f.canonical() + "," + std::to_string(D) + ")";
    }
};

struct CofactorNode final : MultNode {
    MultSpec r, s;
    CofactorNode(MultSpec a, MultSpec b) : r(std::move(a)), s(std::move(b)) {}
    cplx value(std::uint64_t p, int nu) const override {
        // t(p^k) = r(p^k) - sum_{1<=j<=k} s(p^j) t(p^{k-j}), t(1) = 1
        std::vector<cplx> t(static_cast<std::size_t>(nu) + 1);
        std::vector<cplx> sv(static_cast<std::size_t>(nu) + 1);
        t[0] = 1.0;
        for (int j = 1; j <= nu; ++j) sv[j] = s(p, j);
        for (int k = 1; k <= nu; ++k) {
            cplx acc = r(p, k);
            for (int j = 1; j <= k; ++j) acc -= sv[j] * t[k - j];
            t[k] = acc;
        }
        return t[nu];
    }
    bool is_real() const override { return r.is_real() && s.is_real(); }
    bool is_nonnegative() const override { return false; }
    std::string canonical() const override {
        return "cofactor(" + r.canonical() + "," + s.canonical() + ")";
    }
};

double lookup(const PrimeValues& pv, std::uint64_t p) {
    auto it = std::lower_bound(pv.begin(), pv.end(), p,
                               [](const auto& e, std::uint64_t q) { return e.first < q; });
    return (it != pv.end() && it->first == p) ? it->second : 0.0;
}

double exp_power(double sp, int nu) {
    // sp^nu / nu!
    double v = 1.0;
    for (int j = 1; j <= nu; ++j) v *= sp / j;
    return v;
}

struct PrimeValuesNode final : MultNode {
    PrimeValues pv;
    bool exponential; // otherwise squarefree-supported
    bool nonneg;
    PrimeValuesNode(PrimeValues v, bool e) : pv(std::move(v)), exponential(e) {
        std::sort(pv.begin(), pv.end());
        nonneg = std::all_of(pv.begin(), pv.end(), [](const auto& e) { return e.second >= 0; });
    }
    cplx value(std::uint64_t p, int nu) const override {
        const double sp = lookup(pv, p);
        if (exponential) return exp_power(sp, nu);
        return nu == 1 ? sp : 0.0;
    }
    bool is_real() const override { return true; }
    bool is_nonnegative() const override { return nonneg; }
    std::string canonical() const override {
        return std::string(exponential ? "expext" : "sqfsupport") + "<table:" +
               std::to_string(pv.size()) + ">";
    }
};

struct ExpExtNode final : MultNode {
    MultSpec f;
    explicit ExpExtNode(MultSpec a) : f(std::move(a)) {}
    cplx value(std::uint64_t p, int nu) const override {
        return exp_power(f(p, 1).real(), nu);
    }
    bool is_real() const override { return true; }
    bool is_nonnegative() const override { return f.is_nonnegative(); }
    std::string canonical() const override { return "expext(" + f.canonical() + ")"; }
};

struct AddRuleNode final : AddNode {
    std::string name;
    std::function<double(std::uint64_t, int)> rule;
    bool strong;
    AddRuleNode(std::string n, std::function<double(std::uint64_t, int)> r, bool s)
        : name(std::move(n)), rule(std::move(r)), strong(s) {}
    double value(std::uint64_t p, int nu) const override { return rule(p, nu); }
    bool strongly_additive() const override { return strong; }
    std::string canonical() const override { return name; }
};

std::string kv(const char* name, const char* key, double v) {
    return std::string(name) + ":" + key + "=" + format_double(v);
}

} // namespace

// ---------------------------------------------------------------------------

MultSpec::MultSpec(std::shared_ptr<const MultNode> node) : node_(std::move(node)) {}

cplx MultSpec::operator()(std::uint64_t p, int nu) const {
    if (nu == 0) return 1.0;
    return node_->value(p, nu);
}
bool MultSpec::is_real() const { return node_->is_real(); }
bool MultSpec::is_nonnegative() const { return node_->is_nonnegative(); }
std::string MultSpec::canonical() const { return node_->canonical(); }

AddSpec::AddSpec(std::shared_ptr<const AddNode> node) : node_(std::move(node)) {}
double AddSpec::operator()(std::uint64_t p, int nu) const {
    if (nu == 0) return 0.0;
    return node_->value(p, nu);
}
bool AddSpec::strongly_additive() const { return node_->strongly_additive(); }
std::string AddSpec::canonical() const { return node_->canonical(); }

MultSpec one() {
    return MultSpec(std::make_shared<RuleNode>(
        "one", [](std::uint64_t, int) { return cplx(1.0); }, true, true));
}

MultSpec squarefree() {
    return MultSpec(std::make_shared<RuleNode>(
        "squarefree", [](std::uint64_t, int nu) { return cplx(nu == 1 ? 1.0 : 0.0); }, true,
        true));
}

MultSpec divisor(double rho) {
    if (!std::isfinite(rho)) throw ContractError("divisor: rho must be finite");
    return MultSpec(std::make_shared<RuleNode>(
        kv("divisor", "rho", rho),
        [rho](std::uint64_t, int nu) {
            double c = 1.0;
            for (int j = 0; j < nu; ++j) c *= (rho + j) / (j + 1);
            return cplx(c);
        },
        true, rho >= 0));
}

MultSpec omega_exp(double z) {
    if (!std::isfinite(z)) throw ContractError("omega_exp: z must be finite");
    return MultSpec(std::make_shared<RuleNode>(
        kv("omega_exp", "z", z), [z](std::uint64_t, int) { return cplx(z); }, true, z >= 0));
}

MultSpec bigomega_exp(double z) {
    if (!(std::fabs(z) <= 1.9))
        throw ContractError("bigomega_exp: |z| must be <= 1.9 (local factor at 2 diverges at 2)");
    return MultSpec(std::make_shared<RuleNode>(
        kv("bigomega_exp", "z", z), [z](std::uint64_t, int nu) { return cplx(std::pow(z, nu)); },
        true, z >= 0));
}

MultSpec custom(std::string name, std::function<cplx(std::uint64_t, int)> rule, bool is_real,
                bool is_nonnegative) {
    return MultSpec(std::make_shared<RuleNode>(std::move(name), std::move(rule), is_real,
                                               is_real && is_nonnegative));
}

AddSpec omega() {
    return AddSpec(
        std::make_shared<AddRuleNode>("omega", [](std::uint64_t, int) { return 1.0; }, true));
}

AddSpec bigomega() {
    return AddSpec(std::make_shared<AddRuleNode>(
        "bigomega", [](std::uint64_t, int nu) { return static_cast<double>(nu); }, false));
}

AddSpec custom_additive(std::string name, std::function<double(std::uint64_t, int)> rule,
                        bool strongly_additive) {
    return AddSpec(
        std::make_shared<AddRuleNode>(std::move(name), std::move(rule), strongly_additive));
}

MultSpec convolve_spec(const MultSpec& f, const MultSpec& g) {
    return MultSpec(std::make_shared<ConvNode>(f, g));
}

MultSpec twist(const MultSpec& f, double tau) {
    if (tau == 0.0) return f;
    return MultSpec(std::make_shared<TwistNode>(f, tau));
}

MultSpec restrict_coprime(const MultSpec& f, std::uint64_t D) {
    if (D < 1) throw ContractError("restrict_coprime: D must be >= 1");
    if (D == 1) return f;
    return MultSpec(std::make_shared<CoprimeNode>(f, D));
}

MultSpec cofactor(const MultSpec& r, const MultSpec& s) {
    return MultSpec(std::make_shared<CofactorNode>(r, s));
}

MultSpec exp_extension(PrimeValues prime_values) {
    return MultSpec(std::make_shared<PrimeValuesNode>(std::move(prime_values), true));
}

MultSpec exp_extension(const MultSpec& f) { return MultSpec(std::make_shared<ExpExtNode>(f)); }

MultSpec squarefree_support(PrimeValues prime_values) {
    return MultSpec(std::make_shared<PrimeValuesNode>(std::move(prime_values), false));
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

ValueTable::ValueTable(std::uint64_t bound, std::vector<cplx> values)
    : bound_(bound), values_(std::move(values)) {
    prefix_.resize(values_.size());
    CompensatedComplexSum acc;
    prefix_[0] = 0.0;
    for (std::size_t n = 1; n < values_.size(); ++n) {
        acc += values_[n];
        prefix_[n] = acc.value();
    }
}

namespace {

// Rule values for p <= sqrt(x) at every exponent with p^nu <= x.
template <class Value, class Rule>
struct SmallPrimeCache {
    std::vector<std::uint32_t> offset; // indexed by p; start of p's run
    std::vector<Value> vals;           // vals[offset[p] + nu - 1]

    SmallPrimeCache(std::uint64_t x, std::uint64_t root, const Rule& rule) {
        offset.assign(static_cast<std::size_t>(root + 1), 0);
        const PrimeTable small = build_primes(root);
        for (std::uint32_t p : small.primes) {
            offset[p] = static_cast<std::uint32_t>(vals.size());
            const int numax = max_exponent(p, x);
            for (int nu = 1; nu <= numax; ++nu) vals.push_back(rule(p, nu));
        }
    }
    Value get(std::uint64_t p, int nu) const { return vals[offset[p] + nu - 1]; }
};

[[noreturn]] void non_finite(std::uint64_t p, int nu) {
    throw EvaluationError("rule returned a non-finite value at (p, nu) = (" +
                          std::to_string(p) + ", " + std::to_string(nu) + ")");
}

bool finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

} // namespace

ValueTable eval_mult(const MultSpec& spec, std::uint64_t x, const SpfTable& sieve) {
    if (x < 1) throw ContractError("eval_mult: x must be >= 1");
    if (x > sieve.bound() && x > 1) throw ContractError("eval_mult: x exceeds sieve bound");
    auto rule = [&](std::uint64_t p, int nu) {
        cplx v = spec(p, nu);
        if (!finite(v)) non_finite(p, nu);
        return v;
    };
    const std::uint64_t root = isqrt(x);
    SmallPrimeCache<cplx, decltype(rule)> cache(x, root, rule);

    std::vector<cplx> v(static_cast<std::size_t>(x + 1));
    v[0] = 0.0;
    v[1] = 1.0;
    for (std::uint64_t n = 2; n <= x; ++n) {
        const std::uint64_t p = sieve.spf(n);
        if (p > root) { // n is prime
            v[n] = rule(p, 1);
            continue;
        }
        std::uint64_t m = n / p;
        int nu = 1;
        while (m % p == 0) {
            m /= p;
            ++nu;
        }
        v[n] = cache.get(p, nu) * v[m];
    }
    return ValueTable(x, std::move(v));
}

ValueTable eval_add(const AddSpec& spec, std::uint64_t x, const SpfTable& sieve) {
    if (x < 1) throw ContractError("eval_add: x must be >= 1");
    if (x > sieve.bound() && x > 1) throw ContractError("eval_add: x exceeds sieve bound");
    auto rule = [&](std::uint64_t p, int nu) {
        double v = spec(p, nu);
        if (!std::isfinite(v)) non_finite(p, nu);
        return v;
    };
    const std::uint64_t root = isqrt(x);
    SmallPrimeCache<double, decltype(rule)> cache(x, root, rule);

    std::vector<cplx> v(static_cast<std::size_t>(x + 1));
    v[0] = 0.0;
    v[1] = 0.0;
    for (std::uint64_t n = 2; n <= x; ++n) {
        const std::uint64_t p = sieve.spf(n);
        if (p > root) {
            v[n] = rule(p, 1);
            continue;
        }
        std::uint64_t m = n / p;
        int nu = 1;
        while (m % p == 0) {
            m /= p;
            ++nu;
        }
        v[n] = cache.get(p, nu) + v[m].real();
    }
    return ValueTable(x, std::move(v));
}

cplx summatory(const ValueTable& table, std::uint64_t y) {
    if (y < 1 || y > table.bound())
        throw ContractError("summatory: y = " + std::to_string(y) + " outside [1, " +
                            std::to_string(table.bound()) + "]");
    return table.prefix(y);
}

ValueTable convolve_table(const ValueTable& a, const ValueTable& b, std::uint64_t x) {
    if (x < 1) throw ContractError("convolve_table: x must be >= 1");
    if (a.bound() < x || b.bound() < x)
        throw ContractError("convolve_table: bound mismatch (tables must cover [1, x])");
    std::vector<cplx> c(static_cast<std::size_t>(x + 1), 0.0);
    for (std::uint64_t d = 1; d <= x; ++d) {
        const cplx ad = a.value(d);
        if (ad == 0.0) continue;
        for (std::uint64_t k = 1, n = d; n <= x; ++k, n += d) c[n] += ad * b.value(k);
    }
    return ValueTable(x, std::move(c));
}

std::size_t stream_segment_count(std::uint64_t x, const StreamOptions& opt) {
    return static_cast<std::size_t>((x + opt.segment_size - 1) / opt.segment_size);
}

void stream_values(const MultSpec& r, const AddSpec& h, std::uint64_t x,
                   const StreamOptions& opt,
                   const std::function<void(std::size_t, std::uint64_t, std::span<const double>,
                                            std::span<const double>)>& visit) {
    if (x < 1) throw ContractError("stream_values: x must be >= 1");
    if (x > kMaxSieveBound) throw ContractError("stream_values: x exceeds 2^32 - 1");
    if (!r.is_real()) throw ContractError("stream_values: r must be real");
    if (opt.segment_size == 0) throw ContractError("stream_values: segment_size must be > 0");

    const std::uint64_t root = isqrt(x);
    auto rrule = [&](std::uint64_t p, int nu) {
        cplx v = r(p, nu);
        if (!finite(v)) non_finite(p, nu);
        return v.real();
    };
    auto hrule = [&](std::uint64_t p, int nu) {
        double v = h(p, nu);
        if (!std::isfinite(v)) non_finite(p, nu);
        return v;
    };
    const SmallPrimeCache<double, decltype(rrule)> rcache(x, root, rrule);
    const SmallPrimeCache<double, decltype(hrule)> hcache(x, root, hrule);
    const PrimeTable base = build_primes(root);

    const std::size_t nseg = stream_segment_count(x, opt);
    parallel_blocks(nseg, opt.threads, [&](std::size_t s) {
        const std::uint64_t lo = 1 + static_cast<std::uint64_t>(s) * opt.segment_size;
        const std::uint64_t hi = std::min<std::uint64_t>(lo + opt.segment_size, x + 1);
        const std::size_t len = static_cast<std::size_t>(hi - lo);
        std::vector<double> rv(len, 1.0), hv(len, 0.0);
        std::vector<std::uint32_t> rem;
        factor_block(lo, hi, base, rem, [&](std::size_t i, std::uint64_t p, int nu) {
            if (p <= root) {
                rv[i] *= rcache.get(p, nu);
                hv[i] += hcache.get(p, nu);
            } else {
                rv[i] *= rrule(p, 1);
                hv[i] += hrule(p, 1);
            }
        });
        visit(s, lo, rv, hv);
    });
}

// ---------------------------------------------------------------------------
// Block minorant
// ---------------------------------------------------------------------------

std::vector<int> BlockMinorant::violating_blocks() const {
    std::vector<int> out;
    for (const auto& blk : blocks)
        if (!blk.satisfies && blk.prime_count > 0) out.push_back(blk.k);
    return out;
}

double BlockMinorant::s_at(std::uint64_t p) const { return lookup(s, p); }

BlockMinorant block_minorant(const MultSpec& r, double b, double eps1, std::uint64_t x,
                             const PrimeTable& primes) {
    if (!(b > 0) || !(eps1 > 0) || !(eps1 < 1))
        throw ContractError("block_minorant: need b > 0 and 0 < eps1 < 1");
    if (!r.is_real() || !r.is_nonnegative())
        throw ContractError("block_minorant: r must be real and non-negative");
    if (x < 3 || primes.bound < x) throw ContractError("block_minorant: primes must cover x >= 3");

    BlockMinorant bm;
    bm.b = b;
    bm.eps1 = eps1;
    bm.eps2 = eps1 * eps1 * eps1;
    bm.x = x;

    const double lx = std::log(static_cast<double>(x));
    const double step = std::log1p(eps1);
    const double lo = std::log(bm.eps2 * lx) / step;
    const double hi = std::log(lx) / step - 1.0;
    bm.k_lo = std::max(0, static_cast<int>(std::ceil(lo)));
    bm.k_hi = static_cast<int>(std::floor(hi));
    if (bm.k_hi < bm.k_lo)
        throw RangeError("block_minorant: empty block index range for x = " + std::to_string(x) +
                         ", eps1 = " + format_double(eps1));

    for (int k = bm.k_lo; k <= bm.k_hi; ++k) {
        MinorantBlock blk{};
        blk.k = k;
        const double log_lo = std::pow(1.0 + eps1, k);
        const double log_hi = std::pow(1.0 + eps1, k + 1);
        blk.y_lo = std::exp(log_lo);
        blk.y_hi = std::exp(log_hi);
        // primes in ]y_lo, y_hi]
        const auto plo = static_cast<std::uint64_t>(std::floor(blk.y_lo));
        const auto phi = std::min<std::uint64_t>(static_cast<std::uint64_t>(std::floor(blk.y_hi)), x);
        const std::size_t i0 = primes.count_upto(plo);
        const std::size_t i1 = primes.count_upto(phi);
        CompensatedSum mass;
        for (std::size_t i = i0; i < i1; ++i) {
            const double p = primes.primes[i];
            mass += r(primes.primes[i], 1).real() * std::log(p) / p;
        }
        blk.mass = mass.value();
        blk.prime_count = i1 - i0;
        blk.b_k = blk.mass / (eps1 * log_lo);
        blk.satisfies = blk.b_k >= 4.0 * b;
        const double denom = std::max(blk.b_k, 4.0 * b);
        for (std::size_t i = i0; i < i1; ++i) {
            const double rp = r(primes.primes[i], 1).real();
            const double sp = 2.0 * b * rp / denom;
            if (sp != 0.0) bm.s.emplace_back(primes.primes[i], sp);
        }
        bm.blocks.push_back(blk);
    }
    return bm;
}

std::pair<MultSpec, MultSpec> squarefree_split(const MultSpec& r, const BlockMinorant& bm,
                                               const PrimeTable& primes) {
    PrimeValues t1;
    t1.reserve(primes.count_upto(bm.x));
    for (std::uint32_t p : primes.primes) {
        if (p > bm.x) break;
        t1.emplace_back(p, r(p, 1).real() - bm.s_at(p));
    }
    return {squarefree_support(bm.s), squarefree_support(std::move(t1))};
}

} // namespace meanlab
