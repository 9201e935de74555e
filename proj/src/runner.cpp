#include "meanlab/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "meanlab/error.hpp"
#include "meanlab/funcspec.hpp"
#include "meanlab/moments.hpp"
#include "meanlab/numeric.hpp"
#include "meanlab/sieve.hpp"
#include "meanlab/spec_parser.hpp"

namespace meanlab {

using nlohmann::json;

namespace {

const std::pair<Command, const char*> kCommands[] = {
    {Command::Primes, "primes"},   {Command::Eval, "eval"},
    {Command::MeanValue, "meanvalue"}, {Command::Check, "check"},
    {Command::Predict, "predict"}, {Command::Moments, "moments"},
    {Command::Sifted, "sifted"},   {Command::Decay, "decay"},
    {Command::ConvolveVerify, "convolve-verify"}};

std::string fd(double v) { return format_double(v); }

std::uint64_t parse_count(const std::string& tok) {
    double v = 0;
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e || !(v >= 1) || v != std::floor(v) || v > 4.3e9)
        throw UsageError("invalid x value '" + tok + "'");
    return static_cast<std::uint64_t>(v);
}

std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c); };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

// Output sink: a file when a path is given, otherwise the supplied stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw UsageError("cannot open output file '" + path + "'");
        }
        os_ = file_ ? file_.get() : &fallback;
    }
    std::ostream& os() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

Params params_at(const ExperimentConfig& cfg, std::uint64_t x) {
    Params p = cfg.params;
    if (std::isnan(p.eps))
        p.eps = std::max(1.0 / std::sqrt(std::log(static_cast<double>(x))), cfg.eps_floor);
    return p;
}

void check_budget(const ExperimentConfig& cfg, std::uint64_t x, std::size_t bytes_per_n) {
    const double need = static_cast<double>(x + 1) * static_cast<double>(bytes_per_n);
    if (need > static_cast<double>(cfg.memory_budget_bytes))
        throw ResourceError("x = " + std::to_string(x) + " needs about " +
                            std::to_string(static_cast<std::uint64_t>(need)) +
                            " bytes of tables, over the memory budget");
}

// Sieve plus lazily evaluated value tables at the largest x of the grid.
struct Workspace {
    const ExperimentConfig& cfg;
    std::uint64_t xmax;
    PrimeTable primes;
    SpfTable spf;

    Workspace(const ExperimentConfig& c, bool need_spf, std::size_t tables)
        : cfg(c), xmax(c.x_grid.back()) {
        primes = build_primes(std::max<std::uint64_t>(xmax, 2));
        if (need_spf) {
            check_budget(cfg, xmax, 4 + 32 * tables);
            SpfOptions opt;
            opt.segmented = true;
            opt.threads = cfg.parallelism;
            opt.memory_budget_bytes = cfg.memory_budget_bytes;
            spf = build_spf(std::max<std::uint64_t>(xmax, 2), opt);
        }
    }
    ValueTable table(const MultSpec& s) const { return eval_mult(s, xmax, spf); }
};

std::string comparison_csv(const Comparison& c) { return csv_row(c); }

Prediction predict_formula(FormulaId id, const ExperimentConfig& cfg, const MultSpec& f,
                           const MultSpec& r, const ValueTable* rtab, std::uint64_t x,
                           const PrimeTable& primes) {
    const Params p = params_at(cfg, x);
    switch (id) {
    case FormulaId::T1_6: return predict_1_6(f, p, x, primes, cfg.parallelism);
    case FormulaId::T1_10: return predict_1_10(f, p, x, primes, cfg.parallelism);
    case FormulaId::T1_13:
        return predict_1_13(f, r, rtab->prefix(x), p, x, primes, cfg.parallelism);
    case FormulaId::T2_3:
        return predict_2_3(f, r, cfg.tau, rtab->prefix(x), p, x, primes, cfg.parallelism);
    case FormulaId::T4_5: return predict_4_5(r, cfg.D, rtab->prefix(x), p, x, primes);
    case FormulaId::L2_4: break;
    }
    throw UsageError("formula L2_4 is not a point prediction");
}

void run_primes(const ExperimentConfig& cfg, std::ostream& os) {
    const PrimeTable primes = build_primes(cfg.x_grid.back());
    os << "x,pi_x,largest_prime\n";
    for (std::uint64_t x : cfg.x_grid) {
        const std::size_t n = primes.count_upto(x);
        os << x << ',' << n << ',' << (n ? primes.primes[n - 1] : 0) << '\n';
    }
}

void run_eval(const ExperimentConfig& cfg, std::ostream& os) {
    Workspace ws(cfg, true, 1);
    const AnySpec spec = parse_spec(cfg.f_expr);
    ValueTable t = std::holds_alternative<MultSpec>(spec)
                       ? eval_mult(std::get<MultSpec>(spec), ws.xmax, ws.spf)
                       : eval_add(std::get<AddSpec>(spec), ws.xmax, ws.spf);
    os << "n,value_re,value_im\n";
    for (std::uint64_t n = 1; n <= ws.xmax; ++n)
        os << n << ',' << fd(t.value(n).real()) << ',' << fd(t.value(n).imag()) << '\n';
}

void run_meanvalue(const ExperimentConfig& cfg, std::ostream& os) {
    Workspace ws(cfg, true, 1);
    const ValueTable t = ws.table(parse_mult(cfg.f_expr));
    os << "x,observed_re,observed_im\n";
    for (std::uint64_t x : cfg.x_grid) {
        const cplx m = summatory(t, x);
        os << x << ',' << fd(m.real()) << ',' << fd(m.imag()) << '\n';
    }
}

void run_check(const ExperimentConfig& cfg, std::ostream& os, std::ostream& err) {
    const std::uint64_t x = cfg.x_grid.back();
    const PrimeTable primes = build_primes(std::max<std::uint64_t>(x, 2));
    const MultSpec f = parse_mult(cfg.f_expr);
    const MultSpec r = parse_mult(cfg.r_expr);
    const AddSpec h = parse_add(cfg.h_expr);
    const Params p = params_at(cfg, x);
    os << kConditionHeader << '\n';
    CheckOptions opt;
    opt.regime = Regime::Comparison;
    opt.h = &h;
    for (auto id : {ConditionId::CLASS_M, ConditionId::C1_3, ConditionId::C1_4,
                    ConditionId::C1_5, ConditionId::C1_7, ConditionId::C1_8, ConditionId::C1_12,
                    ConditionId::C4_4, ConditionId::C3_1_iv}) {
        try {
            os << csv_row(check_condition(id, p, f, r, x, primes, opt)) << '\n';
        } catch (const RangeError& e) {
            err << "meanlab: " << to_string(id) << ": " << e.what() << '\n';
            ConditionReport rep;
            rep.id = id;
            rep.measured_constant = std::numeric_limits<double>::quiet_NaN();
            os << csv_row(rep) << '\n';
        }
    }
}

void run_predict(const ExperimentConfig& cfg, std::ostream& os, std::ostream& err, bool decay) {
    const FormulaId id = formula_from_string(cfg.formula);
    if (id == FormulaId::L2_4) {
        if (decay) throw UsageError("decay does not support L2_4");
        Workspace ws(cfg, true, 1);
        const MultSpec r = parse_mult(cfg.r_expr);
        const ValueTable rt = ws.table(r);
        const LemmaRatio lr = lemma_2_2_ratio(r, params_at(cfg, ws.xmax), ws.xmax, 64, rt, ws.primes);
        os << "z,ratio\n";
        for (const auto& [z, ratio] : lr.points) os << fd(z) << ',' << fd(ratio) << '\n';
        return;
    }
    const bool sifted = id == FormulaId::T4_5;
    const bool needs_r = id == FormulaId::T1_13 || id == FormulaId::T2_3 || sifted;
    Workspace ws(cfg, true, needs_r ? 2 : 1);
    const MultSpec r = parse_mult(cfg.r_expr);
    const MultSpec f = sifted ? restrict_coprime(r, cfg.D) : parse_mult(cfg.f_expr);
    const ValueTable ft = ws.table(f);
    std::optional<ValueTable> rt;
    if (needs_r) rt = ws.table(r);

    os << (decay ? kDecayHeader : kComparisonHeader) << '\n';
    for (std::uint64_t x : cfg.x_grid) {
        if (x < 2) throw ContractError("predictions need x >= 2");
        const Prediction pr =
            predict_formula(id, cfg, f, r, rt ? &*rt : nullptr, x, ws.primes);
        for (const auto& w : pr.warnings)
            err << "meanlab: " << to_string(id) << " x=" << x << ": " << w << '\n';
        const Comparison c = compare(ft.prefix(x), pr);
        if (!decay) {
            os << comparison_csv(c) << '\n';
            continue;
        }
        os << to_string(c.id) << ',' << x << ',' << fd(pr.params.eps) << ',' << fd(pr.delta) << ','
           << fd(c.observed.real()) << ',' << fd(c.observed.imag()) << ','
           << fd(c.predicted.real()) << ',' << fd(c.predicted.imag()) << ',' << fd(c.abs_err)
           << ',' << fd(c.rel_err) << ',' << fd(c.budget_ratio) << '\n';
    }
}

void run_moments(const ExperimentConfig& cfg, std::ostream& os, std::ostream& err) {
    const std::uint64_t x = cfg.x_grid.back();
    const PrimeTable primes = build_primes(std::max<std::uint64_t>(x, 2));
    const MultSpec r = parse_mult(cfg.r_expr);
    const AddSpec h = parse_add(cfg.h_expr);
    MomentOptions opt;
    opt.stream.threads = cfg.parallelism;
    const auto reps = moments_G(cfg.m_list, h, r, x, primes, opt);
    if (!reps.empty())
        for (const auto& w : reps.front().warnings) err << "meanlab: moments: " << w << '\n';
    os << kMomentHeader << '\n';
    for (const auto& m : reps) os << csv_row(m) << '\n';

    if (!cfg.dist_path.empty()) {
        Sink dist(cfg.dist_path, os);
        const auto grid = default_z_grid();
        const DistReport d = ek_report(h, r, x, primes, grid, opt);
        dist.os() << kDistHeader << '\n';
        for (std::size_t j = 0; j < grid.size(); ++j)
            dist.os() << fd(grid[j]) << ',' << fd(d.F_values[j]) << ',' << fd(d.Phi_values[j])
                      << ',' << fd(d.F_values[j] - d.Phi_values[j]) << '\n';
        dist.os() << "sup,,," << fd(d.sup_distance) << '\n';
    }
}

void run_convolve_verify(const ExperimentConfig& cfg, std::ostream& os) {
    Workspace ws(cfg, true, 5);
    const MultSpec f = parse_mult(cfg.f_expr);
    const MultSpec g = parse_mult(cfg.r_expr);
    const std::uint64_t x = ws.xmax;
    auto max_diff = [x](const ValueTable& a, const ValueTable& b) {
        double m = 0;
        for (std::uint64_t n = 1; n <= x; ++n) m = std::max(m, std::abs(a.value(n) - b.value(n)));
        return m;
    };
    const ValueTable ft = ws.table(f), gt = ws.table(g);
    const double conv = max_diff(ws.table(convolve_spec(f, g)), convolve_table(ft, gt, x));
    const double cof = max_diff(ws.table(convolve_spec(g, cofactor(f, g))), ft);
    os << "check,x,max_abs_diff\n";
    os << "conv," << x << ',' << fd(conv) << '\n';
    os << "cofactor," << x << ',' << fd(cof) << '\n';
}

} // namespace

std::string to_string(Command c) {
    for (const auto& [cmd, name] : kCommands)
        if (cmd == c) return name;
    return "?";
}

Command command_from_string(const std::string& s) {
    for (const auto& [cmd, name] : kCommands)
        if (s == name) return cmd;
    throw UsageError("unknown command '" + s + "'");
}

std::vector<std::uint64_t> parse_x_grid(const std::string& s_in) {
    const std::string s = trim(s_in);
    if (s.empty()) throw UsageError("empty x grid");
    std::vector<std::uint64_t> out;
    if (auto dots = s.find(".."); dots != std::string::npos) {
        const std::uint64_t a = parse_count(trim(s.substr(0, dots)));
        const std::uint64_t b = parse_count(trim(s.substr(dots + 2)));
        if (b < a) throw UsageError("x range end below start");
        for (std::uint64_t x = a; x <= b; x *= 10) {
            out.push_back(x);
            if (x > b / 10) break;
        }
        return out;
    }
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_count(trim(tok)));
    return out;
}

json params_to_json(const Params& p) {
    json j;
    j["a"] = p.a;
    j["b"] = p.b;
    j["A"] = p.A;
    j["B"] = p.B;
    j["rho"] = p.rho;
    j["eps"] = std::isnan(p.eps) ? json(nullptr) : json(p.eps);
    j["delta1"] = p.delta1 ? json(*p.delta1) : json(nullptr);
    j["tau"] = p.tau;
    j["h_exponent"] = p.h_exponent ? json(*p.h_exponent) : json(nullptr);
    j["threshold"] = p.threshold;
    j["printed_b_exponent"] = p.printed_b_exponent;
    return j;
}

void params_from_json(const json& j, Params& p) {
    auto num = [&](const char* k, double& dst) {
        if (j.contains(k) && !j[k].is_null()) dst = j[k].get<double>();
    };
    auto opt = [&](const char* k, std::optional<double>& dst) {
        if (j.contains(k) && !j[k].is_null()) dst = j[k].get<double>();
    };
    num("a", p.a);
    num("b", p.b);
    num("A", p.A);
    num("B", p.B);
    num("rho", p.rho);
    num("eps", p.eps);
    opt("delta1", p.delta1);
    num("tau", p.tau);
    opt("h_exponent", p.h_exponent);
    num("threshold", p.threshold);
    if (j.contains("printed_b_exponent")) p.printed_b_exponent = j["printed_b_exponent"].get<bool>();
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    try {
        if (j.contains("command")) c.command = command_from_string(j["command"].get<std::string>());
        if (j.contains("f")) c.f_expr = j["f"].get<std::string>();
        if (j.contains("r")) c.r_expr = j["r"].get<std::string>();
        if (j.contains("h")) c.h_expr = j["h"].get<std::string>();
        if (j.contains("x")) {
            const auto& x = j["x"];
            if (x.is_array()) {
                for (const auto& v : x) c.x_grid.push_back(v.get<std::uint64_t>());
            } else if (x.is_string()) {
                c.x_grid = parse_x_grid(x.get<std::string>());
            } else {
                c.x_grid = {x.get<std::uint64_t>()};
            }
        }
        if (j.contains("params")) params_from_json(j["params"], c.params);
        if (j.contains("eps_floor")) c.eps_floor = j["eps_floor"].get<double>();
        if (j.contains("D")) c.D = j["D"].get<std::uint64_t>();
        if (j.contains("tau")) c.tau = j["tau"].get<double>();
        if (j.contains("m")) c.m_list = j["m"].get<std::vector<int>>();
        if (j.contains("formula")) c.formula = j["formula"].get<std::string>();
        if (j.contains("out")) c.output_path = j["out"].get<std::string>();
        if (j.contains("dist")) c.dist_path = j["dist"].get<std::string>();
        if (j.contains("threads")) c.parallelism = j["threads"].get<unsigned>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    return c;
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.x_grid.empty()) throw UsageError("no x values given");
    for (std::size_t i = 1; i < cfg.x_grid.size(); ++i)
        if (cfg.x_grid[i] <= cfg.x_grid[i - 1]) throw UsageError("x grid must be ascending");
    if (cfg.x_grid.back() > kMaxSieveBound) throw UsageError("x exceeds 2^32 - 1");
    if (cfg.parallelism < 1) throw UsageError("threads must be >= 1");
    if (cfg.D < 1) throw UsageError("D must be >= 1");
    // expressions must parse, whatever the command uses
    parse_spec(cfg.f_expr);
    parse_spec(cfg.r_expr);
    parse_spec(cfg.h_expr);
}

std::string csv_row(const ConditionReport& r) {
    return to_string(r.id) + ',' + (r.holds ? "1" : "0") + ',' + fd(r.measured_constant) + ',' +
           std::to_string(r.worst_y);
}

std::string csv_row(const Comparison& c) {
    std::ostringstream os;
    os << to_string(c.id) << ',' << c.x << ',' << fd(c.observed.real()) << ','
       << fd(c.observed.imag()) << ',' << fd(c.predicted.real()) << ',' << fd(c.predicted.imag())
       << ',' << fd(c.abs_err) << ',' << fd(c.rel_err) << ',' << fd(c.budget_ratio);
    return os.str();
}

std::string csv_row(const MomentReport& m) {
    return std::to_string(m.m) + ',' + fd(m.G_m) + ',' + fd(m.nu_m) + ',' + fd(m.normalized) + ',' +
           fd(m.budget);
}

int run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        validate_config(cfg);
        if (!cfg.params_path.empty()) {
            Sink ps(cfg.params_path, err);
            json j = params_to_json(params_at(cfg, cfg.x_grid.back()));
            j["x"] = cfg.x_grid.back();
            j["eps1"] = std::sqrt(j["eps"].get<double>());
            j["eps2"] = j["eps"].get<double>() * std::sqrt(j["eps"].get<double>());
            j["eta_x"] = Params::eta(std::max<std::uint64_t>(cfg.x_grid.back(), 3));
            ps.os() << j.dump(2) << '\n';
        }
        Sink sink(cfg.output_path, out);
        std::ostream& os = sink.os();
        switch (cfg.command) {
        case Command::Primes: run_primes(cfg, os); break;
        case Command::Eval: run_eval(cfg, os); break;
        case Command::MeanValue: run_meanvalue(cfg, os); break;
        case Command::Check: run_check(cfg, os, err); break;
        case Command::Predict: run_predict(cfg, os, err, false); break;
        case Command::Decay: run_predict(cfg, os, err, true); break;
        case Command::Sifted: {
            ExperimentConfig c = cfg;
            c.formula = "T4_5";
            run_predict(c, os, err, false);
            break;
        }
        case Command::Moments: run_moments(cfg, os, err); break;
        case Command::ConvolveVerify: run_convolve_verify(cfg, os); break;
        }
        os.flush();
        return 0;
    } catch (const ParseError& e) {
        err << "meanlab: parse error: " << e.what() << '\n';
        return 1;
    } catch (const UsageError& e) {
        err << "meanlab: " << e.what() << '\n';
        return 1;
    } catch (const ResourceError& e) {
        err << "meanlab: resource: " << e.what() << '\n';
        return 3;
    } catch (const std::bad_alloc&) {
        err << "meanlab: resource: out of memory\n";
        return 3;
    } catch (const std::exception& e) {
        err << "meanlab: " << e.what() << '\n';
        return 2;
    }
}

} // namespace meanlab
