// meanlab: command line front end for the experiment runner.
//
//   meanlab <command> [--config cfg.json] [--f expr] [--r expr] [--h expr]
//           [--x 1e4..1e7] [--tau t] [--D n] [--m 1,2,3,4] [--out path]
//           [--threads n] [--formula T1_13] [--dist path] [--eps e]
//           [--seed-params path]
//
// Flags override values from the JSON config.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "meanlab/error.hpp"
#include "meanlab/runner.hpp"

using namespace meanlab;

namespace {

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0) throw UsageError("invalid integer list '" + s + "'");
        out.push_back(v);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"meanlab: mean values of multiplicative functions"};
    app.set_help_flag("--help", "print help");

    std::string command, config_path, f, r, h, x, m, out, formula, dist, seed;
    double tau = 0, eps = 0, eps_floor = 0;
    std::uint64_t D = 1;
    unsigned threads = 1;
    double mem_gib = 0;

    app.add_option("command", command, "primes|eval|meanvalue|check|predict|moments|sifted|decay|convolve-verify");
    app.add_option("--config", config_path, "JSON config file");
    auto* of = app.add_option("--f", f, "function spec f");
    auto* orr = app.add_option("--r", r, "comparison function r");
    auto* oh = app.add_option("--h", h, "additive function h");
    auto* ox = app.add_option("--x", x, "x value, comma list, or a..b decades");
    auto* otau = app.add_option("--tau", tau, "twist parameter");
    auto* oD = app.add_option("--D", D, "sifting modulus");
    auto* om = app.add_option("--m", m, "moment orders, comma list");
    auto* oout = app.add_option("--out", out, "output CSV (default stdout)");
    auto* oth = app.add_option("--threads", threads, "worker threads");
    auto* ofo = app.add_option("--formula", formula, "T1_6|T1_10|T1_13|T2_3|T4_5|L2_4");
    auto* odist = app.add_option("--dist", dist, "moments: distribution CSV path");
    auto* oeps = app.add_option("--eps", eps, "fixed eps (default max(1/sqrt(log x), floor))");
    auto* oflo = app.add_option("--eps-floor", eps_floor, "eps floor");
    auto* omem = app.add_option("--mem-gib", mem_gib, "table memory budget in GiB");
    app.add_option("--seed-params", seed, "write resolved params JSON to path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    ExperimentConfig cfg;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw UsageError("cannot read config '" + config_path + "'");
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw UsageError(std::string("config: ") + e.what());
            }
            cfg = config_from_json(j);
        }
        if (!command.empty()) cfg.command = command_from_string(command);
        else if (config_path.empty()) throw UsageError("no command given");
        if (*of) cfg.f_expr = f;
        if (*orr) cfg.r_expr = r;
        if (*oh) cfg.h_expr = h;
        if (*ox) cfg.x_grid = parse_x_grid(x);
        if (*otau) cfg.tau = tau;
        if (*oD) cfg.D = D;
        if (*om) cfg.m_list = parse_int_list(m);
        if (*oout) cfg.output_path = out;
        if (*oth) cfg.parallelism = threads;
        if (*ofo) cfg.formula = formula;
        if (*odist) cfg.dist_path = dist;
        if (*oeps) cfg.params.eps = eps;
        if (*oflo) cfg.eps_floor = eps_floor;
        if (*omem) cfg.memory_budget_bytes = static_cast<std::size_t>(mem_gib * (1ull << 30));
        cfg.params.tau = cfg.tau;
        cfg.params_path = seed;
    } catch (const std::exception& e) {
        std::cerr << "meanlab: " << e.what() << '\n';
        return 1;
    }
    return run(cfg, std::cout, std::cerr);
}
