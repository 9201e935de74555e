#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "meanlab/runner.hpp"

using namespace meanlab;

namespace {

struct Result {
    int rc;
    std::string out, err;
};

Result run_cfg(const ExperimentConfig& c) {
    std::ostringstream o, e;
    const int rc = run(c, o, e);
    return {rc, o.str(), e.str()};
}

ExperimentConfig make(Command cmd, std::vector<std::uint64_t> x) {
    ExperimentConfig c;
    c.command = cmd;
    c.x_grid = std::move(x);
    return c;
}

} // namespace

TEST_CASE("x grid parsing") {
    CHECK(parse_x_grid("10") == std::vector<std::uint64_t>{10});
    CHECK(parse_x_grid("10, 100,1000") == std::vector<std::uint64_t>{10, 100, 1000});
    CHECK(parse_x_grid("1e4..1e7") == std::vector<std::uint64_t>{10000, 100000, 1000000, 10000000});
    CHECK_THROWS(parse_x_grid("abc"));
    CHECK_THROWS(parse_x_grid("0"));
}

TEST_CASE("run: meanvalue and sifted examples") {
    ExperimentConfig c = make(Command::MeanValue, {10});
    const Result r = run_cfg(c);
    CHECK(r.rc == 0);
    CHECK(r.out == "x,observed_re,observed_im\n10,10,0\n");

    ExperimentConfig s = make(Command::Sifted, {30});
    s.D = 6;
    const Result rs = run_cfg(s);
    CHECK(rs.rc == 0);
    CHECK(rs.out.rfind(kComparisonHeader, 0) == 0);
    CHECK(rs.out.find("T4_5,30,10,0,10,0,0,0,") != std::string::npos);
}

TEST_CASE("run: exit codes") {
    ExperimentConfig bad = make(Command::MeanValue, {10});
    bad.f_expr = "nope";
    CHECK(run_cfg(bad).rc == 1);
    ExperimentConfig desc = make(Command::MeanValue, {100, 10});
    CHECK(run_cfg(desc).rc == 1);
    ExperimentConfig pre = make(Command::Sifted, {10});
    pre.D = 30030;
    CHECK(run_cfg(pre).rc == 2);
    ExperimentConfig mem = make(Command::MeanValue, {1000000});
    mem.memory_budget_bytes = 1 << 20;
    CHECK(run_cfg(mem).rc == 3);
}

TEST_CASE("run: decay rows and monotone rel_err") {
    ExperimentConfig c = make(Command::Decay, {10000, 100000, 1000000});
    c.f_expr = "squarefree";
    const Result r = run_cfg(c);
    REQUIRE(r.rc == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == kDecayHeader);
    double prev = 1e9;
    int rows = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) f.push_back(tok);
        REQUIRE(f.size() == 11);
        const double x = std::stod(f[1]);
        CHECK(std::stod(f[2]) == doctest::Approx(std::max(1 / std::sqrt(std::log(x)), 0.02)));
        const double rel = std::stod(f[9]);
        CHECK(rel < prev);
        prev = rel;
        ++rows;
    }
    CHECK(rows == 3);
}

TEST_CASE("run: byte-identical output across parallelism") {
    for (Command cmd : {Command::Predict, Command::Moments, Command::Check, Command::Decay}) {
        ExperimentConfig c = make(cmd, {100000, 300000});
        c.f_expr = "divisor:rho=0.5";
        c.r_expr = "one";
        c.formula = "T1_6";
        c.params.rho = 0.5;
        std::string first;
        for (unsigned th : {1u, 4u, 8u}) {
            c.parallelism = th;
            const Result r = run_cfg(c);
            REQUIRE(r.rc == 0);
            if (th == 1) first = r.out;
            else CHECK(r.out == first);
        }
    }
}

TEST_CASE("config json: fields, flags precedence is caller side, params round trip") {
    const auto j = nlohmann::json::parse(R"({"command":"predict","f":"squarefree","x":[100,1000],
        "formula":"T1_13","params":{"b":0.15,"eps":0.3},"threads":2})");
    const ExperimentConfig c = config_from_json(j);
    CHECK(c.command == Command::Predict);
    CHECK(c.f_expr == "squarefree");
    CHECK(c.x_grid == std::vector<std::uint64_t>{100, 1000});
    CHECK(c.params.b == 0.15);
    CHECK(c.parallelism == 2);
    Params p;
    params_from_json(params_to_json(c.params), p);
    CHECK(p.b == c.params.b);
    CHECK(p.eps == c.params.eps);
    CHECK_THROWS(config_from_json(nlohmann::json::parse(R"({"command":"fly"})")));
}

TEST_CASE("seed params are written") {
    ExperimentConfig c = make(Command::Primes, {1000});
    c.params_path = "seed_params_test.json";
    std::ostringstream o, e;
    REQUIRE(run(c, o, e) == 0);
    CHECK(o.str() == "x,pi_x,largest_prime\n1000,168,997\n");
    std::ifstream in(c.params_path);
    const auto j = nlohmann::json::parse(in);
    CHECK(j["b"] == 0.2);
    CHECK(j["eps"].get<double>() == doctest::Approx(1 / std::sqrt(std::log(1000.0))));
    std::remove(c.params_path.c_str());
}
