// runner.hpp
// Configuration-driven experiment runner behind the `meanlab` CLI.
//
// Every command writes one CSV with a fixed header to the configured output
// (stdout when empty). Floating-point fields use the shortest round-trip
// decimal form, so reruns are byte-identical, also across thread counts.

#pragma once
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "meanlab/primesums.hpp"
#include "meanlab/moments.hpp"
#include "meanlab/predict.hpp"

namespace meanlab {

enum class Command { Primes, Eval, MeanValue, Check, Predict, Moments, Sifted, Decay, ConvolveVerify };
std::string to_string(Command c);
Command command_from_string(const std::string& s);

struct ExperimentConfig {
    Command command = Command::MeanValue;
    std::string f_expr = "one";
    std::string r_expr = "one";
    std::string h_expr = "omega";
    std::vector<std::uint64_t> x_grid;
    Params params;
    double eps_floor = 0.02;
    std::uint64_t D = 1;
    double tau = 0.0;
    std::vector<int> m_list = {1, 2, 3, 4};
    std::string formula = "T1_13";
    std::string output_path;   // empty: stdout
    std::string dist_path;     // moments: optional DistReport CSV
    std::string params_path;   // --seed-params target
    unsigned parallelism = 1;
    std::size_t memory_budget_bytes = std::size_t{3} << 30;
};

// "10,100,1000", "1e4..1e7" (decades) or a single integer.
std::vector<std::uint64_t> parse_x_grid(const std::string& s);

// Fields absent from the document keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const Params& p);
void params_from_json(const nlohmann::json& j, Params& p);

// Throws UsageError / ParseError on invalid configs.
void validate_config(const ExperimentConfig& cfg);

// Executes the experiment; returns the process exit code
// (0 ok, 1 usage/parse, 2 precondition, 3 resource). Diagnostics go to err.
int run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

// Header strings, also used by tests.
inline constexpr const char* kComparisonHeader =
    "formula_id,x,observed_re,observed_im,predicted_re,predicted_im,abs_err,rel_err,budget_ratio";
inline constexpr const char* kDecayHeader =
    "formula_id,x,eps,delta,observed_re,observed_im,predicted_re,predicted_im,abs_err,rel_err,"
    "budget_ratio";
inline constexpr const char* kConditionHeader = "condition_id,holds,measured_constant,worst_y";
inline constexpr const char* kMomentHeader = "m,G_m,nu_m,normalized,budget";
inline constexpr const char* kDistHeader = "z,F,Phi,diff";

std::string csv_row(const ConditionReport& r);
std::string csv_row(const Comparison& c);
std::string csv_row(const MomentReport& m);

} // namespace meanlab
