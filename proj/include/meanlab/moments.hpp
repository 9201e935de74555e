// moments.hpp
// Weighted distribution of an additive function h over n <= x with weights
// r(n)/M(x; r), compared against the normal law, plus centered weighted
// moments and the exponential tail sum used to control them.
//
// All passes stream over [1, x] in fixed segments (see stream_values), so
// x = 10^8 never materializes a full value table.

#pragma once
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "meanlab/funcspec.hpp"
#include "meanlab/primesums.hpp"
#include "meanlab/sieve.hpp"

namespace meanlab {

// Normal distribution function, absolute error well below 1e-10.
double phi(double z);

// 0 for odd m, (m-1)!! for even m.
double gaussian_moment(int m);

struct MomentOptions {
    StreamOptions stream;
    // Accept h that is not strongly additive in moment_G.
    bool allow_non_strong = false;
};

// (1/M(x;r)) sum_{n <= x, h(n) <= z} r(n). Throws EvaluationError when
// M(x; r) <= 0.
double dist_F(double z, const AddSpec& h, const MultSpec& r, std::uint64_t x,
              const StreamOptions& opt = {});

struct DistReport {
    std::uint64_t x = 0;
    double E = 0, D = 0, mu = 0, theta = 0;
    std::vector<double> z_grid;
    std::vector<double> F_values;   // F_x(E + z D)
    std::vector<double> Phi_values;
    double sup_distance = 0;
    std::vector<std::string> warnings;
};

std::vector<double> default_z_grid(); // 201 points on [-4, 4]

// z_grid must be ascending.
DistReport ek_report(const AddSpec& h, const MultSpec& r, std::uint64_t x,
                     const PrimeTable& primes, std::span<const double> z_grid,
                     const MomentOptions& opt = {});

struct MomentReport {
    int m = 1;
    double G_m = 0;
    double nu_m = 0;
    double normalized = 0; // |G_m / D^m - nu_m|
    double budget = 0;     // theta (log 1/theta)^{m/2}; NaN unless theta < 1
    double E = 0, D = 0, theta = 0;
    std::vector<std::string> warnings;
};

// One streaming pass for several m. Every m must be >= 1.
std::vector<MomentReport> moments_G(std::span<const int> ms, const AddSpec& h, const MultSpec& r,
                                    std::uint64_t x, const PrimeTable& primes,
                                    const MomentOptions& opt = {});
MomentReport moment_G(int m, const AddSpec& h, const MultSpec& r, std::uint64_t x,
                      const PrimeTable& primes, const MomentOptions& opt = {});

// (1/M(x;r)) sum r(n) h(n)^k for k = 0..kmax.
std::vector<double> weighted_raw_moments(int kmax, const AddSpec& h, const MultSpec& r,
                                         std::uint64_t x, const StreamOptions& opt = {});

struct TailCheck {
    double value = 0;   // raw_sum / (e^{t^2} M(x; r))
    double raw_sum = 0; // sum r(n) e^{t |h(n) - E| / D}
    double mean = 0;    // M(x; r)
};

// Requires 0 <= t <= 1/mu_x (ContractError otherwise).
TailCheck tail_check(double t, const AddSpec& h, const MultSpec& r, std::uint64_t x,
                     const PrimeTable& primes, const StreamOptions& opt = {});

} // namespace meanlab
