#pragma once

#include "nlch/config.hpp"

#include <cstdint>
#include <iosfwd>

namespace nlch {

Grid make_grid(const RunConfig& cfg);
KernelOp make_kernel(const RunConfig& cfg, const Grid& g);
ReactionSpec make_reaction(const RunConfig& cfg, const Grid& g);

/// Initial datum from the initial block; random data draw from mt19937_64(seed).
Field make_initial(const RunConfig& cfg, const Grid& g, std::uint64_t seed);

/// Uniform random field in [lo, hi], reproducible from the seed.
Field random_field(const Grid& g, std::uint64_t seed, double lo, double hi);

/// Product cosine profile value + amplitude cos(mode π x / L) (times the same
/// factor along y in 2D).
Field cosine_field(const Grid& g, double value, double amplitude, int mode);

/// Exit codes of execute().
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAbort = 3;

/// Runs cfg.command, writing series/dumps/report.txt under cfg.out_dir.
/// Progress and failures are written to log. Returns one of the exit codes.
int execute(const RunConfig& cfg, std::ostream& log);

}  // namespace nlch
