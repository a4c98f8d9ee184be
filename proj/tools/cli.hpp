#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reidfuse/synth.hpp"

namespace reidfuse::cli {

enum class Command { Synth, Fuse, Fit, Eval, Rank, Bench };

std::string to_string(Command c);

/// Everything one invocation needs. Feature sets are given as path prefixes:
/// `<prefix>.urfb` (binary container) plus `<prefix>.csv` (metadata).
struct RunConfig {
    Command command = Command::Eval;

    std::string train;
    std::string query;
    std::string gallery;
    std::string urf;
    std::string weights_path;
    std::string out;
    std::string dump;       ///< fit: optional triplet CSV
    std::string rank_list;  ///< eval: optional rank list CSV

    std::size_t k = 4;
    std::size_t n = 400;
    std::size_t repeats = 5;
    std::uint64_t seed = 0;
    std::size_t max_rank = 50;
    std::size_t threads = 0;  ///< 0 = default_thread_count()
    std::optional<std::size_t> run;  ///< fit: use this repeat instead of the mean

    bool baseline = false;
    bool uffm_only = false;

    SynthConfig synth;

    /// Throws UsageError for out-of-range values or incoherent flags.
    void validate() const;
};

/// Ordered key/value echo of the configuration embedded in every artifact.
/// The worker count is left out: outputs do not depend on it.
std::vector<std::pair<std::string, std::string>> echo(const RunConfig& config);

/// Parses argv. Throws UsageError on bad input; returns nullopt when help
/// was printed to `out`.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out);

/// Executes one command. Throws reidfuse::Error on failure.
void run(const RunConfig& config, std::ostream& out);

/// parse_args + run with error reporting. Returns the process exit code:
/// 0 success, 1 usage error, 2 data/schema error, 3 internal error. Failures
/// print one `reidfuse: error code=<n> kind=<kind> msg=<text>` line to err.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace reidfuse::cli
