#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "relayim/harness.hpp"

namespace relayim::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes: 0 success, 2 usage error, 3 runtime/config error, 4 I/O error.
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitIo = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct HelpRequested : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fully resolved run description; echoed into the CSV so every output file is
// self-describing and re-runnable.
struct RunManifest {
    SweepSpec spec;
    int workers = 1;
    std::string pt_db_spec = "0:40:5";  // START:STOP:STEP, as given
    std::string out_path = "-";
    std::string version = kToolVersion;
    std::string timestamp;  // informational only, not part of the data section
};

// Parses flags (and an optional `key = value` config file; flags win).
// Throws UsageError on unknown flags, malformed grids or conflicting
// structure/protocol/scheme combinations, HelpRequested for --help.
RunManifest parse_args(const std::vector<std::string>& args);

// Parses an inclusive START:STOP:STEP grid specification.
std::vector<double> parse_pt_grid(const std::string& spec);

// Writes the manifest as `# key = value` comments followed by the CSV data
// section (header row plus one row per grid point, 6-significant-digit
// proportions, '\n' line endings).
void emit_csv(const SweepResult& result, const RunManifest& manifest, std::ostream& sink);

// Complete tool entry point used by the binary; maps errors to exit codes.
int run_main(const std::vector<std::string>& args);

}  // namespace relayim::cli
