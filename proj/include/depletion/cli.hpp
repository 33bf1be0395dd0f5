#pragma once

// Command-line front end: calibrate, run and sensitivity subcommands.
//
// Exit codes: 0 success, 1 validation or usage, 2 runtime (non-convergence),
// 3 I/O.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace depletion::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitIo = 3;

inline constexpr std::string_view kToolVersion = "1.0.0";

struct RunManifest {
    std::string command;
    std::string config_digest;  // SHA-256 of the config file bytes, hex
    std::uint64_t seed = 0;
    std::string tool_version{kToolVersion};
    double elapsed_seconds = 0.0;

    std::string to_json() const;
};

std::string sha256_hex(std::string_view bytes);

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace depletion::cli
