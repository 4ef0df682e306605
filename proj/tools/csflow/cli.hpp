#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace csflow::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;      ///< bad flags, config schema violation, malformed input
inline constexpr int kNumerical = 3;  ///< solver failure
inline constexpr int kIo = 4;         ///< file system failure

/// Runs one csflow invocation. args excludes the program name.
///
/// --config names a JSON file {"schema_version": 1, "seed": ..., "out_dir": ...,
/// "<subcommand>": {"flag_name": value, ...}}; each entry stands for the flag
/// --flag-name (underscores become dashes) unless that flag is also given on
/// the command line. Unknown keys are rejected. Artifacts are produced in
/// memory and only written, each through a temporary file and a rename, once
/// the whole run has succeeded; manifest.json lists them with SHA-256 hashes.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_hex(std::string_view bytes);

}  // namespace csflow::cli
