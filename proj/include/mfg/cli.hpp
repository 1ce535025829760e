#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "mfg/config.hpp"

namespace mfg {

// Exit statuses.
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;  // IO and internal errors
constexpr int kExitConfig = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitValidation = 4;

const char* code_version();

/// Runs one command and writes its artifacts plus manifest.json into
/// `out_dir`. Returns the exit status; errors are reported on `log`.
int run_command(const std::string& command, const RunConfig& config, const std::string& out_dir,
                bool verbose, std::ostream& log);

/// Full command line: <command> --config <path> [--out <dir>] [--threads <n>]
/// [--verbose]. The output directory is --out, else $MFG_OUT_DIR, else the
/// config's output.dir.
int cli_main(int argc, char** argv);

}  // namespace mfg
