#pragma once

// Batch front end: `subrank <train|infer|eval|synth|bench> [--key value ...]`.
// Every option may also come from a flat `key=value` config file given with
// --config; command-line flags win over the file, the file over defaults.

#include <iosfwd>
#include <string>
#include <vector>

namespace subrank::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,
  kDataError = 3,
  kInternalError = 4,
};

/// Runs the CLI in-process. argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace subrank::cli
