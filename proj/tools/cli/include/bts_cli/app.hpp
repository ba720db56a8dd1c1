#pragma once

#include <iosfwd>
#include <string>

#include "bts_cli/config.hpp"

namespace bts::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitCapacity = 3,
  kExitInvariant = 4,
};

struct ParseOutcome {
  bool proceed = false;  // false: exit with `exit_code` after printing `message`
  int exit_code = kExitOk;
  std::string message;
  ExperimentConfig config;
  RunSettings settings;
};

ParseOutcome parse_config(int argc, const char* const* argv);

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bts::cli
