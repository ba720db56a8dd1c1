#pragma once

#include <filesystem>
#include <vector>

#include "bts_cli/config.hpp"

namespace bts::cli {

// Fills command-specific defaults (trial counts) left at zero.
void resolve_defaults(ExperimentConfig& cfg);

// Throws PreconditionError naming the first violated parameter range.
void validate(const ExperimentConfig& cfg);

// Runs the engine named by cfg.command and returns the files written.
std::vector<std::filesystem::path> run_command(const ExperimentConfig& cfg,
                                               const RunSettings& settings);

}  // namespace bts::cli
