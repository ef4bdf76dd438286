#pragma once

#include <string>

#include "velopref/run_config.hpp"

namespace velopref {

// Batch subcommands. Each reads its upstream artifacts from
// config.output_dir, writes its outputs there, and records a manifest
// (config digest, seed, version, input/output digests) for
// reproducibility. They throw ValidationError for missing/invalid inputs,
// ConvergenceError when iteration fails, Error otherwise.
void cmd_gen_world(const RunConfig& config);
void cmd_gen_experts(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_rollout(const RunConfig& config);
void cmd_evaluate(const RunConfig& config);
void cmd_explain(const RunConfig& config);
void cmd_trip_stats(const RunConfig& config);

// Dispatch by subcommand name; returns the process exit code
// (0 ok, 1 validation, 2 runtime, 3 non-convergence).
int run_command(const std::string& name, const RunConfig& config);

}  // namespace velopref
