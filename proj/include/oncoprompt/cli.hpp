#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "oncoprompt/config.hpp"

namespace oncoprompt::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kIo = 2,
  kBackend = 3,
  kUsage = 64,
};

/// Subcommands: ingest, ablate, split, prompts, export-finetune, predict,
/// evaluate, report, serve. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Digest of everything that determines artifact contents: input file
/// bytes, schema, label policy, split, setting, serialization order and the
/// backend identity. Output paths, tissue/feature selection and tuning knobs
/// (parallelism, timeouts, retries) are excluded.
std::string config_digest(const RunConfig& config);

}  // namespace oncoprompt::cli
