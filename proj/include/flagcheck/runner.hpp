#pragma once

#include "flagcheck/report.hpp"

namespace flagcheck {

// Batch entry points behind the CLI subcommands. Each validates the config
// (ArgumentError on bad input), runs the workload with per-instance RNG
// streams, and returns a deterministic report.
Report run_check(const RunConfig& config);
Report run_search(const RunConfig& config);
Report run_regularize(const RunConfig& config);

// 0: clean; 2: a measure labeled flag additive violated a property that flag
// additivity implies (tensor-additivity properties stay informational).
int exit_code_for(const Report& report);

// Serializes per config.format and writes to config.output_path (or stdout
// when empty); returns the canonical bytes.
std::string emit_report(const Report& report, std::ostream& fallback);

}  // namespace flagcheck
