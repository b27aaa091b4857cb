#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flagcheck/checks.hpp"
#include "flagcheck/search.hpp"

namespace flagcheck {

struct RunConfig {
  std::string command = "check";  // check | search | regularize
  std::uint64_t master_seed = 0;
  std::map<std::string, double> tolerances;  // per-measure overrides
  long trials = 100;
  std::vector<Index> dims = {3};
  std::vector<std::string> measures;
  std::vector<std::string> properties;
  long budget = 100000;
  int nmax = 4;
  std::string output_path;
  std::string format = "json";  // json | csv
  std::size_t workers = 0;      // 0: FLAGCHECK_THREADS / hardware
  std::string witness_path;     // replay a serialized witness through check
};

struct ReportRecord {
  CheckResult check;
  // Violated records embed the replayable instance.
  std::string witness;
};

struct SearchSection {
  std::string measure;
  std::string property;
  double best_violation = 0.0;
  long evaluations = 0;
  std::uint64_t seed = 0;
  std::string witness;
};

struct RegularizationRow {
  std::string measure;
  long trial = 0;
  std::string state_digest;
  std::vector<std::pair<int, double>> per_copy;
  std::string trend;
};

struct SummaryCell {
  long holds = 0;
  long violated = 0;
  long inconclusive = 0;
};

struct Report {
  std::string schema_version = "1";
  RunConfig config;
  std::vector<ReportRecord> records;
  std::optional<SearchSection> search;
  std::vector<RegularizationRow> regularization;
  // Wall time is diagnostics; the serialized field is normalized to zero so
  // identical (config, seed) runs produce byte-identical reports.
  long wall_ms = 0;

  std::map<std::string, std::map<std::string, SummaryCell>> summaries() const;
};

std::string report_to_json(const Report& report);
std::string report_to_csv(const Report& report);

// key = value lines; '#' comments; keys mirror the CLI flags.
RunConfig parse_config_text(const std::string& text, RunConfig base = {});

}  // namespace flagcheck
