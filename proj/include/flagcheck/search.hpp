#pragma once

#include <optional>
#include <string>

#include "flagcheck/checks.hpp"

namespace flagcheck {

// A replayable instance: a (state, channel) pair for strong monotonicity, a
// (weights, states, basis) triple for the ensemble properties, state pairs
// for the tensor identities. Serialized as a text block embedding
// QSTATE/KRAUS sections.
struct Witness {
  std::string measure;
  Property property = Property::strong_mono;
  std::optional<DensityMatrix> state;
  std::optional<DensityMatrix> state2;  // sigma / padding state
  std::optional<KrausChannel> channel;
  std::optional<Ensemble> ensemble;
  std::optional<FlagBasis> basis;
  int n_copies = 2;       // n_copy and sandwich
  double p1 = 0.5;        // sandwich
  double delta_typ = 0.3; // sandwich
};

std::string witness_to_string(const Witness& w);
Witness witness_from_string(const std::string& text);

// Signed violation of the witness's property at strict settings: positive
// means violated, and by how much.
double replay_violation(const Witness& w, const CheckOptions& opts);
CheckResult replay_check(const Witness& w, const CheckOptions& opts);

struct SearchOptions {
  Property property = Property::strong_mono;
  Index dim = 3;
  long budget = 100000;
  std::uint64_t seed = 0;
  std::size_t ensemble_size = 3;
  std::size_t cut = 1;
  std::size_t workers = 1;
  long evals_per_restart = 500;
  // Light solver during the search; the best candidate is re-evaluated at
  // strict settings for the reported violation.
  SolverOptions light_solver{1e-5, 2000L, 2};
  SolverOptions strict_solver{};
};

struct SearchOutcome {
  double best_violation = 0.0;
  std::string instance_text;
  long evaluations = 0;
  std::uint64_t seed = 0;
  std::optional<DensityMatrix> state;
  std::optional<KrausChannel> channel;
  std::optional<Ensemble> ensemble;
  std::optional<FlagBasis> basis;

  Witness witness(const MeasureDescriptor& m, Property p) const;
};

// Random restarts plus Nelder-Mead over an unconstrained parameterization
// (Cholesky-style state factors, softmax ensemble weights, per-column unit
// amplitude vectors for incoherent channels). Deterministic given the seed,
// independent of worker count.
SearchOutcome search_violation(const MeasureDescriptor& m, const SearchOptions& opts);

}  // namespace flagcheck
