#pragma once

#include <string>
#include <vector>

#include "flagcheck/flags.hpp"
#include "flagcheck/matrix.hpp"
#include "flagcheck/rng.hpp"
#include "flagcheck/state.hpp"

namespace flagcheck {

enum class MeasureId { c_l1, c_rel_ent, c_tr, negativity, eof_2q };

struct MeasureDescriptor {
  MeasureId id;
  Theory theory;
  Index max_dim;
  bool supports_flagged_eval;
  // Analytic expectation, used only to label test suites and exit codes.
  bool known_flag_additive;
};

const MeasureDescriptor& descriptor(MeasureId id);
const MeasureDescriptor& descriptor(const std::string& name);
const std::vector<MeasureDescriptor>& all_measures();
std::string measure_name(MeasureId id);

struct SolverReport {
  double value = 0.0;
  long iterations = 0;
  double gap_estimate = 0.0;
  bool converged = true;
};

// Settings for the trace-norm-of-coherence minimization.
struct SolverOptions {
  double tol = 1e-7;
  long max_iterations = 20000;
  int restarts = 5;
};

// sum_{i != j} |rho_ij|
double c_l1(const DensityMatrix& rho);

// S(dephase(rho)) - S(rho), in bits.
double c_rel_ent(const DensityMatrix& rho);

// min over diagonal states of ||rho - diag(q)||_1 via projected subgradient
// descent on the probability simplex. Polyak-style steps against the best
// linear-minorant lower bound; gap_estimate is a certified optimality gap.
SolverReport c_tr(const DensityMatrix& rho, const SolverOptions& opts, RngStream& rng);

// (||rho^{T_B}||_1 - 1) / 2 with party B given by subsystem indices.
double negativity(const DensityMatrix& rho, const std::vector<std::size_t>& b_side);

// Party A = leading `cut` subsystems, party B = the rest.
double negativity_cut(const DensityMatrix& rho, std::size_t cut);

// Entanglement of formation of a two-qubit state (spin-flip concurrence), bits.
double eof_2q(const DensityMatrix& rho);

struct EvalContext {
  std::size_t cut = 1;          // bipartition for entanglement measures
  SolverOptions solver;         // c_tr settings
  std::uint64_t solver_seed = 0;
};

// Uniform dispatch. Throws CapabilityError when the measure cannot evaluate
// states of this shape. The c_tr restarts are seeded from (solver_seed,
// state digest), so a given state always solves identically regardless of
// evaluation order.
SolverReport evaluate(const MeasureDescriptor& desc, const DensityMatrix& rho,
                      const EvalContext& ctx = {});

}  // namespace flagcheck
