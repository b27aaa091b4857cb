#pragma once

#include <utility>
#include <vector>

#include "flagcheck/channel.hpp"
#include "flagcheck/matrix.hpp"
#include "flagcheck/state.hpp"

namespace flagcheck {

enum class Theory { coherence, entanglement };

const char* theory_name(Theory t);

// Orthonormal free pure states whose projective measurement is free. For
// coherence each vector is a computational basis vector up to global phase;
// for entanglement a product of computational basis vectors, which on a flag
// register is the same structural condition.
class FlagBasis {
public:
  FlagBasis(std::vector<PureState> vectors, Theory theory);

  const std::vector<PureState>& vectors() const { return vectors_; }
  Theory theory() const { return theory_; }
  std::size_t size() const { return vectors_.size(); }
  Index flag_dim() const { return vectors_.empty() ? 0 : vectors_.front().dim(); }
  const std::vector<Index>& flag_dims() const;

private:
  std::vector<PureState> vectors_;
  Theory theory_;
};

// First n computational basis vectors of a flag register with the given dims.
FlagBasis computational_flag_basis(Theory theory, std::size_t n, std::vector<Index> flag_dims);

bool validate_flag_basis(const FlagBasis& basis);

// sum_i p_i rho_i ⊗ |phi_i><phi_i|, flag register appended rightmost.
DensityMatrix flagged_state(const Ensemble& ens, const FlagBasis& basis);

// (1/2) rho ⊗ phi_1 + (1/2) sigma ⊗ phi_2 for a two-element flag basis.
DensityMatrix omega(const DensityMatrix& rho, const DensityMatrix& sigma, const FlagBasis& basis);

// Sum over all distinct arrangements of the multiset of factors, in
// lexicographic arrangement order. Unnormalized: the trace equals the number
// of arrangements for unit-trace factors.
ComplexMatrix symmetrized_tensor(const std::vector<std::pair<DensityMatrix, int>>& factors);

struct TypicalDecomposition {
  DensityMatrix rho_typ;
  double epsilon = 0.0;
  double weight_T = 0.0;
  int k_lo = 0;  // clipped to [0, N]
  int k_hi = 0;
  int N = 0;
  double delta_typ = 0.0;
};

// Window [floor(N p1 (1-delta)), ceil(N p1 (1+delta))] before clipping.
std::pair<long, long> typical_k_window(int N, double p1, double delta_typ);

double binomial_pmf(int N, int k, double p1);

// sum_{k in [k_lo, k_hi]} C(N,k) p1^k (1-p1)^(N-k), bounds clipped to [0, N].
double typical_weight(int N, double p1, long k_lo, long k_hi);

// Split rho^{⊗N} of the two-flag state p1·rho1⊗phi1 + p2·rho2⊗phi2 into the
// binomially weighted symmetrized typical part and the tail mass epsilon.
TypicalDecomposition typical_decomposition(const DensityMatrix& rho1, const DensityMatrix& rho2,
                                           double p1, const FlagBasis& basis, int N,
                                           double delta_typ);

}  // namespace flagcheck
