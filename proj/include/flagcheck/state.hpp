#pragma once

#include <vector>

#include "flagcheck/matrix.hpp"
#include "flagcheck/rng.hpp"

namespace flagcheck {

// Product-dimension cap for dense storage (4096 keeps a single matrix under
// ~270 MB of complex doubles). Adjustable for tests.
Index dimension_cap();
void set_dimension_cap(Index cap);

// Density operator with subsystem dimension metadata. dims is left-to-right
// tensor order; appended registers (free states, flags) go rightmost.
// Construction validates: finite entries, Hermiticity within 1e-12, unit
// trace within 1e-12, dims product equal to the matrix dimension. The
// smallest-eigenvalue check (>= -1e-10) runs for dimensions up to 64; larger
// states come from invariant-preserving operations and skip the cubic check.
class DensityMatrix {
public:
  DensityMatrix(ComplexMatrix matrix, std::vector<Index> dims);

  const ComplexMatrix& matrix() const { return matrix_; }
  const std::vector<Index>& dims() const { return dims_; }
  Index dim() const { return matrix_.rows(); }
  std::size_t subsystems() const { return dims_.size(); }

  // Full PSD validation regardless of dimension.
  void require_psd(double tol = kPsdTol) const;

private:
  ComplexMatrix matrix_;
  std::vector<Index> dims_;
};

class PureState {
public:
  PureState(ComplexVector amplitudes, std::vector<Index> dims);

  const ComplexVector& amplitudes() const { return amps_; }
  const std::vector<Index>& dims() const { return dims_; }
  Index dim() const { return amps_.size(); }

  DensityMatrix projector() const;

private:
  ComplexVector amps_;
  std::vector<Index> dims_;
};

// Computational basis vector |index> on a single subsystem of dimension d.
PureState basis_state(Index d, Index index);

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

// rho^{⊗n}; n = 0 yields the trivial one-dimensional state.
DensityMatrix tensor_power(const DensityMatrix& rho, int n);

// Reduce to the subsystems listed in `keep` (strictly increasing order kept).
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::size_t>& keep);

// Transpose the indices of one subsystem. Output is Hermitian but in general
// not positive, hence the raw matrix return.
ComplexMatrix partial_transpose(const DensityMatrix& rho, std::size_t subsystem);

// Transpose every subsystem in `subsystems` (used for bipartite cuts).
ComplexMatrix partial_transpose(const DensityMatrix& rho, const std::vector<std::size_t>& subsystems);

// Raw-matrix core, for intermediates that are not states.
ComplexMatrix partial_transpose(const ComplexMatrix& m, const std::vector<Index>& dims,
                                const std::vector<std::size_t>& subsystems);

// Zero all off-diagonal entries.
DensityMatrix dephase(const DensityMatrix& rho);

// -sum lambda log2 lambda, eigenvalues below 1e-12 treated as zero. Bits.
double von_neumann_entropy(const DensityMatrix& rho);

// Ginibre construction G G† / Tr(G G†) with G of shape d x rank.
DensityMatrix random_density(Index d, Index rank, RngStream& rng);

// Haar-random unitary via QR of a Ginibre matrix (test and generator utility).
ComplexMatrix random_unitary(Index d, RngStream& rng);

}  // namespace flagcheck
