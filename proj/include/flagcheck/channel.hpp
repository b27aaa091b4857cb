#pragma once

#include <vector>

#include "flagcheck/matrix.hpp"
#include "flagcheck/rng.hpp"
#include "flagcheck/state.hpp"

namespace flagcheck {

// Trace-preserving channel in Kraus form. Operators are out_dim x in_dim;
// trace preservation is enforced within 1e-10 at construction.
class KrausChannel {
public:
  KrausChannel(std::vector<ComplexMatrix> kraus_ops, std::vector<Index> in_dims,
               std::vector<Index> out_dims);

  const std::vector<ComplexMatrix>& kraus_ops() const { return ops_; }
  const std::vector<Index>& in_dims() const { return in_dims_; }
  const std::vector<Index>& out_dims() const { return out_dims_; }
  Index in_dim() const { return in_dim_; }
  Index out_dim() const { return out_dim_; }
  std::size_t size() const { return ops_.size(); }

private:
  std::vector<ComplexMatrix> ops_;
  std::vector<Index> in_dims_, out_dims_;
  Index in_dim_ = 0, out_dim_ = 0;
};

// Probability-weighted states on a common space.
struct Ensemble {
  Ensemble(std::vector<double> weights, std::vector<DensityMatrix> states);

  std::vector<double> weights;
  std::vector<DensityMatrix> states;

  std::size_t size() const { return weights.size(); }
  DensityMatrix average() const;
};

KrausChannel identity_channel(const std::vector<Index>& dims);

// Full dephasing in the computational basis (diagonal projectors).
KrausChannel dephasing_channel(Index d);

DensityMatrix apply(const KrausChannel& ch, const DensityMatrix& rho);

// Measurement outcomes p_i = Tr(K_i rho K_i†), rho_i = K_i rho K_i† / p_i.
// Outcomes below p = 1e-14 are dropped and weights renormalized; the dropped
// mass is reported through `dropped_mass` when given.
Ensemble selective_apply(const KrausChannel& ch, const DensityMatrix& rho,
                         double* dropped_mass = nullptr);

// True iff every Kraus operator has at most one entry of magnitude > 1e-12
// per column.
bool is_incoherent(const KrausChannel& ch);

// Random incoherent trace-preserving channel: each Kraus operator places one
// amplitude per column, rows chosen by an independent random permutation per
// operator, and per-column amplitude vectors drawn as random unit vectors so
// that sum K†K = I holds exactly.
KrausChannel random_incoherent_channel(Index d, std::size_t n_kraus, RngStream& rng);

// Which side of the tensor product the untouched identity factor occupies.
enum class EmbedSide { left, right };

KrausChannel embed_local(const KrausChannel& ch, Index other_dim,
                         EmbedSide identity_side = EmbedSide::right);

class FlagBasis;  // flags.hpp

// Kraus operators K_n ⊗ |phi_n>, appending the flag register rightmost.
KrausChannel flagged_channel(const KrausChannel& ch, const FlagBasis& basis);

// Selective projective measurement of the flag register: Kraus operators
// I_A ⊗ |phi_i><phi_i| plus, when the basis does not span the flag space,
// one remainder projector to keep the channel trace preserving.
KrausChannel flag_measurement_channel(const std::vector<Index>& a_dims, const FlagBasis& basis);

}  // namespace flagcheck
