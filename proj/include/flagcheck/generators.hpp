#pragma once

#include "flagcheck/channel.hpp"
#include "flagcheck/flags.hpp"
#include "flagcheck/measures.hpp"
#include "flagcheck/rng.hpp"
#include "flagcheck/state.hpp"

namespace flagcheck {

// Random-instance constructors shared by sweeps, searches and tests. Every
// generator draws only from the passed stream, so instances are pinned by
// (master seed, instance index).

// Full-rank Ginibre state on a theory-appropriate register: dimension d for
// coherence, a (2, d/2)-type bipartite split for entanglement (d must be 4).
DensityMatrix random_test_state(Theory theory, Index d, RngStream& rng);

// Free state of the theory on the given register.
DensityMatrix random_free_state(Theory theory, const std::vector<Index>& dims, RngStream& rng);

// Full-rank state guaranteed non-free: coherent by construction for
// coherence; a noisy Bell mixture twirled by local unitaries for
// entanglement (weight above the separability threshold 1/3).
DensityMatrix random_resourceful_state(Theory theory, RngStream& rng, Index d = 0);

Ensemble random_ensemble(Theory theory, Index d, std::size_t n, RngStream& rng);

// Flag basis of n distinct computational vectors with random phases on a
// register of dimension >= n (a two-qubit register for entanglement flags).
FlagBasis random_flag_basis(Theory theory, std::size_t n, RngStream& rng);

// Free channel of the theory: an incoherent channel for coherence, a random
// CPTP channel on party A tensored with the identity for entanglement.
KrausChannel random_free_channel(Theory theory, const std::vector<Index>& dims,
                                 std::size_t n_kraus, RngStream& rng);

// Unconstrained random CPTP channel from a Haar-ish random isometry.
KrausChannel random_channel(Index d, std::size_t n_kraus, RngStream& rng);

}  // namespace flagcheck
