#include "flagcheck/generators.hpp"

#include <cmath>

#include "flagcheck/errors.hpp"

namespace flagcheck {

DensityMatrix random_test_state(Theory theory, Index d, RngStream& rng) {
  if (theory == Theory::coherence) {
    return random_density(d, d, rng);
  }
  if (d != 4) throw ArgumentError("entanglement test states are two-qubit (d = 4)");
  const DensityMatrix rho = random_density(4, 4, rng);
  return DensityMatrix(rho.matrix(), {2, 2});
}

DensityMatrix random_free_state(Theory theory, const std::vector<Index>& dims, RngStream& rng) {
  Index d = 1;
  for (Index x : dims) d *= x;
  if (theory == Theory::coherence) {
    const auto w = rng.dirichlet(static_cast<std::size_t>(d));
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    for (Index i = 0; i < d; ++i) m(i, i) = w[static_cast<std::size_t>(i)];
    return DensityMatrix(std::move(m), dims);
  }
  // Separable: a mixture of product states across the first cut.
  if (dims.size() < 2) throw ArgumentError("separable state needs at least two subsystems");
  const Index da = dims.front();
  Index db = 1;
  for (std::size_t s = 1; s < dims.size(); ++s) db *= dims[s];
  const std::size_t terms = 4 + rng.below(3);
  const auto w = rng.dirichlet(terms);
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (std::size_t t = 0; t < terms; ++t) {
    const DensityMatrix a = random_density(da, da, rng);
    const DensityMatrix b = random_density(db, db, rng);
    m += w[t] * kron(a.matrix(), b.matrix());
  }
  return DensityMatrix(std::move(m), dims);
}

DensityMatrix random_resourceful_state(Theory theory, RngStream& rng, Index d) {
  if (theory == Theory::coherence) {
    if (d == 0) d = 3;
    // Full-rank Ginibre states are coherent with overwhelming probability;
    // resample on the (measure-zero) event of vanishing off-diagonal mass.
    for (int attempt = 0; attempt < 64; ++attempt) {
      DensityMatrix rho = random_density(d, d, rng);
      double off = 0.0;
      for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
          if (i != j) off = std::max(off, std::abs(rho.matrix()(i, j)));
        }
      }
      if (off > 1e-3) return rho;
    }
    throw ArgumentError("failed to sample a coherent state");
  }
  // Isotropic mixture w |Phi+><Phi+| + (1-w) I/4 with w > 1/3 is entangled
  // (negative partial-transpose eigenvalue (1-w)/4 - w/2); local unitaries
  // preserve that while randomizing the basis.
  const double w = 0.45 + 0.5 * rng.uniform();
  ComplexVector bell = ComplexVector::Zero(4);
  bell[0] = 1.0 / std::sqrt(2.0);
  bell[3] = 1.0 / std::sqrt(2.0);
  ComplexMatrix m = w * (bell * bell.adjoint());
  m += (1.0 - w) / 4.0 * ComplexMatrix::Identity(4, 4);
  const ComplexMatrix u = kron(random_unitary(2, rng), random_unitary(2, rng));
  m = u * m * u.adjoint();
  m = Complex(0.5) * (m + m.adjoint().eval());
  m /= m.trace().real();
  return DensityMatrix(std::move(m), {2, 2});
}

Ensemble random_ensemble(Theory theory, Index d, std::size_t n, RngStream& rng) {
  auto weights = rng.dirichlet(n);
  std::vector<DensityMatrix> states;
  states.reserve(n);
  for (std::size_t i = 0; i < n; ++i) states.push_back(random_test_state(theory, d, rng));
  return Ensemble(std::move(weights), std::move(states));
}

FlagBasis random_flag_basis(Theory theory, std::size_t n, RngStream& rng) {
  std::vector<Index> flag_dims;
  if (theory == Theory::entanglement) {
    flag_dims = (n <= 2) ? std::vector<Index>{2} : std::vector<Index>{2, 2};
  } else {
    flag_dims = {static_cast<Index>(n)};
  }
  Index df = 1;
  for (Index x : flag_dims) df *= x;
  const auto perm = rng.permutation(static_cast<std::size_t>(df));
  std::vector<PureState> vecs;
  for (std::size_t i = 0; i < n; ++i) {
    ComplexVector v = ComplexVector::Zero(df);
    const double theta = 2.0 * M_PI * rng.uniform();
    v[static_cast<Index>(perm[i])] = Complex(std::cos(theta), std::sin(theta));
    vecs.emplace_back(std::move(v), flag_dims);
  }
  return FlagBasis(std::move(vecs), theory);
}

KrausChannel random_channel(Index d, std::size_t n_kraus, RngStream& rng) {
  // Columns of a random isometry V : C^d -> C^(n d), sliced into blocks.
  const Index rows = static_cast<Index>(n_kraus) * d;
  ComplexMatrix g(rows, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < rows; ++i) g(i, j) = rng.complex_gaussian();
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix v = qr.householderQ() * ComplexMatrix::Identity(rows, d);
  std::vector<ComplexMatrix> ops;
  ops.reserve(n_kraus);
  for (std::size_t nth = 0; nth < n_kraus; ++nth) {
    ops.push_back(v.block(static_cast<Index>(nth) * d, 0, d, d));
  }
  return KrausChannel(std::move(ops), {d}, {d});
}

KrausChannel random_free_channel(Theory theory, const std::vector<Index>& dims,
                                 std::size_t n_kraus, RngStream& rng) {
  if (theory == Theory::coherence) {
    Index d = 1;
    for (Index x : dims) d *= x;
    return random_incoherent_channel(d, n_kraus, rng);
  }
  if (dims.size() < 2) throw ArgumentError("1-local channel needs at least two subsystems");
  Index db = 1;
  for (std::size_t s = 1; s < dims.size(); ++s) db *= dims[s];
  KrausChannel local = random_channel(dims.front(), n_kraus, rng);
  return embed_local(local, db, EmbedSide::right);
}

}  // namespace flagcheck
