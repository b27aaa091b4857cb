#include "flagcheck/flags.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flagcheck/errors.hpp"

namespace flagcheck {

const char* theory_name(Theory t) {
  return t == Theory::coherence ? "coherence" : "entanglement";
}

FlagBasis::FlagBasis(std::vector<PureState> vectors, Theory theory)
    : vectors_(std::move(vectors)), theory_(theory) {
  if (vectors_.empty()) throw ArgumentError("flag basis must be nonempty");
  for (const auto& v : vectors_) {
    if (v.dims() != vectors_.front().dims()) {
      throw ArgumentError("flag basis vectors must share a common register");
    }
  }
  if (static_cast<Index>(vectors_.size()) > flag_dim()) {
    throw ArgumentError("flag basis has more vectors than the register dimension");
  }
}

const std::vector<Index>& FlagBasis::flag_dims() const { return vectors_.front().dims(); }

FlagBasis computational_flag_basis(Theory theory, std::size_t n, std::vector<Index> flag_dims) {
  Index d = 1;
  for (Index x : flag_dims) d *= x;
  if (static_cast<Index>(n) > d) {
    throw ArgumentError("computational_flag_basis: register too small");
  }
  std::vector<PureState> vecs;
  for (std::size_t i = 0; i < n; ++i) {
    ComplexVector v = ComplexVector::Zero(d);
    v[static_cast<Index>(i)] = 1.0;
    vecs.emplace_back(std::move(v), flag_dims);
  }
  return FlagBasis(std::move(vecs), theory);
}

bool validate_flag_basis(const FlagBasis& basis) {
  constexpr double tol = 1e-12;
  const auto& vecs = basis.vectors();
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    for (std::size_t j = i; j < vecs.size(); ++j) {
      const Complex overlap = vecs[i].amplitudes().dot(vecs[j].amplitudes());
      const double target = (i == j) ? 1.0 : 0.0;
      if (std::abs(overlap - Complex(target)) > tol) return false;
    }
  }
  // Freeness: a computational basis vector up to global phase. On a product
  // flag register every computational vector is a product of computational
  // vectors on the factors, so the entanglement case is the same structural
  // condition, and each projector |phi><phi| has a single nonzero entry,
  // making the projective measurement incoherent (and 1-local).
  for (const auto& v : vecs) {
    int nonzero = 0;
    for (Index k = 0; k < v.dim(); ++k) {
      if (std::abs(v.amplitudes()[k]) > tol) ++nonzero;
    }
    if (nonzero != 1) return false;
  }
  return true;
}

DensityMatrix flagged_state(const Ensemble& ens, const FlagBasis& basis) {
  if (ens.size() != basis.size()) {
    throw ArgumentError("flagged_state: ensemble and basis lengths differ");
  }
  if (!validate_flag_basis(basis)) throw ArgumentError("flagged_state: invalid flag basis");
  const Index da = ens.states.front().dim();
  const Index df = basis.flag_dim();
  if (da * df > dimension_cap()) {
    throw CapacityError("flagged_state: product dimension exceeds cap");
  }
  ComplexMatrix out = ComplexMatrix::Zero(da * df, da * df);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const ComplexVector& phi = basis.vectors()[i].amplitudes();
    const ComplexMatrix proj = phi * phi.adjoint();
    out += kron(ens.weights[i] * ens.states[i].matrix(), proj);
  }
  std::vector<Index> dims = ens.states.front().dims();
  const auto& fd = basis.flag_dims();
  dims.insert(dims.end(), fd.begin(), fd.end());
  return DensityMatrix(std::move(out), std::move(dims));
}

DensityMatrix omega(const DensityMatrix& rho, const DensityMatrix& sigma,
                    const FlagBasis& basis) {
  if (basis.size() != 2) throw ArgumentError("omega: flag basis must have exactly 2 elements");
  if (rho.dims() != sigma.dims()) throw ArgumentError("omega: state dimensions differ");
  return flagged_state(Ensemble({0.5, 0.5}, {rho, sigma}), basis);
}

ComplexMatrix symmetrized_tensor(const std::vector<std::pair<DensityMatrix, int>>& factors) {
  if (factors.empty()) throw ArgumentError("symmetrized_tensor: no factors");
  std::vector<int> sequence;
  Index total_dim = 1;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const auto& [state, mult] = factors[f];
    if (mult < 0) throw ArgumentError("symmetrized_tensor: negative multiplicity");
    for (int i = 0; i < mult; ++i) {
      sequence.push_back(static_cast<int>(f));
      total_dim *= state.dim();
    }
  }
  if (sequence.empty()) throw ArgumentError("symmetrized_tensor: total multiplicity is zero");
  if (total_dim > dimension_cap()) {
    std::ostringstream msg;
    msg << "symmetrized_tensor: dimension " << total_dim << " exceeds cap " << dimension_cap();
    throw CapacityError(msg.str());
  }

  // sequence starts sorted; next_permutation walks all distinct arrangements
  // in lexicographic order, which pins the summation order.
  ComplexMatrix acc = ComplexMatrix::Zero(total_dim, total_dim);
  do {
    ComplexMatrix term = factors[static_cast<std::size_t>(sequence.front())].first.matrix();
    for (std::size_t i = 1; i < sequence.size(); ++i) {
      term = kron(term, factors[static_cast<std::size_t>(sequence[i])].first.matrix());
    }
    acc += term;
  } while (std::next_permutation(sequence.begin(), sequence.end()));
  return acc;
}

std::pair<long, long> typical_k_window(int N, double p1, double delta_typ) {
  const double lo = N * p1 * (1.0 - delta_typ);
  const double hi = N * p1 * (1.0 + delta_typ);
  return {static_cast<long>(std::floor(lo)), static_cast<long>(std::ceil(hi))};
}

double binomial_pmf(int N, int k, double p1) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c = c * static_cast<double>(N - i) / static_cast<double>(i + 1);
  return c * std::pow(p1, k) * std::pow(1.0 - p1, N - k);
}

double typical_weight(int N, double p1, long k_lo, long k_hi) {
  const long lo = std::max(0L, k_lo);
  const long hi = std::min(static_cast<long>(N), k_hi);
  double total = 0.0;
  for (long k = lo; k <= hi; ++k) total += binomial_pmf(N, static_cast<int>(k), p1);
  return std::min(total, 1.0);
}

TypicalDecomposition typical_decomposition(const DensityMatrix& rho1, const DensityMatrix& rho2,
                                           double p1, const FlagBasis& basis, int N,
                                           double delta_typ) {
  if (!(p1 >= 0.0 && p1 <= 0.5)) {
    throw ArgumentError("typical_decomposition: requires p1 <= 1/2");
  }
  if (N < 1) throw ArgumentError("typical_decomposition: N must be >= 1");
  if (delta_typ < 0.0) throw ArgumentError("typical_decomposition: delta_typ must be >= 0");
  if (basis.size() != 2) throw ArgumentError("typical_decomposition: need a 2-element flag basis");
  if (rho1.dims() != rho2.dims()) throw ArgumentError("typical_decomposition: state dims differ");
  if (!validate_flag_basis(basis)) throw ArgumentError("typical_decomposition: invalid basis");

  const DensityMatrix t1 = tensor(rho1, basis.vectors()[0].projector());
  const DensityMatrix t2 = tensor(rho2, basis.vectors()[1].projector());

  Index branch_dim = t1.dim();
  Index total_dim = 1;
  for (int i = 0; i < N; ++i) {
    total_dim *= branch_dim;
    if (total_dim > dimension_cap()) {
      throw CapacityError("typical_decomposition: N-copy dimension exceeds cap");
    }
  }

  const auto [raw_lo, raw_hi] = typical_k_window(N, p1, delta_typ);
  const int k_lo = static_cast<int>(std::max(0L, raw_lo));
  const int k_hi = static_cast<int>(std::min(static_cast<long>(N), raw_hi));
  if (k_lo > k_hi) throw DegenerateError("typical_decomposition: empty k range");

  const double p2 = 1.0 - p1;
  const double weight_T = typical_weight(N, p1, k_lo, k_hi);
  if (weight_T <= 0.0) throw DegenerateError("typical_decomposition: window carries no weight");

  ComplexMatrix acc = ComplexMatrix::Zero(total_dim, total_dim);
  for (int k = k_lo; k <= k_hi; ++k) {
    const double w = std::pow(p1, k) * std::pow(p2, N - k);
    acc += (w / weight_T) * symmetrized_tensor({{t1, k}, {t2, N - k}});
  }

  std::vector<Index> dims;
  for (int i = 0; i < N; ++i) {
    dims.insert(dims.end(), t1.dims().begin(), t1.dims().end());
  }
  TypicalDecomposition out{DensityMatrix(std::move(acc), std::move(dims)),
                           1.0 - weight_T,
                           weight_T,
                           k_lo,
                           k_hi,
                           N,
                           delta_typ};
  return out;
}

}  // namespace flagcheck
