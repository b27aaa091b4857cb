#include "flagcheck/channel.hpp"

#include <cmath>
#include <sstream>

#include "flagcheck/errors.hpp"
#include "flagcheck/flags.hpp"

namespace flagcheck {

namespace {

constexpr double kTracePreservingTol = 1e-10;
constexpr double kOutcomeFloor = 1e-14;

Index product_of(const std::vector<Index>& dims) {
  Index p = 1;
  for (Index d : dims) p *= d;
  return p;
}

DensityMatrix make_state(ComplexMatrix m, std::vector<Index> dims) {
  // Kraus sums are Hermitian up to rounding; symmetrize and renormalize the
  // trace (trace preservation is only certified to 1e-10).
  m = Complex(0.5) * (m + m.adjoint().eval());
  const double tr = m.trace().real();
  if (!(tr > 0.0)) throw ArgumentError("channel output has nonpositive trace");
  m /= tr;
  return DensityMatrix(std::move(m), std::move(dims));
}

}  // namespace

KrausChannel::KrausChannel(std::vector<ComplexMatrix> kraus_ops, std::vector<Index> in_dims,
                           std::vector<Index> out_dims)
    : ops_(std::move(kraus_ops)), in_dims_(std::move(in_dims)), out_dims_(std::move(out_dims)) {
  if (ops_.empty()) throw ArgumentError("channel needs at least one Kraus operator");
  in_dim_ = product_of(in_dims_);
  out_dim_ = product_of(out_dims_);
  ComplexMatrix sum = ComplexMatrix::Zero(in_dim_, in_dim_);
  for (const auto& k : ops_) {
    if (k.rows() != out_dim_ || k.cols() != in_dim_) {
      throw ArgumentError("Kraus operator shape does not match channel dimensions");
    }
    if (!all_finite(k)) throw ArgumentError("Kraus operator has non-finite entries");
    sum += k.adjoint() * k;
  }
  const double defect = (sum - ComplexMatrix::Identity(in_dim_, in_dim_)).cwiseAbs().maxCoeff();
  if (defect > kTracePreservingTol) {
    std::ostringstream msg;
    msg << "channel is not trace preserving: defect " << defect;
    throw ArgumentError(msg.str());
  }
}

Ensemble::Ensemble(std::vector<double> w, std::vector<DensityMatrix> s)
    : weights(std::move(w)), states(std::move(s)) {
  if (weights.empty() || weights.size() != states.size()) {
    throw ArgumentError("ensemble needs matching nonempty weights and states");
  }
  double total = 0.0;
  for (double p : weights) {
    if (!(p >= 0.0)) throw ArgumentError("ensemble weights must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > kTraceTol) {
    throw ArgumentError("ensemble weights must sum to 1 within 1e-12");
  }
  for (const auto& st : states) {
    if (st.dims() != states.front().dims()) {
      throw ArgumentError("ensemble states must share identical dims");
    }
  }
}

DensityMatrix Ensemble::average() const {
  ComplexMatrix m = ComplexMatrix::Zero(states.front().dim(), states.front().dim());
  for (std::size_t i = 0; i < size(); ++i) m += weights[i] * states[i].matrix();
  return DensityMatrix(std::move(m), states.front().dims());
}

KrausChannel identity_channel(const std::vector<Index>& dims) {
  const Index d = product_of(dims);
  return KrausChannel({ComplexMatrix::Identity(d, d)}, dims, dims);
}

KrausChannel dephasing_channel(Index d) {
  std::vector<ComplexMatrix> ops;
  for (Index i = 0; i < d; ++i) {
    ComplexMatrix p = ComplexMatrix::Zero(d, d);
    p(i, i) = 1.0;
    ops.push_back(std::move(p));
  }
  return KrausChannel(std::move(ops), {d}, {d});
}

DensityMatrix apply(const KrausChannel& ch, const DensityMatrix& rho) {
  if (rho.dim() != ch.in_dim()) throw ArgumentError("apply: dimension mismatch");
  ComplexMatrix out = ComplexMatrix::Zero(ch.out_dim(), ch.out_dim());
  for (const auto& k : ch.kraus_ops()) out += k * rho.matrix() * k.adjoint();
  return make_state(std::move(out), ch.out_dims());
}

Ensemble selective_apply(const KrausChannel& ch, const DensityMatrix& rho, double* dropped_mass) {
  if (rho.dim() != ch.in_dim()) throw ArgumentError("selective_apply: dimension mismatch");
  std::vector<double> weights;
  std::vector<DensityMatrix> states;
  double dropped = 0.0;
  for (const auto& k : ch.kraus_ops()) {
    ComplexMatrix m = k * rho.matrix() * k.adjoint();
    const double p = m.trace().real();
    if (p < kOutcomeFloor) {
      dropped += std::max(p, 0.0);
      continue;
    }
    weights.push_back(p);
    states.push_back(make_state(std::move(m), ch.out_dims()));
  }
  if (weights.empty()) throw ArgumentError("selective_apply: all outcomes have zero probability");
  double total = 0.0;
  for (double p : weights) total += p;
  for (double& p : weights) p /= total;
  if (dropped_mass != nullptr) *dropped_mass = dropped;
  return Ensemble(std::move(weights), std::move(states));
}

bool is_incoherent(const KrausChannel& ch) {
  constexpr double tol = 1e-12;
  for (const auto& k : ch.kraus_ops()) {
    for (Index j = 0; j < k.cols(); ++j) {
      int nonzero = 0;
      for (Index i = 0; i < k.rows(); ++i) {
        if (std::abs(k(i, j)) > tol && ++nonzero > 1) return false;
      }
    }
  }
  return true;
}

KrausChannel random_incoherent_channel(Index d, std::size_t n_kraus, RngStream& rng) {
  if (n_kraus < 1) throw ArgumentError("random_incoherent_channel: n_kraus must be >= 1");
  // Row targets are one random permutation per operator; per-column amplitude
  // vectors are random unit vectors. Distinct columns then occupy disjoint
  // row patterns inside each operator, giving sum K†K = I exactly.
  std::vector<std::vector<std::size_t>> perms;
  perms.reserve(n_kraus);
  for (std::size_t n = 0; n < n_kraus; ++n) perms.push_back(rng.permutation(d));

  std::vector<ComplexMatrix> ops(n_kraus, ComplexMatrix::Zero(d, d));
  for (Index j = 0; j < d; ++j) {
    ComplexVector a(n_kraus);
    for (std::size_t n = 0; n < n_kraus; ++n) a[n] = rng.complex_gaussian();
    a /= a.norm();
    for (std::size_t n = 0; n < n_kraus; ++n) {
      ops[n](static_cast<Index>(perms[n][j]), j) = a[n];
    }
  }
  return KrausChannel(std::move(ops), {d}, {d});
}

KrausChannel embed_local(const KrausChannel& ch, Index other_dim, EmbedSide identity_side) {
  const ComplexMatrix eye = ComplexMatrix::Identity(other_dim, other_dim);
  std::vector<ComplexMatrix> ops;
  ops.reserve(ch.size());
  for (const auto& k : ch.kraus_ops()) {
    ops.push_back(identity_side == EmbedSide::right ? kron(k, eye) : kron(eye, k));
  }
  std::vector<Index> in_dims = ch.in_dims();
  std::vector<Index> out_dims = ch.out_dims();
  if (identity_side == EmbedSide::right) {
    in_dims.push_back(other_dim);
    out_dims.push_back(other_dim);
  } else {
    in_dims.insert(in_dims.begin(), other_dim);
    out_dims.insert(out_dims.begin(), other_dim);
  }
  return KrausChannel(std::move(ops), std::move(in_dims), std::move(out_dims));
}

KrausChannel flagged_channel(const KrausChannel& ch, const FlagBasis& basis) {
  if (basis.size() != ch.size()) {
    throw ArgumentError("flagged_channel: flag basis length must equal Kraus count");
  }
  if (!validate_flag_basis(basis)) throw ArgumentError("flagged_channel: invalid flag basis");
  std::vector<ComplexMatrix> ops;
  ops.reserve(ch.size());
  for (std::size_t n = 0; n < ch.size(); ++n) {
    const ComplexVector& phi = basis.vectors()[n].amplitudes();
    ops.push_back(kron(ch.kraus_ops()[n], ComplexMatrix(phi)));
  }
  std::vector<Index> out_dims = ch.out_dims();
  const auto& fd = basis.flag_dims();
  out_dims.insert(out_dims.end(), fd.begin(), fd.end());
  return KrausChannel(std::move(ops), ch.in_dims(), std::move(out_dims));
}

KrausChannel flag_measurement_channel(const std::vector<Index>& a_dims, const FlagBasis& basis) {
  if (basis.size() == 0) throw ArgumentError("flag_measurement_channel: empty basis");
  if (!validate_flag_basis(basis)) {
    throw ArgumentError("flag_measurement_channel: invalid flag basis");
  }
  const Index da = product_of(a_dims);
  const Index df = basis.flag_dim();
  const ComplexMatrix eye_a = ComplexMatrix::Identity(da, da);

  std::vector<ComplexMatrix> ops;
  ComplexMatrix projector_sum = ComplexMatrix::Zero(df, df);
  for (const auto& phi : basis.vectors()) {
    const ComplexMatrix p = phi.amplitudes() * phi.amplitudes().adjoint();
    projector_sum += p;
    ops.push_back(kron(eye_a, p));
  }
  // Complete the instrument when the basis does not span the flag register.
  const ComplexMatrix rest = ComplexMatrix::Identity(df, df) - projector_sum;
  if (rest.cwiseAbs().maxCoeff() > 1e-12) ops.push_back(kron(eye_a, rest));

  std::vector<Index> dims = a_dims;
  const auto& fd = basis.flag_dims();
  dims.insert(dims.end(), fd.begin(), fd.end());
  return KrausChannel(std::move(ops), dims, dims);
}

}  // namespace flagcheck
