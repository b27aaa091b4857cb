#include "flagcheck/state.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>

#include "flagcheck/errors.hpp"

namespace flagcheck {

namespace {

std::atomic<Index> g_dimension_cap{4096};

Index checked_dims_product(const std::vector<Index>& dims, Index expected) {
  Index prod = 1;
  for (Index d : dims) {
    if (d < 1) throw ArgumentError("subsystem dimensions must be >= 1");
    prod *= d;
  }
  if (prod != expected) {
    std::ostringstream msg;
    msg << "dims product " << prod << " does not match dimension " << expected;
    throw ArgumentError(msg.str());
  }
  return prod;
}

// Row-major strides for a dims list.
std::vector<Index> strides_of(const std::vector<Index>& dims) {
  std::vector<Index> s(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) {
    s[i - 1] = s[i] * dims[i];
  }
  return s;
}

}  // namespace

Index dimension_cap() { return g_dimension_cap.load(); }
void set_dimension_cap(Index cap) { g_dimension_cap.store(cap); }

DensityMatrix::DensityMatrix(ComplexMatrix matrix, std::vector<Index> dims)
    : matrix_(std::move(matrix)), dims_(std::move(dims)) {
  if (matrix_.rows() != matrix_.cols()) throw ArgumentError("density matrix must be square");
  if (!all_finite(matrix_)) throw ArgumentError("density matrix has non-finite entries");
  checked_dims_product(dims_, matrix_.rows());
  if (hermiticity_defect(matrix_) > kHermitianTol) {
    throw ArgumentError("density matrix is not Hermitian within 1e-12");
  }
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > kTraceTol || std::abs(matrix_.trace().imag()) > kTraceTol) {
    throw ArgumentError("density matrix trace differs from 1 beyond 1e-12");
  }
  if (dim() <= 64) require_psd();
}

void DensityMatrix::require_psd(double tol) const {
  const RealVector ev = eigvalsh(matrix_);
  if (ev[ev.size() - 1] < -tol) {
    std::ostringstream msg;
    msg << "density matrix has eigenvalue " << ev[ev.size() - 1] << " below -" << tol;
    throw ArgumentError(msg.str());
  }
}

PureState::PureState(ComplexVector amplitudes, std::vector<Index> dims)
    : amps_(std::move(amplitudes)), dims_(std::move(dims)) {
  checked_dims_product(dims_, amps_.size());
  for (Index i = 0; i < amps_.size(); ++i) {
    if (!std::isfinite(amps_[i].real()) || !std::isfinite(amps_[i].imag())) {
      throw ArgumentError("pure state has non-finite amplitudes");
    }
  }
  if (std::abs(amps_.norm() - 1.0) > kTraceTol) {
    throw ArgumentError("pure state norm differs from 1 beyond 1e-12");
  }
}

DensityMatrix PureState::projector() const {
  ComplexMatrix m = amps_ * amps_.adjoint();
  return DensityMatrix(std::move(m), dims_);
}

PureState basis_state(Index d, Index index) {
  if (index < 0 || index >= d) throw ArgumentError("basis_state: index out of range");
  ComplexVector v = ComplexVector::Zero(d);
  v[index] = 1.0;
  return PureState(std::move(v), {d});
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  const Index d = a.dim() * b.dim();
  if (d > dimension_cap()) {
    std::ostringstream msg;
    msg << "tensor: product dimension " << d << " exceeds cap " << dimension_cap();
    throw CapacityError(msg.str());
  }
  std::vector<Index> dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return DensityMatrix(kron(a.matrix(), b.matrix()), std::move(dims));
}

DensityMatrix tensor_power(const DensityMatrix& rho, int n) {
  if (n < 0) throw ArgumentError("tensor_power: negative exponent");
  if (n == 0) {
    return DensityMatrix(ComplexMatrix::Identity(1, 1), {1});
  }
  DensityMatrix out = rho;
  for (int i = 1; i < n; ++i) out = tensor(out, rho);
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::size_t>& keep) {
  const auto& dims = rho.dims();
  if (keep.empty()) throw ArgumentError("partial_trace: keep set must be nonempty");
  for (std::size_t s : keep) {
    if (s >= dims.size()) throw ArgumentError("partial_trace: subsystem index out of range");
  }
  if (!std::is_sorted(keep.begin(), keep.end()) ||
      std::adjacent_find(keep.begin(), keep.end()) != keep.end()) {
    throw ArgumentError("partial_trace: keep set must be strictly increasing");
  }

  std::vector<std::size_t> traced;
  for (std::size_t s = 0; s < dims.size(); ++s) {
    if (!std::binary_search(keep.begin(), keep.end(), s)) traced.push_back(s);
  }
  const auto strides = strides_of(dims);

  std::vector<Index> keep_dims, keep_strides, tr_strides;
  Index keep_total = 1, traced_total = 1;
  for (std::size_t s : keep) {
    keep_dims.push_back(dims[s]);
    keep_strides.push_back(strides[s]);
    keep_total *= dims[s];
  }
  for (std::size_t s : traced) {
    tr_strides.push_back(strides[s]);
    traced_total *= dims[s];
  }

  // Offsets of every keep-index combination and every traced combination.
  auto offsets = [](const std::vector<Index>& local_dims, const std::vector<Index>& local_strides,
                    Index total) {
    std::vector<Index> out(total, 0);
    Index repeat = total;
    for (std::size_t s = 0; s < local_dims.size(); ++s) {
      repeat /= local_dims[s];
      for (Index i = 0; i < total; ++i) {
        out[i] += ((i / repeat) % local_dims[s]) * local_strides[s];
      }
    }
    return out;
  };
  std::vector<Index> tr_dims;
  for (std::size_t s : traced) tr_dims.push_back(dims[s]);
  const auto keep_off = offsets(keep_dims, keep_strides, keep_total);
  const auto tr_off = offsets(tr_dims, tr_strides, traced_total);

  const ComplexMatrix& m = rho.matrix();
  ComplexMatrix out = ComplexMatrix::Zero(keep_total, keep_total);
  for (Index r = 0; r < keep_total; ++r) {
    for (Index c = 0; c < keep_total; ++c) {
      Complex acc = 0.0;
      for (Index t = 0; t < traced_total; ++t) {
        acc += m(keep_off[r] + tr_off[t], keep_off[c] + tr_off[t]);
      }
      out(r, c) = acc;
    }
  }
  return DensityMatrix(std::move(out), keep_dims);
}

ComplexMatrix partial_transpose(const DensityMatrix& rho, std::size_t subsystem) {
  return partial_transpose(rho.matrix(), rho.dims(), std::vector<std::size_t>{subsystem});
}

ComplexMatrix partial_transpose(const DensityMatrix& rho,
                                const std::vector<std::size_t>& subsystems) {
  return partial_transpose(rho.matrix(), rho.dims(), subsystems);
}

ComplexMatrix partial_transpose(const ComplexMatrix& m, const std::vector<Index>& dims,
                                const std::vector<std::size_t>& subsystems) {
  checked_dims_product(dims, m.rows());
  for (std::size_t s : subsystems) {
    if (s >= dims.size()) throw ArgumentError("partial_transpose: subsystem index out of range");
  }
  std::vector<bool> flip(dims.size(), false);
  for (std::size_t s : subsystems) flip[s] = true;

  const auto strides = strides_of(dims);
  const Index d = m.rows();
  ComplexMatrix out(d, d);
  std::vector<Index> ri(dims.size()), ci(dims.size());
  for (Index r = 0; r < d; ++r) {
    Index rr = r;
    for (std::size_t s = 0; s < dims.size(); ++s) {
      ri[s] = rr / strides[s];
      rr %= strides[s];
    }
    for (Index c = 0; c < d; ++c) {
      Index cc = c;
      for (std::size_t s = 0; s < dims.size(); ++s) {
        ci[s] = cc / strides[s];
        cc %= strides[s];
      }
      Index sr = 0, sc = 0;
      for (std::size_t s = 0; s < dims.size(); ++s) {
        const Index a = flip[s] ? ci[s] : ri[s];
        const Index b = flip[s] ? ri[s] : ci[s];
        sr += a * strides[s];
        sc += b * strides[s];
      }
      out(r, c) = m(sr, sc);
    }
  }
  return out;
}

DensityMatrix dephase(const DensityMatrix& rho) {
  ComplexMatrix out = ComplexMatrix::Zero(rho.dim(), rho.dim());
  out.diagonal() = rho.matrix().diagonal().real().cast<Complex>();
  return DensityMatrix(std::move(out), rho.dims());
}

double von_neumann_entropy(const DensityMatrix& rho) {
  const RealVector ev = eigvalsh(rho.matrix());
  double s = 0.0;
  for (Index i = 0; i < ev.size(); ++i) {
    const double lambda = ev[i];
    if (lambda < 1e-12) continue;
    s -= lambda * std::log2(lambda);
  }
  return s;
}

DensityMatrix random_density(Index d, Index rank, RngStream& rng) {
  if (rank < 1 || rank > d) throw ArgumentError("random_density: rank out of range");
  ComplexMatrix g(d, rank);
  for (Index j = 0; j < rank; ++j) {
    for (Index i = 0; i < d; ++i) g(i, j) = rng.complex_gaussian();
  }
  ComplexMatrix m = g * g.adjoint();
  m = Complex(0.5) * (m + m.adjoint().eval());
  m /= m.trace().real();
  return DensityMatrix(std::move(m), {d});
}

ComplexMatrix random_unitary(Index d, RngStream& rng) {
  ComplexMatrix g(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) g(i, j) = rng.complex_gaussian();
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase convention so the distribution is Haar.
  for (Index j = 0; j < d; ++j) {
    const Complex rjj = r(j, j);
    const double mag = std::abs(rjj);
    q.col(j) *= (mag > 0) ? rjj / mag : Complex(1.0);
  }
  return q;
}

}  // namespace flagcheck
