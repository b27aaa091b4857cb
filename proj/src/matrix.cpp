#include "flagcheck/matrix.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "flagcheck/errors.hpp"

namespace flagcheck {

bool all_finite(const ComplexMatrix& a) {
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      const Complex& z = a(i, j);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
  }
  return true;
}

double hermiticity_defect(const ComplexMatrix& a) {
  double worst = 0.0;
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i <= j; ++i) {
      worst = std::max(worst, std::abs(a(i, j) - std::conj(a(j, i))));
    }
  }
  return worst;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ArgumentError("max_abs_diff: shape mismatch");
  }
  return (a - b).cwiseAbs().maxCoeff();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

namespace {

// Connected components of the nonzero pattern (exact zeros only, so block
// structure written by flag constructions is found without thresholding).
std::vector<std::vector<Index>> nonzero_components(const ComplexMatrix& h) {
  const Index n = h.rows();
  std::vector<Index> parent(n);
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[b] = a;
  };
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      if (h(i, j) != Complex{0.0, 0.0} || h(j, i) != Complex{0.0, 0.0}) unite(i, j);
    }
  }
  std::vector<std::vector<Index>> groups;
  std::vector<Index> group_of(n, -1);
  for (Index i = 0; i < n; ++i) {
    const Index root = find(i);
    if (group_of[root] < 0) {
      group_of[root] = static_cast<Index>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(group_of[root])].push_back(i);
  }
  return groups;
}

void check_hermitian_input(const ComplexMatrix& h, const char* who) {
  if (h.rows() != h.cols()) throw ArgumentError(std::string(who) + ": matrix not square");
  if (!all_finite(h)) throw ArgumentError(std::string(who) + ": non-finite entries");
  if (hermiticity_defect(h) > kHermitianTol) {
    throw ArgumentError(std::string(who) + ": input is not Hermitian within 1e-12");
  }
}

}  // namespace

Eigensystem eigh(const ComplexMatrix& h) {
  check_hermitian_input(h, "eigh");
  const Index n = h.rows();
  const auto groups = nonzero_components(h);

  RealVector values(n);
  ComplexMatrix vectors = ComplexMatrix::Zero(n, n);
  Index filled = 0;
  for (const auto& idx : groups) {
    const Index m = static_cast<Index>(idx.size());
    ComplexMatrix block(m, m);
    for (Index a = 0; a < m; ++a) {
      for (Index b = 0; b < m; ++b) block(a, b) = h(idx[a], idx[b]);
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(block);
    if (solver.info() != Eigen::Success) throw ArgumentError("eigh: eigensolver failed");
    for (Index k = 0; k < m; ++k) {
      values[filled + k] = solver.eigenvalues()[k];
      for (Index a = 0; a < m; ++a) {
        vectors(idx[a], filled + k) = solver.eigenvectors()(a, k);
      }
    }
    filled += m;
  }

  // Sort descending, carrying the eigenvector columns along.
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return values[a] > values[b]; });
  Eigensystem out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    out.values[k] = values[order[k]];
    out.vectors.col(k) = vectors.col(order[k]);
  }
  return out;
}

RealVector eigvalsh(const ComplexMatrix& h) {
  check_hermitian_input(h, "eigvalsh");
  const Index n = h.rows();
  const auto groups = nonzero_components(h);

  RealVector values(n);
  Index filled = 0;
  for (const auto& idx : groups) {
    const Index m = static_cast<Index>(idx.size());
    ComplexMatrix block(m, m);
    for (Index a = 0; a < m; ++a) {
      for (Index b = 0; b < m; ++b) block(a, b) = h(idx[a], idx[b]);
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(block, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw ArgumentError("eigvalsh: eigensolver failed");
    values.segment(filled, m) = solver.eigenvalues();
    filled += m;
  }
  std::sort(values.data(), values.data() + n, std::greater<double>());
  return values;
}

double trace_norm(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw ArgumentError("trace_norm: matrix not square");
  if (!all_finite(a)) throw ArgumentError("trace_norm: non-finite entries");
  if (is_hermitian(a)) {
    return eigvalsh(a).cwiseAbs().sum();
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues().sum();
}

}  // namespace flagcheck
