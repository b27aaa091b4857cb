#pragma once

#include <Eigen/Dense>
#include <complex>

namespace flagcheck {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kEigenResidualTol = 1e-10;

bool all_finite(const ComplexMatrix& a);

// max_ij |a_ij - conj(a_ji)|
double hermiticity_defect(const ComplexMatrix& a);

inline bool is_hermitian(const ComplexMatrix& a, double tol = kHermitianTol) {
  return a.rows() == a.cols() && hermiticity_defect(a) <= tol;
}

// Eigenvalues in descending order with matching eigenvector columns.
struct Eigensystem {
  RealVector values;
  ComplexMatrix vectors;
};

// Hermitian eigendecomposition. Rejects non-Hermitian input (tolerance 1e-12).
// Block-diagonal inputs (exact-zero cross blocks, as produced by flagged
// states) are split into connected components and solved per block.
Eigensystem eigh(const ComplexMatrix& h);

// Eigenvalues only, descending. Same splitting as eigh.
RealVector eigvalsh(const ComplexMatrix& h);

// Sum of singular values. Hermitian input takes the eigenvalue route.
double trace_norm(const ComplexMatrix& a);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// max_ij |a_ij - b_ij|; matrices must agree in shape.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace flagcheck
