#include <doctest.h>

#include <cmath>

#include "flagcheck/errors.hpp"
#include "flagcheck/matrix.hpp"
#include "flagcheck/rng.hpp"
#include "flagcheck/state.hpp"
#include "oracles.hpp"

using namespace flagcheck;

namespace {

DensityMatrix bell_state() {
  ComplexVector v = ComplexVector::Zero(4);
  v[0] = 1.0 / std::sqrt(2.0);
  v[3] = 1.0 / std::sqrt(2.0);
  return PureState(v, {2, 2}).projector();
}

DensityMatrix plus_state() {
  ComplexVector v = ComplexVector::Constant(2, 1.0 / std::sqrt(2.0));
  return PureState(v, {2}).projector();
}

}  // namespace

TEST_CASE("tensor of basis projectors places the single entry") {
  const DensityMatrix a = basis_state(2, 0).projector();
  const DensityMatrix b = basis_state(2, 1).projector();
  const DensityMatrix ab = tensor(a, b);
  CHECK(ab.dims() == std::vector<Index>{2, 2});
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 4; ++j) {
      CHECK(std::abs(ab.matrix()(i, j) - ((i == 1 && j == 1) ? 1.0 : 0.0)) < 1e-15);
    }
  }
}

TEST_CASE("tensor preserves unit trace") {
  RngStream rng(7);
  const DensityMatrix rho = random_density(3, 3, rng);
  DensityMatrix eye(ComplexMatrix::Identity(4, 4) / 4.0, {4});
  const DensityMatrix prod = tensor(rho, eye);
  CHECK(std::abs(prod.matrix().trace().real() - 1.0) < 1e-12);
}

TEST_CASE("tensor spectra multiply pairwise") {
  RngStream rng(11);
  const DensityMatrix a = random_density(2, 2, rng);
  const DensityMatrix b = random_density(2, 2, rng);
  const auto ea = oracle::jacobi_eigenvalues(a.matrix());
  const auto eb = oracle::jacobi_eigenvalues(b.matrix());
  std::vector<double> products;
  for (double x : ea) {
    for (double y : eb) products.push_back(x * y);
  }
  std::sort(products.begin(), products.end(), std::greater<double>());
  const RealVector actual = eigvalsh(tensor(a, b).matrix());
  for (Index i = 0; i < 4; ++i) {
    CHECK(actual[i] == doctest::Approx(products[static_cast<std::size_t>(i)]).epsilon(1e-10));
  }
}

TEST_CASE("tensor past the dimension cap is a capacity error") {
  const Index saved = dimension_cap();
  set_dimension_cap(8);
  RngStream rng(3);
  const DensityMatrix rho = random_density(3, 3, rng);
  CHECK_THROWS_AS(tensor(rho, rho), CapacityError);
  set_dimension_cap(saved);
}

TEST_CASE("partial trace of a product recovers the factor") {
  RngStream rng(5);
  const DensityMatrix rho = random_density(3, 2, rng);
  const DensityMatrix delta = random_density(2, 2, rng);
  const DensityMatrix back = partial_trace(tensor(rho, delta), {0});
  CHECK(max_abs_diff(back.matrix(), rho.matrix()) < 1e-12);
}

TEST_CASE("Bell state marginal is maximally mixed") {
  const DensityMatrix reduced = partial_trace(bell_state(), {0});
  CHECK(max_abs_diff(reduced.matrix(), ComplexMatrix::Identity(2, 2) / 2.0) < 1e-12);
}

TEST_CASE("partial trace agrees with the direct-summation oracle") {
  RngStream rng(13);
  DensityMatrix joint = random_density(9, 9, rng);
  joint = DensityMatrix(joint.matrix(), {3, 3});
  const DensityMatrix kept = partial_trace(joint, {1});
  const ComplexMatrix expected = oracle::direct_partial_trace(joint.matrix(), 3, 3, false);
  CHECK(max_abs_diff(kept.matrix(), expected) < 1e-13);
  CHECK(std::abs(kept.matrix().trace().real() - 1.0) < 1e-12);
}

TEST_CASE("partial trace rejects bad subsystem sets") {
  RngStream rng(541);
  DensityMatrix joint(random_density(4, 4, rng).matrix(), {2, 2});
  CHECK_THROWS_AS(partial_trace(joint, {2}), ArgumentError);
  CHECK_THROWS_AS(partial_trace(joint, {}), ArgumentError);
}

TEST_CASE("partial transpose of a product state stays positive") {
  RngStream rng(17);
  const DensityMatrix prod = tensor(random_density(2, 2, rng), random_density(2, 2, rng));
  const ComplexMatrix pt = partial_transpose(prod, 1);
  const auto spectrum = oracle::jacobi_eigenvalues(pt);
  CHECK(spectrum.back() > -1e-12);
}

TEST_CASE("Bell partial transpose has spectrum {-1/2, 1/2, 1/2, 1/2}") {
  const ComplexMatrix pt = partial_transpose(bell_state(), 1);
  const auto spectrum = oracle::jacobi_eigenvalues(pt);
  CHECK(spectrum[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(spectrum[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(spectrum[2] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(spectrum[3] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("partial transpose is an involution and preserves trace and Hermiticity") {
  RngStream rng(19);
  DensityMatrix joint(random_density(6, 6, rng).matrix(), {2, 3});
  const ComplexMatrix once = partial_transpose(joint, 1);
  CHECK(hermiticity_defect(once) < 1e-12);
  CHECK(std::abs(once.trace().real() - 1.0) < 1e-12);
  const ComplexMatrix twice = partial_transpose(once, joint.dims(), {1});
  CHECK(max_abs_diff(twice, joint.matrix()) == 0.0);
}

TEST_CASE("eigh on a diagonal matrix returns it sorted descending") {
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d(0, 0) = 0.2;
  d(1, 1) = 0.5;
  d(2, 2) = 0.3;
  const Eigensystem es = eigh(d);
  CHECK(es.values[0] == doctest::Approx(0.5));
  CHECK(es.values[1] == doctest::Approx(0.3));
  CHECK(es.values[2] == doctest::Approx(0.2));
}

TEST_CASE("eigh of Pauli-X gives +1 and -1") {
  ComplexMatrix x = ComplexMatrix::Zero(2, 2);
  x(0, 1) = 1.0;
  x(1, 0) = 1.0;
  const Eigensystem es = eigh(x);
  CHECK(es.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(es.values[1] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("eigh reconstructs a random 8x8 Hermitian matrix") {
  RngStream rng(23);
  ComplexMatrix g(8, 8);
  for (Index j = 0; j < 8; ++j) {
    for (Index i = 0; i < 8; ++i) g(i, j) = rng.complex_gaussian();
  }
  const ComplexMatrix h = (g + g.adjoint()) / 2.0;
  const Eigensystem es = eigh(h);
  const ComplexMatrix rebuilt =
      es.vectors * es.values.asDiagonal().toDenseMatrix().cast<Complex>() * es.vectors.adjoint();
  CHECK(max_abs_diff(rebuilt, h) < 1e-10);
  CHECK(max_abs_diff(es.vectors.adjoint() * es.vectors, ComplexMatrix::Identity(8, 8)) < 1e-10);
}

TEST_CASE("eigh rejects non-Hermitian input") {
  ComplexMatrix bad = ComplexMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(eigh(bad), ArgumentError);
}

TEST_CASE("eigh block splitting matches the dense oracle") {
  RngStream rng(29);
  // Exact-zero cross blocks, as flagged states produce.
  ComplexMatrix blocks = ComplexMatrix::Zero(5, 5);
  ComplexMatrix g(3, 3);
  for (Index j = 0; j < 3; ++j) {
    for (Index i = 0; i < 3; ++i) g(i, j) = rng.complex_gaussian();
  }
  blocks.topLeftCorner(3, 3) = (g + g.adjoint()) / 2.0;
  ComplexMatrix h(2, 2);
  h(0, 0) = 0.3;
  h(1, 1) = -0.7;
  h(0, 1) = Complex(0.1, 0.2);
  h(1, 0) = std::conj(h(0, 1));
  blocks.bottomRightCorner(2, 2) = h;
  const RealVector values = eigvalsh(blocks);
  const auto expected = oracle::jacobi_eigenvalues(blocks);
  for (Index i = 0; i < 5; ++i) {
    CHECK(values[i] == doctest::Approx(expected[static_cast<std::size_t>(i)]).epsilon(1e-11));
  }
}

TEST_CASE("trace norm basics") {
  RngStream rng(31);
  const DensityMatrix rho = random_density(4, 4, rng);
  CHECK(trace_norm(rho.matrix()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(trace_norm(rho.matrix() - rho.matrix()) == doctest::Approx(0.0));
  CHECK(trace_norm(partial_transpose(bell_state(), 1)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("trace norm of rho minus sigma vanishes only for equal states") {
  RngStream rng(37);
  const DensityMatrix rho = random_density(3, 3, rng);
  const DensityMatrix sigma = random_density(3, 3, rng);
  CHECK(trace_norm(rho.matrix() - sigma.matrix()) > 1e-3);
  CHECK(trace_norm(rho.matrix() - rho.matrix()) < 1e-12);
}

TEST_CASE("entropy of pure, maximally mixed and uniform qutrit states") {
  RngStream rng(41);
  CHECK(von_neumann_entropy(random_density(5, 1, rng)) < 1e-9);
  DensityMatrix half(ComplexMatrix::Identity(2, 2) / 2.0, {2});
  CHECK(von_neumann_entropy(half) == doctest::Approx(1.0).epsilon(1e-12));
  DensityMatrix third(ComplexMatrix::Identity(3, 3) / 3.0, {3});
  CHECK(von_neumann_entropy(third) == doctest::Approx(std::log2(3.0)).epsilon(1e-12));
}

TEST_CASE("entropy is invariant under unitary conjugation") {
  RngStream rng(43);
  const DensityMatrix rho = random_density(4, 3, rng);
  const ComplexMatrix u = random_unitary(4, rng);
  ComplexMatrix rotated = u * rho.matrix() * u.adjoint();
  rotated = (rotated + rotated.adjoint()) / 2.0;
  rotated /= rotated.trace().real();
  const DensityMatrix sigma(rotated, {4});
  CHECK(std::abs(von_neumann_entropy(rho) - von_neumann_entropy(sigma)) < 1e-9);
}

TEST_CASE("dephase projects onto the incoherent set") {
  const DensityMatrix plus = plus_state();
  const DensityMatrix dephased = dephase(plus);
  CHECK(max_abs_diff(dephased.matrix(), ComplexMatrix::Identity(2, 2) / 2.0) < 1e-12);
  CHECK(max_abs_diff(dephase(dephased).matrix(), dephased.matrix()) == 0.0);
  RngStream rng(47);
  const DensityMatrix diag = dephase(random_density(4, 4, rng));
  CHECK(max_abs_diff(dephase(diag).matrix(), diag.matrix()) == 0.0);
}

TEST_CASE("random density states satisfy the state invariants") {
  RngStream rng(53);
  for (int i = 0; i < 50; ++i) {
    const Index d = 2 + static_cast<Index>(rng.below(5));
    const Index rank = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(d)));
    const DensityMatrix rho = random_density(d, rank, rng);
    CHECK(hermiticity_defect(rho.matrix()) <= 1e-12);
    CHECK(std::abs(rho.matrix().trace().real() - 1.0) <= 1e-12);
    CHECK(oracle::jacobi_eigenvalues(rho.matrix()).back() >= -1e-10);
  }
}

TEST_CASE("random density is deterministic per seed and pure at rank 1") {
  RngStream a(99), b(99);
  const DensityMatrix ra = random_density(4, 2, a);
  const DensityMatrix rb = random_density(4, 2, b);
  CHECK(max_abs_diff(ra.matrix(), rb.matrix()) == 0.0);
  RngStream c(101);
  CHECK(von_neumann_entropy(random_density(6, 1, c)) < 1e-9);
}

TEST_CASE("random density rank out of range") {
  RngStream rng(1);
  CHECK_THROWS_AS(random_density(3, 0, rng), ArgumentError);
  CHECK_THROWS_AS(random_density(3, 4, rng), ArgumentError);
}

TEST_CASE("mean purity matches an independently coded sampler") {
  // Reference sampler uses std::normal_distribution and mt19937, a different
  // Gaussian path from the library's Box-Muller stream.
  std::mt19937 eng(123);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double reference = 0.0;
  const int samples = 1000;
  for (int s = 0; s < samples; ++s) {
    ComplexMatrix g(4, 4);
    for (Index j = 0; j < 4; ++j) {
      for (Index i = 0; i < 4; ++i) g(i, j) = Complex(gauss(eng), gauss(eng));
    }
    ComplexMatrix m = g * g.adjoint();
    m /= m.trace().real();
    reference += (m * m).trace().real();
  }
  reference /= samples;

  RngStream rng(321);
  double ours = 0.0;
  for (int s = 0; s < samples; ++s) {
    const DensityMatrix rho = random_density(4, 4, rng);
    ours += (rho.matrix() * rho.matrix()).trace().real();
  }
  ours /= samples;
  CHECK(std::abs(ours - reference) < 0.01);
}

TEST_CASE("tensor then partial trace is the identity on states") {
  RngStream rng(59);
  for (int i = 0; i < 20; ++i) {
    const DensityMatrix rho = random_density(3, 3, rng);
    const DensityMatrix delta = random_density(2 + static_cast<Index>(rng.below(2)), 2, rng);
    const DensityMatrix back = partial_trace(tensor(rho, delta), {0});
    CHECK(max_abs_diff(back.matrix(), rho.matrix()) <= 1e-12);
  }
}

TEST_CASE("tensor_power handles the empty product") {
  RngStream rng(61);
  const DensityMatrix rho = random_density(2, 2, rng);
  const DensityMatrix none = tensor_power(rho, 0);
  CHECK(none.dim() == 1);
  CHECK(std::abs(none.matrix()(0, 0).real() - 1.0) < 1e-15);
  const DensityMatrix three = tensor_power(rho, 3);
  CHECK(three.dim() == 8);
  CHECK(three.dims().size() == 3);
}
