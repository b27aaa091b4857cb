#include <doctest.h>

#include <cmath>

#include "flagcheck/errors.hpp"
#include "flagcheck/flags.hpp"
#include "flagcheck/generators.hpp"
#include "flagcheck/measures.hpp"
#include "flagcheck/rng.hpp"
#include "flagcheck/state.hpp"
#include "oracles.hpp"

using namespace flagcheck;

namespace {

DensityMatrix plus_state() {
  ComplexVector v = ComplexVector::Constant(2, 1.0 / std::sqrt(2.0));
  return PureState(v, {2}).projector();
}

DensityMatrix maximally_coherent(Index d) {
  ComplexVector v = ComplexVector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  return PureState(v, {d}).projector();
}

DensityMatrix bell_state() {
  ComplexVector v = ComplexVector::Zero(4);
  v[0] = 1.0 / std::sqrt(2.0);
  v[3] = 1.0 / std::sqrt(2.0);
  return PureState(v, {2, 2}).projector();
}

SolverReport solve_ctr(const DensityMatrix& rho, std::uint64_t seed = 0,
                       SolverOptions opts = {}) {
  RngStream rng(seed);
  return c_tr(rho, opts, rng);
}

}  // namespace

TEST_CASE("c_l1 on canonical states") {
  CHECK(c_l1(plus_state()) == doctest::Approx(1.0).epsilon(1e-12));
  for (Index d : {2, 3, 5}) {
    CHECK(c_l1(maximally_coherent(d)) ==
          doctest::Approx(static_cast<double>(d - 1)).epsilon(1e-11));
  }
}

TEST_CASE("c_l1 matches the brute-force double loop") {
  RngStream rng(3);
  const DensityMatrix rho = random_density(3, 3, rng);
  double expected = 0.0;
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 3; ++j) {
      if (i != j) expected += std::hypot(rho.matrix()(i, j).real(), rho.matrix()(i, j).imag());
    }
  }
  CHECK(c_l1(rho) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("c_l1 multiplicativity identity") {
  RngStream rng(5);
  for (int t = 0; t < 50; ++t) {
    const DensityMatrix rho = random_density(2 + static_cast<Index>(rng.below(2)), 2, rng);
    const DensityMatrix sigma = random_density(2 + static_cast<Index>(rng.below(2)), 2, rng);
    const double lhs = 1.0 + c_l1(tensor(rho, sigma));
    const double rhs = (1.0 + c_l1(rho)) * (1.0 + c_l1(sigma));
    CHECK(std::abs(lhs - rhs) <= 1e-9);
  }
}

TEST_CASE("c_rel_ent on canonical states") {
  CHECK(c_rel_ent(plus_state()) == doctest::Approx(1.0).epsilon(1e-12));
  DensityMatrix mixed(ComplexMatrix::Identity(4, 4) / 4.0, {4});
  CHECK(c_rel_ent(mixed) == doctest::Approx(0.0));
}

TEST_CASE("c_rel_ent against the closed-form two-level oracle") {
  // rho = (|+><+| + |0><0|) / 2 = [[3/4, 1/4], [1/4, 1/4]]
  ComplexMatrix m(2, 2);
  m << 0.75, 0.25, 0.25, 0.25;
  const DensityMatrix rho(m, {2});
  const auto [hi, lo] = oracle::eig2(0.75, Complex(0.25, 0.0), 0.25);
  auto plogp = [](double x) { return x > 1e-12 ? -x * std::log2(x) : 0.0; };
  const double s_rho = plogp(hi) + plogp(lo);
  const double s_diag = plogp(0.75) + plogp(0.25);
  CHECK(c_rel_ent(rho) == doctest::Approx(s_diag - s_rho).epsilon(1e-12));
}

TEST_CASE("c_rel_ent is nonnegative and zero exactly on incoherent states") {
  RngStream rng(7);
  for (int t = 0; t < 25; ++t) {
    const DensityMatrix rho = random_density(4, 4, rng);
    CHECK(c_rel_ent(rho) >= -1e-9);
    CHECK(c_rel_ent(dephase(rho)) <= 1e-9);
  }
}

TEST_CASE("c_tr vanishes on incoherent states") {
  RngStream rng(9);
  const DensityMatrix diag = dephase(random_density(4, 4, rng));
  const SolverReport report = solve_ctr(diag);
  CHECK(report.converged);
  CHECK(report.value <= 1e-9);
}

TEST_CASE("c_tr of the plus state matches the interval grid") {
  const SolverReport report = solve_ctr(plus_state());
  CHECK(report.converged);
  CHECK(report.gap_estimate <= 1e-7);
  const double grid = oracle::ctr_grid_qubit(plus_state().matrix(), 1e-5);
  CHECK(report.value == doctest::Approx(grid).epsilon(1e-6));
  CHECK(report.value == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("c_tr on a random qutrit matches the simplex grid") {
  RngStream rng(11);
  const DensityMatrix rho = random_density(3, 3, rng);
  const SolverReport report = solve_ctr(rho);
  CHECK(report.converged);
  const double grid = oracle::ctr_grid_qutrit(rho.matrix(), 1e-3);
  CHECK(std::abs(report.value - grid) <= 2e-3);
  CHECK(report.value <= grid + 1e-9);  // solver must not sit above the scan
}

TEST_CASE("c_tr equals c_l1 on qubits within twice the solver tolerance") {
  RngStream rng(13);
  for (int t = 0; t < 1000; ++t) {
    const DensityMatrix rho = random_density(2, 2, rng);
    const SolverReport report = solve_ctr(rho, static_cast<std::uint64_t>(t));
    CHECK(report.converged);
    CHECK(std::abs(report.value - c_l1(rho)) <= 2e-7);
  }
}

TEST_CASE("c_tr respects the dimension capability") {
  RngStream rng(15);
  DensityMatrix big(random_density(32, 32, rng).matrix(), {32});
  CHECK_THROWS_AS(solve_ctr(big), CapabilityError);
}

TEST_CASE("negativity of the Bell state is one half") {
  CHECK(negativity_cut(bell_state(), 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("negativity vanishes on product and separable states") {
  RngStream rng(17);
  const DensityMatrix prod = tensor(random_density(2, 2, rng), random_density(2, 2, rng));
  CHECK(negativity_cut(prod, 1) <= 1e-12);
  for (int t = 0; t < 20; ++t) {
    const DensityMatrix sep = random_free_state(Theory::entanglement, {2, 2}, rng);
    CHECK(negativity_cut(sep, 1) <= 1e-10);
  }
}

TEST_CASE("negativity is invariant under B-side flags") {
  RngStream rng(19);
  for (int t = 0; t < 100; ++t) {
    const DensityMatrix rho = random_resourceful_state(Theory::entanglement, rng);
    const FlagBasis basis = computational_flag_basis(Theory::entanglement, 1, {2});
    const DensityMatrix flagged = tensor(rho, basis.vectors()[0].projector());
    const double direct = negativity_cut(rho, 1);
    const double with_flag = negativity(flagged, {1, 2});
    CHECK(std::abs(direct - with_flag) <= 1e-11);
  }
}

TEST_CASE("negativity rejects bad bipartitions") {
  RngStream rng(21);
  const DensityMatrix rho = random_density(4, 4, rng);  // single subsystem
  CHECK_THROWS_AS(negativity_cut(rho, 1), ArgumentError);
}

TEST_CASE("eof_2q on canonical states") {
  CHECK(eof_2q(bell_state()) == doctest::Approx(1.0).epsilon(1e-10));
  RngStream rng(23);
  const DensityMatrix prod = tensor(random_density(2, 1, rng), random_density(2, 1, rng));
  CHECK(eof_2q(prod) <= 1e-7);
}

TEST_CASE("eof_2q matches the independent spin-flip spectrum on a noisy Bell mixture") {
  ComplexMatrix m = 0.9 * bell_state().matrix() + 0.1 * ComplexMatrix::Identity(4, 4) / 4.0;
  const DensityMatrix rho(m, {2, 2});

  // Spin flip: yy * conj(rho) * yy with yy the antidiagonal {-1, 1, 1, -1}.
  ComplexMatrix yy = ComplexMatrix::Zero(4, 4);
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const ComplexMatrix flipped = yy * m.conjugate() * yy;
  REQUIRE((flipped - m).cwiseAbs().maxCoeff() < 1e-14);  // Bell-diagonal fixed point
  // rho rho~ = rho^2, so the Wootters lambdas are the eigenvalues of rho.
  const auto lambdas = oracle::jacobi_eigenvalues(m);
  const double concurrence =
      std::max(0.0, lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]);
  const double x = 0.5 * (1.0 + std::sqrt(1.0 - concurrence * concurrence));
  auto plogp = [](double v) { return (v > 0.0 && v < 1.0) ? -v * std::log2(v) : 0.0; };
  const double expected = plogp(x) + plogp(1.0 - x);
  CHECK(eof_2q(rho) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(concurrence == doctest::Approx(0.85).epsilon(1e-10));
}

TEST_CASE("eof_2q rejects shapes other than two qubits") {
  RngStream rng(25);
  DensityMatrix wrong(random_density(4, 4, rng).matrix(), {4});
  CHECK_THROWS_AS(eof_2q(wrong), CapabilityError);
  DensityMatrix flagged(tensor(random_density(4, 4, rng), basis_state(2, 0).projector()));
  CHECK_THROWS_AS(eof_2q(flagged), CapabilityError);
}

TEST_CASE("evaluate dispatches and enforces capabilities") {
  RngStream rng(27);
  const DensityMatrix diag = dephase(random_density(3, 3, rng));
  CHECK(evaluate(descriptor("c_l1"), diag).value <= 1e-12);

  const DensityMatrix sep = random_free_state(Theory::entanglement, {2, 2}, rng);
  CHECK(evaluate(descriptor("negativity"), sep).value <= 1e-10);

  // eof_2q cannot evaluate flagged shapes.
  const DensityMatrix flagged =
      tensor(random_resourceful_state(Theory::entanglement, rng), basis_state(2, 0).projector());
  CHECK_THROWS_AS(evaluate(descriptor("eof_2q"), flagged), CapabilityError);

  // c_tr past its capability dimension.
  DensityMatrix big(random_density(17, 17, rng).matrix(), {17});
  CHECK_THROWS_AS(evaluate(descriptor("c_tr"), big), CapabilityError);
}

TEST_CASE("evaluate of c_tr is deterministic per (state, seed)") {
  RngStream rng(29);
  const DensityMatrix rho = random_density(3, 3, rng);
  EvalContext ctx;
  ctx.solver_seed = 99;
  const SolverReport a = evaluate(descriptor("c_tr"), rho, ctx);
  const SolverReport b = evaluate(descriptor("c_tr"), rho, ctx);
  CHECK(a.value == b.value);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("free padding leaves measures unchanged") {
  RngStream rng(31);
  EvalContext ctx;
  for (const char* name : {"c_l1", "c_rel_ent", "c_tr"}) {
    const MeasureDescriptor& desc = descriptor(name);
    const DensityMatrix rho = random_density(3, 3, rng);
    const DensityMatrix delta = random_free_state(Theory::coherence, {2}, rng);
    const double bare = evaluate(desc, rho, ctx).value;
    const double padded = evaluate(desc, tensor(rho, delta), ctx).value;
    CHECK(std::abs(bare - padded) <= 1e-6);
  }
}

TEST_CASE("measure descriptors carry the published capability metadata") {
  CHECK(descriptor("eof_2q").max_dim == 4);
  CHECK_FALSE(descriptor("eof_2q").supports_flagged_eval);
  CHECK_FALSE(descriptor("c_tr").known_flag_additive);
  CHECK(descriptor("c_l1").known_flag_additive);
  CHECK(descriptor("c_rel_ent").known_flag_additive);
  CHECK(descriptor("negativity").known_flag_additive);
  CHECK(all_measures().size() == 5);
  CHECK_THROWS_AS(descriptor("nope"), ArgumentError);
}
