#include "fibersim/algebra.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace fibersim;

TEST_CASE("generate_algebra closes spans") {
  // {X}: X^2 = I, so span{I, X}, dim 2 (oracle: closure enumeration)
  const auto ax = generate_algebra({gates::pauli_x()}, 2);
  REQUIRE(ax.span_dim() == 2);
  REQUIRE(ax.contains(CMatrix::Identity(2, 2)));
  REQUIRE(ax.contains(gates::pauli_x()));
  REQUIRE_FALSE(ax.contains(gates::pauli_z()));

  // {X, Z}: XZ completes the Pauli basis (oracle: Gram rank 4)
  const auto axz = generate_algebra({gates::pauli_x(), gates::pauli_z()}, 2);
  REQUIRE(axz.span_dim() == 4);

  // no generators: scalars
  const auto scalars = generate_algebra({}, 3);
  REQUIRE(scalars.span_dim() == 1);
}

TEST_CASE("commutant closed forms") {
  // commutant of M_2 is the scalars
  REQUIRE(full_matrix_algebra(2).commutant().span_dim() == 1);

  // diagonal 2x2 algebra is its own commutant (oracle: 4-unknown linear system)
  const auto diag = generate_algebra({CMatrix(gates::pauli_z())}, 2);
  const auto diag_comm = diag.commutant();
  REQUIRE(diag_comm.span_dim() == 2);
  REQUIRE(diag_comm.same_span(diag));

  // commutant of the scalars is everything
  const auto scalars = generate_algebra({}, 3);
  REQUIRE(scalars.commutant().span_dim() == 9);
}

TEST_CASE("double commutant and von Neumann property") {
  Rng rng(23);
  for (long d : {2L, 3L, 4L}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto alg = generate_algebra({rng.ginibre(d, d)}, d);
      REQUIRE(alg.is_von_neumann());
      REQUIRE(alg.commutant().commutant().same_span(alg));
    }
  }
  const auto ix = MatrixStarAlgebra::from_span(
      {CMatrix::Identity(2, 2), gates::pauli_x()}, 2);
  REQUIRE(ix.is_von_neumann());
}

TEST_CASE("from_span rejects non-closed spans") {
  // span{I, |0><1|} is not *-closed
  CMatrix e01 = CMatrix::Zero(2, 2);
  e01(0, 1) = 1;
  REQUIRE_THROWS_AS(MatrixStarAlgebra::from_span({CMatrix::Identity(2, 2), e01}, 2),
                    std::invalid_argument);
}

TEST_CASE("commutant is inclusion reversing and A''' = A'") {
  Rng rng(29);
  const CMatrix g = rng.ginibre(4, 4);
  const CMatrix h = rng.ginibre(4, 4);
  const auto small = generate_algebra({g}, 4);
  const auto big = generate_algebra({g, h}, 4);
  // small subset big: every commutant element of big commutes with small
  const auto cb = big.commutant();
  const auto cs = small.commutant();
  for (const auto& b : cb.basis()) REQUIRE(cs.residual(b) < 1e-8);

  const auto c1 = small.commutant();
  REQUIRE(c1.commutant().commutant().same_span(c1));
}

TEST_CASE("in_check_A certificate") {
  const auto m2 = full_matrix_algebra(2);

  const auto vx = in_check_A(gates::pauli_x(), m2);
  REQUIRE(vx.member);
  REQUIRE(vx.min_eig_a_star_a == Catch::Approx(1.0).margin(1e-10));

  const auto vp = in_check_A(projector(gates::basis_vector(2, 0)), m2);
  REQUIRE_FALSE(vp.member);
  REQUIRE(vp.kernel_witness.has_value());
  // the kernel witness vanishes under the operator
  const UnnormalizedState witness(projector(*vp.kernel_witness));
  REQUIRE_FALSE(conj_act(projector(gates::basis_vector(2, 0)), witness).has_value());

  CMatrix d(2, 2);
  d << 1, 0, 0, 0.5;
  const auto vd = in_check_A(d, m2);
  REQUIRE(vd.member);
  REQUIRE(vd.min_eig_a_star_a == Catch::Approx(0.25).margin(1e-10));

  REQUIRE_THROWS_AS(in_check_A(gates::pauli_x(),
                               generate_algebra({CMatrix(gates::pauli_z())}, 2)),
                    std::invalid_argument);
}

TEST_CASE("in_check_A agrees with the brute-force kernel probe") {
  // Criterion-level property at test scale; the acceptance binary repeats it
  // with the full 200-sample budget.
  Rng rng(31);
  const auto m4 = full_matrix_algebra(4);
  for (int trial = 0; trial < 60; ++trial) {
    CMatrix a = rng.ginibre(4, 4);
    if (trial % 2 == 0) {
      // deliberately singular: project a column onto the span of the others
      a.col(3) = a.col(0) * Complex(0.3, 0.1) + a.col(1) * Complex(-1.0, 0.2);
    }
    const auto v = in_check_A(a, m4);
    // brute force: a is singular iff some kernel-basis projector vanishes
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
    bool singular = false;
    for (long i = 0; i < 4; ++i)
      if (svd.singularValues()(i) < 1e-7 * svd.singularValues()(0)) {
        const UnnormalizedState probe(projector(svd.matrixV().col(i)));
        if (!conj_act(a, probe).has_value()) singular = true;
      }
    REQUIRE(v.member == !singular);
  }
}

TEST_CASE("check-A membership is self-adjoint") {
  Rng rng(37);
  for (long d : {2L, 4L, 8L}) {
    const auto full = full_matrix_algebra(d);
    for (int trial = 0; trial < 40; ++trial) {
      CMatrix a = rng.ginibre(d, d);
      if (trial % 3 == 0) a.col(0).setZero();
      const auto va = in_check_A(a, full);
      const auto vastar = in_check_A(CMatrix(a.adjoint()), full);
      REQUIRE(va.member == vastar.member);
    }
  }
}

TEST_CASE("regular subgroup check") {
  const auto m2 = full_matrix_algebra(2);
  const auto paulis = GateSet::of({{"I", CMatrix::Identity(2, 2)},
                                   {"X", gates::pauli_x()},
                                   {"Y", gates::pauli_y()},
                                   {"Z", gates::pauli_z()}});
  REQUIRE(regular_subgroup_check(paulis, m2).passes());

  const auto with_singular = GateSet::of(
      {{"I", CMatrix::Identity(2, 2)}, {"P0", projector(gates::basis_vector(2, 0))}});
  const auto bad = regular_subgroup_check(with_singular, m2);
  REQUIRE_FALSE(bad.passes());
  REQUIRE_FALSE(bad.all_invertible);

  // {X} alone: closure extends the set, noted rather than failed
  const auto just_x = regular_subgroup_check(GateSet::of({{"X", gates::pauli_x()}}), m2);
  REQUIRE_FALSE(just_x.identity_in_set);
  REQUIRE_FALSE(just_x.notes.empty());
}

TEST_CASE("orbit closures") {
  const DensityOperator rho0 = DensityOperator::pure(gates::basis_vector(2, 0));

  REQUIRE(orbit(rho0, GateSet::of({{"I", CMatrix::Identity(2, 2)}}), 4).size() == 1);

  const auto two = orbit(rho0, GateSet::of({{"X", gates::pauli_x()}}), 4);
  REQUIRE(two.size() == 2);

  const auto had = orbit(rho0, GateSet::of({{"H", gates::hadamard()}}), 2);
  REQUIRE(had.size() == 2);  // H^2 = I: {|0><0|, |+><+|}
  bool saw_plus = false;
  for (const auto& s : had)
    if (trace_distance(s.matrix(), projector(gates::plus_state())) < 1e-9) saw_plus = true;
  REQUIRE(saw_plus);
}

TEST_CASE("orbit depth monotonicity and gate admissibility") {
  const DensityOperator rho0 = DensityOperator::pure(gates::basis_vector(2, 0));
  const auto gates_ht = GateSet::of({{"H", gates::hadamard()}, {"T", gates::t_gate()}});
  const auto shallow = orbit(rho0, gates_ht, 3);
  const auto deep = orbit(rho0, gates_ht, 5);
  REQUIRE(deep.size() >= shallow.size());
  for (const auto& s : shallow) {
    bool found = false;
    for (const auto& d : deep)
      if (trace_distance(s.matrix(), d.matrix()) < 1e-9) found = true;
    REQUIRE(found);
  }

  const auto m2 = full_matrix_algebra(2);
  const auto with_projector =
      GateSet::of({{"P0", projector(gates::basis_vector(2, 0))}});
  REQUIRE_THROWS_AS(orbit(rho0, with_projector, 2, 1e-9, &m2), std::invalid_argument);
}

TEST_CASE("universality probe") {
  // {X} reaches only two basis states; Haar targets are essentially never hit
  const auto only_x = universality_probe(GateSet::of({{"X", gates::pauli_x()}}), 2,
                                         100, 10, 0.01, 5);
  REQUIRE(only_x.orbit_states == 2);
  REQUIRE(only_x.reachable_fraction() <= 0.05);

  // {H, T} is dense in the single-qubit unitaries
  const auto ht = universality_probe(
      GateSet::of({{"H", gates::hadamard()}, {"T", gates::t_gate()}}), 2, 100, 20, 0.05, 5);
  REQUIRE(ht.reachable_fraction() >= 0.95);

  const auto empty = universality_probe(GateSet{}, 2, 50, 5, 0.01, 5);
  REQUIRE(empty.reached <= 1);
}

TEST_CASE("gate set JSON round-trip") {
  const auto s = GateSet::of({{"H", gates::hadamard()}, {"T", gates::t_gate()}});
  const GateSet back = gateset_from_json(gateset_to_json(s));
  REQUIRE(back.gates.size() == 2);
  REQUIRE(back.gates[0].name == "H");
  REQUIRE(max_norm(back.gates[1].matrix - gates::t_gate()) == 0.0);
}
