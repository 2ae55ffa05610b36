#include "fibersim/polymer.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace fibersim;

namespace {

std::vector<UnitType> units_of(const std::string& s) {
  std::vector<UnitType> u;
  for (char c : s) u.push_back(c == 'A' ? UnitType::A : UnitType::B);
  return u;
}

/// Qubit chain with Z on-site and Z-type couplings; all couplings zero by
/// default.
PolymerSpec qubit_spec(const std::string& units) {
  PolymerSpec spec;
  spec.units = units_of(units);
  spec.h_local_a = gates::pauli_z();
  spec.h_local_b = gates::pauli_z();
  spec.h_int_a = gates::pauli_z();
  spec.h_int_b = gates::pauli_z();
  const std::size_t n = spec.units.size();
  spec.j_aa.assign(n, 0.0);
  spec.j_ab.assign(n, 0.0);
  spec.j_ba.assign(n, 0.0);
  spec.j_bb.assign(n, 0.0);
  spec.field.assign(n, 0.0);
  return spec;
}

CMatrix z_on(int site, const TensorShape& shape) {
  return op_on_sites(gates::pauli_z(), {site}, shape);
}

}  // namespace

TEST_CASE("link sets enumerate the chain") {
  const auto abab = link_sets(qubit_spec("ABAB"));
  REQUIRE(abab.label_a == std::vector<int>({0, 2}));
  REQUIRE(abab.label_b == std::vector<int>({1, 3}));
  REQUIRE(abab.link_ab == std::vector<int>({0, 2}));
  REQUIRE(abab.link_ba == std::vector<int>({1}));
  REQUIRE(abab.link_aa.empty());
  REQUIRE(abab.link_bb.empty());

  const auto aabb = link_sets(qubit_spec("AABB"));
  REQUIRE(aabb.link_aa == std::vector<int>({0}));
  REQUIRE(aabb.link_ab == std::vector<int>({1}));
  REQUIRE(aabb.link_bb == std::vector<int>({2}));
  REQUIRE(aabb.link_ba.empty());

  auto ring = qubit_spec("AAA");
  ring.ring = true;
  REQUIRE(link_sets(ring).link_aa == std::vector<int>({0, 1, 2}));
  REQUIRE(link_sets(qubit_spec("AAA")).link_aa == std::vector<int>({0, 1}));

  const auto single = link_sets(qubit_spec("A"));
  REQUIRE(single.label_a == std::vector<int>({0}));
  REQUIRE(single.link_aa.empty());
}

TEST_CASE("chain hamiltonian doubles hermitian link terms") {
  // J Z_1 Z_2 + h.c. = 2 J Z_1 Z_2 for the hermitian product
  auto spec = qubit_spec("AA");
  spec.j_aa = {1.0, 0.0};
  const CMatrix h = build_h_polymer(spec).matrix();
  REQUIRE(max_norm(h - 2.0 * tensor(gates::pauli_z(), gates::pauli_z())) < 1e-12);
}

TEST_CASE("chain hamiltonian field terms") {
  auto spec = qubit_spec("AA");
  spec.field = {1.0, 1.0};
  const TensorShape shape = spec.shape();
  REQUIRE(max_norm(build_h_polymer(spec).matrix() -
                   (z_on(0, shape) + z_on(1, shape))) < 1e-12);

  auto one = qubit_spec("A");
  one.field = {0.7};
  REQUIRE(max_norm(build_h_polymer(one).matrix() - 0.7 * CMatrix(gates::pauli_z())) < 1e-12);
}

TEST_CASE("ring closes the last link") {
  auto spec = qubit_spec("AAA");
  spec.ring = true;
  spec.j_aa = {1.0, 1.0, 1.0};
  const TensorShape shape = spec.shape();
  CMatrix expected = CMatrix::Zero(8, 8);
  expected += 2.0 * op_on_sites(tensor(gates::pauli_z(), gates::pauli_z()), {0, 1}, shape);
  expected += 2.0 * op_on_sites(tensor(gates::pauli_z(), gates::pauli_z()), {1, 2}, shape);
  expected += 2.0 * op_on_sites(tensor(gates::pauli_z(), gates::pauli_z()), {0, 2}, shape);
  REQUIRE(max_norm(build_h_polymer(spec).matrix() - expected) < 1e-12);
}

TEST_CASE("spec validation") {
  auto spec = qubit_spec("AB");
  spec.j_aa.pop_back();
  REQUIRE_THROWS_AS(build_h_polymer(spec), std::invalid_argument);

  auto nonherm = qubit_spec("AA");
  nonherm.h_local_a = CMatrix::Zero(2, 2);
  nonherm.h_local_a(0, 1) = 1.0;
  REQUIRE_THROWS_AS(build_h_polymer(nonherm), std::invalid_argument);

  PolymerSpec empty;
  REQUIRE_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("mixer") {
  const auto one = qubit_spec("A");
  REQUIRE(max_norm(build_h_mixer(one).matrix() + gates::pauli_x()) < 1e-14);

  const auto two = qubit_spec("AA");
  const HermitianOp mixer = build_h_mixer(two);
  const EigResult e = eig_hermitian(mixer);
  REQUIRE(e.eigenvalues(0) == Catch::Approx(-2.0).margin(1e-12));
  // ground state is the all-plus product
  const CVector plus2 = tensor(CVector(gates::plus_state()), CVector(gates::plus_state()));
  REQUIRE((mixer.matrix() * plus2 + 2.0 * plus2).norm() < 1e-12);

  auto qutrit = qubit_spec("A");
  qutrit.h_local_a = CMatrix::Identity(3, 3);
  qutrit.h_int_a = CMatrix::Identity(3, 3);
  REQUIRE_THROWS_AS(build_h_mixer(qutrit), std::invalid_argument);
}

TEST_CASE("noninteracting hamiltonian places local terms") {
  auto spec = qubit_spec("ABA");
  spec.h_local_b = gates::pauli_x();
  const TensorShape shape = spec.shape();
  const CMatrix expected = z_on(0, shape) +
                           op_on_sites(gates::pauli_x(), {1}, shape) + z_on(2, shape);
  REQUIRE(max_norm(build_h_noninteracting(spec).matrix() - expected) < 1e-12);
}

TEST_CASE("schedules") {
  REQUIRE(Schedule::linear()(0.25) == 0.25);
  const Schedule s = Schedule::smoothstep();
  REQUIRE(s(0.0) == 0.0);
  REQUIRE(s(1.0) == 1.0);
  REQUIRE(s(0.3) < s(0.7));

  const Schedule t = Schedule::table({{0.0, 0.0}, {0.5, 0.8}, {1.0, 1.0}});
  REQUIRE(t(0.25) == Catch::Approx(0.4).margin(1e-12));
  REQUIRE(t(0.75) == Catch::Approx(0.9).margin(1e-12));

  REQUIRE_THROWS_AS(Schedule::table({{0.1, 0.0}, {1.0, 1.0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(Schedule::table({{0.0, 0.0}, {0.5, 0.9}, {1.0, 0.8}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(Schedule::table({{0.0, 0.0}}), std::invalid_argument);
}

TEST_CASE("anneal starts in the mixer ground state") {
  auto spec = qubit_spec("ABA");
  spec.j_ab = {0.4, 0.0, 0.0};
  spec.j_ba = {0.0, 0.4, 0.0};
  const Trajectory traj = anneal(spec, Schedule::linear(), 0.0, 100);
  REQUIRE(traj.steps() == 1);
  REQUIRE(traj.energy[0] == Catch::Approx(-3.0).margin(1e-10));
  // all-plus product has zero entanglement across every cut
  for (double ee : traj.ee_cuts[0]) REQUIRE(std::abs(ee) < 1e-9);
  // local marginal at t = 0 is |+><+|
  const DensityOperator site0 = local_state(traj, 0, {0});
  REQUIRE(max_norm(site0.matrix() - projector(gates::plus_state())) < 1e-10);
}

TEST_CASE("anneal conserves norm and reaches the target ground state") {
  auto spec = qubit_spec("AB");
  spec.j_ab = {0.5, 0.0};
  spec.field = {0.6, -0.4};
  const Trajectory traj = anneal(spec, Schedule::linear(), 30.0, 600);
  REQUIRE(traj.steps() == 601);
  REQUIRE(traj.trace_drift <= 1e-9);

  const EigResult target = eig_hermitian(build_h_polymer(spec));
  const CVector gs = target.eigenvectors.col(0);
  const CVector final = traj.states.back() / traj.states.back().norm();
  const double fidelity = std::norm((gs.adjoint() * final)(0));
  REQUIRE(fidelity >= 0.9);
  REQUIRE(std::abs(traj.energy.back() - target.eigenvalues(0)) < 0.05);
}

TEST_CASE("evolve_general boundary conditions") {
  auto spec = qubit_spec("AB");
  spec.j_ab = {0.5, 0.0};
  spec.field = {1.0, 1.0};

  const ParameterTable good_j{{0.0, 1.0}, {{0.0, 0.0}, {0.5, 0.0}}};
  const ParameterTable good_h{{0.0, 1.0}, {{1.0, 1.0}, {1.0, 1.0}}};

  const ParameterTable hot_start{{0.0, 1.0}, {{0.1, 0.0}, {0.5, 0.0}}};
  REQUIRE_THROWS_AS(evolve_general(spec, hot_start, good_h, 1.0, 10), std::invalid_argument);

  const ParameterTable wrong_field{{0.0, 1.0}, {{0.5, 1.0}, {1.0, 1.0}}};
  REQUIRE_THROWS_AS(evolve_general(spec, good_j, wrong_field, 1.0, 10), std::invalid_argument);

  const ParameterTable short_target{{0.0, 1.0}, {{0.0, 0.0}, {0.3, 0.0}}};
  REQUIRE_THROWS_AS(evolve_general(spec, short_target, good_h, 1.0, 10), std::invalid_argument);

  const ParameterTable narrow{{0.0, 1.0}, {{0.0}, {0.5}}};
  REQUIRE_THROWS_AS(evolve_general(spec, narrow, good_h, 1.0, 10), std::invalid_argument);
}

TEST_CASE("evolve_general with zero couplings keeps a product eigenstate") {
  auto spec = qubit_spec("AA");
  spec.field = {1.0, 1.0};
  const ParameterTable j{{0.0, 1.0}, {{0.0, 0.0}, {0.0, 0.0}}};
  const ParameterTable h{{0.0, 1.0}, {{1.0, 1.0}, {1.0, 1.0}}};
  const Trajectory traj = evolve_general(spec, j, h, 2.0, 50);
  REQUIRE(traj.trace_drift <= 1e-9);
  // the initial product of Z ground states is a Hamiltonian eigenstate
  for (double e : traj.energy) REQUIRE(e == Catch::Approx(-2.0).margin(1e-9));
  for (const auto& cuts : traj.ee_cuts)
    for (double ee : cuts) REQUIRE(std::abs(ee) < 1e-9);
  REQUIRE(purity(local_state(traj, traj.steps() - 1, {0})) ==
          Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("evolve_general coupling ramp builds entanglement") {
  auto spec = qubit_spec("AB");
  spec.h_int_a = gates::pauli_x();
  spec.h_int_b = gates::pauli_x();
  spec.j_ab = {1.0, 0.0};
  spec.field = {1.0, 1.0};
  const ParameterTable j{{0.0, 1.0}, {{0.0, 0.0}, {1.0, 0.0}}};
  const ParameterTable h{{0.0, 1.0}, {{1.0, 1.0}, {1.0, 1.0}}};
  const Trajectory traj = evolve_general(spec, j, h, 3.0, 300);
  REQUIRE(traj.trace_drift <= 1e-9);
  REQUIRE(traj.ee_cuts.front()[0] < 1e-9);
  REQUIRE(traj.ee_cuts.back()[0] > 1e-3);
}

TEST_CASE("trajectory states are valid density operators") {
  auto spec = qubit_spec("AB");
  spec.j_ab = {0.3, 0.0};
  const Trajectory traj = anneal(spec, Schedule::smoothstep(), 2.0, 40);
  const DensityOperator rho = traj.state_at(traj.steps() - 1);
  REQUIRE(std::abs(rho.matrix().trace().real() - 1.0) < 1e-12);
  REQUIRE(is_pure(rho));
}

TEST_CASE("polymer config JSON") {
  const nlohmann::json j = {
      {"units", "ABAB"},
      {"local_ops", {{"HA", "Z"}, {"HB", "Z"}, {"HA_int", "X"}}},
      {"couplings", {{"J_AB", 0.5}, {"J_BA", {0.1, 0.2, 0.3, 0.4}}}},
      {"fields", {0.6, -0.4, 0.6, -0.4}},
  };
  const PolymerSpec spec = polymer_spec_from_json(j);
  REQUIRE(spec.sites() == 4);
  REQUIRE(spec.units[1] == UnitType::B);
  REQUIRE(spec.j_ab == std::vector<double>(4, 0.5));
  REQUIRE(spec.j_ba == std::vector<double>({0.1, 0.2, 0.3, 0.4}));
  REQUIRE(spec.field[1] == -0.4);
  REQUIRE(max_norm(spec.h_int_a - gates::pauli_x()) == 0.0);
  REQUIRE(max_norm(spec.h_int_b - gates::pauli_z()) == 0.0);  // defaults to HB

  nlohmann::json bad = j;
  bad["units"] = "ABC";
  REQUIRE_THROWS_AS(polymer_spec_from_json(bad), std::invalid_argument);

  const nlohmann::json lin = {{"kind", "linear"}};
  const nlohmann::json smooth = {{"kind", "smoothstep"}};
  const nlohmann::json tab = {{"kind", "table"},
                              {"points", {{0.0, 0.0}, {0.5, 0.7}, {1.0, 1.0}}}};
  const nlohmann::json cosine = {{"kind", "cosine"}};
  REQUIRE(schedule_from_json(lin).name() == "linear");
  REQUIRE(schedule_from_json(smooth).name() == "smoothstep");
  REQUIRE(schedule_from_json(tab)(0.5) == Catch::Approx(0.7).margin(1e-12));
  REQUIRE_THROWS_AS(schedule_from_json(cosine), std::invalid_argument);
}
