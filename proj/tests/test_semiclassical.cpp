#include "fibersim/semiclassical.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace fibersim;

namespace {

Bipartition qubit_cut() { return Bipartition(TensorShape({2, 2}), {0}); }

DensityOperator bell() { return DensityOperator::pure(gates::bell_phi_plus()); }

DensityOperator plus_zero() {
  return DensityOperator::pure(
      tensor(CVector(gates::plus_state()), CVector(gates::basis_vector(2, 0))));
}

std::vector<DensityOperator> ppt_seeds(Rng& rng, int n) {
  std::vector<DensityOperator> seeds;
  const auto cut = qubit_cut();
  while (static_cast<int>(seeds.size()) < n) {
    const DensityOperator rho(rng.hs_random_density(4));
    if (is_separable_ppt(rho, cut) == Separability::Separable) seeds.push_back(rho);
  }
  return seeds;
}

}  // namespace

TEST_CASE("local factorization of product operators") {
  Rng rng(107);
  const CMatrix u = rng.haar_unitary(2), v = rng.haar_unitary(2);
  const auto lf = local_factorization(tensor(u, v), qubit_cut());
  REQUIRE(lf.has_value());
  REQUIRE(max_norm(tensor(lf->u, lf->v) - tensor(u, v)) < 1e-10);

  REQUIRE_FALSE(local_factorization(gates::cnot(), qubit_cut()).has_value());
}

TEST_CASE("local unitary recognition") {
  Rng rng(109);
  REQUIRE(is_local_unitary(tensor(rng.haar_unitary(2), rng.haar_unitary(2)), qubit_cut()));
  REQUIRE(is_local_unitary(CMatrix::Identity(4, 4), qubit_cut()));
  REQUIRE(is_local_unitary(Complex(0, 2) * tensor(gates::pauli_x(), gates::hadamard()),
                           qubit_cut()));
  REQUIRE_FALSE(is_local_unitary(gates::cnot(), qubit_cut()));
  // product of a unitary and a filter is rank one but not unitary
  CMatrix filter(2, 2);
  filter << 1, 0, 0, 0.5;
  REQUIRE_FALSE(is_local_unitary(tensor(gates::pauli_x(), filter), qubit_cut()));
}

TEST_CASE("in_D0") {
  Rng rng(113);
  const auto f = negativity_functional(qubit_cut());
  REQUIRE(in_D0(DensityOperator(tensor(rng.hs_random_density(2), rng.hs_random_density(2))), f));
  REQUIRE_FALSE(in_D0(bell(), f));

  CMatrix cc = CMatrix::Zero(4, 4);
  cc(0, 0) = 0.5;
  cc(3, 3) = 0.5;
  REQUIRE(in_D0(DensityOperator(cc), discord_functional(qubit_cut(), 10, 2), 1e-6));
}

TEST_CASE("in_Af verdict trichotomy") {
  Rng rng(127);
  const auto cut = qubit_cut();
  const auto f = negativity_functional(cut);
  const auto probes = default_probe_states(cut, rng, 40, 10);

  const auto id = in_Af(CMatrix::Identity(4, 4), f, cut, probes);
  REQUIRE(id.kind == MembershipKind::CertifiedMember);

  const auto lu = in_Af(tensor(rng.haar_unitary(2), rng.haar_unitary(2)), f, cut, probes);
  REQUIRE(lu.kind == MembershipKind::CertifiedMember);

  const auto cnot = in_Af(gates::cnot(), f, cut, probes);
  REQUIRE(cnot.kind == MembershipKind::NonMember);
  REQUIRE(cnot.witness.has_value());
  REQUIRE(cnot.witness_increase > 1e-8);
}

TEST_CASE("CNOT creates entanglement from |+0>") {
  const auto cut = qubit_cut();
  const auto f = negativity_functional(cut);
  const std::vector<DensityOperator> probes{plus_zero()};
  const auto verdict = in_Af(gates::cnot(), f, cut, probes);
  REQUIRE(verdict.kind == MembershipKind::NonMember);
  REQUIRE(verdict.witness_increase == Catch::Approx(0.5).margin(1e-10));
}

TEST_CASE("NonMember witnesses re-verify deterministically") {
  Rng rng(131);
  const auto cut = qubit_cut();
  const auto f = negativity_functional(cut);
  const auto probes = default_probe_states(cut, rng, 40, 10);
  const auto verdict = in_Af(gates::cnot(), f, cut, probes);
  REQUIRE(verdict.kind == MembershipKind::NonMember);
  const auto image = conj_act(gates::cnot(), *verdict.witness);
  REQUIRE(image.has_value());
  const double delta = f.eval(normalize(*image)) - f.eval(*verdict.witness);
  REQUIRE(delta == Catch::Approx(verdict.witness_increase).margin(1e-12));
}

TEST_CASE("probe membership is monotone in probe count") {
  Rng rng(137);
  const auto cut = qubit_cut();
  const auto f = negativity_functional(cut);
  auto probes = default_probe_states(cut, rng, 20, 5);
  const auto small = in_Af(gates::cnot(), f, cut, probes);
  auto more = probes;
  const auto extra = default_probe_states(cut, rng, 20, 5);
  more.insert(more.end(), extra.begin(), extra.end());
  const auto large = in_Af(gates::cnot(), f, cut, more);
  REQUIRE(small.kind == MembershipKind::NonMember);
  REQUIRE(large.kind == MembershipKind::NonMember);
}

TEST_CASE("closure test: certified local unitaries preserve classicality") {
  Rng rng(139);
  const auto cut = qubit_cut();
  const auto f = negativity_functional(cut);
  GateSet lu;
  for (int k = 0; k < 4; ++k)
    lu.gates.push_back({"u" + std::to_string(k),
                        tensor(rng.haar_unitary(2), rng.haar_unitary(2))});
  const auto seeds = ppt_seeds(rng, 20);
  const auto report = closure_test(f, lu, seeds, 500, 6, 1e-8, rng);
  REQUIRE(report.words_applied == 500);
  REQUIRE(report.violations.empty());
}

TEST_CASE("closure test: injected CNOT is detected") {
  Rng rng(149);
  const auto cut = qubit_cut();
  const auto f = negativity_functional(cut);
  GateSet with_cnot;
  with_cnot.gates.push_back({"u", tensor(rng.haar_unitary(2), rng.haar_unitary(2))});
  with_cnot.gates.push_back({"CNOT", gates::cnot()});
  std::vector<DensityOperator> seeds{plus_zero()};
  const auto report = closure_test(f, with_cnot, seeds, 300, 5, 1e-8, rng);
  REQUIRE_FALSE(report.violations.empty());
  REQUIRE(report.violations.front().f_value > 1e-8);
}

TEST_CASE("closure test: empty gate set is vacuous") {
  Rng rng(151);
  const auto f = negativity_functional(qubit_cut());
  const auto report = closure_test(f, GateSet{}, {}, 100, 5, 1e-8, rng);
  REQUIRE(report.words_applied == 0);
  REQUIRE(report.violations.empty());
}

TEST_CASE("group structure: equality set of local unitaries") {
  Rng rng(157);
  const auto cut = qubit_cut();
  const auto f = negativity_functional(cut);
  GateSet lu;
  lu.gates.push_back({"I", CMatrix::Identity(4, 4)});
  for (int k = 0; k < 3; ++k)
    lu.gates.push_back({"u" + std::to_string(k),
                        tensor(rng.haar_unitary(2), rng.haar_unitary(2))});
  const auto probes = default_probe_states(cut, rng, 30, 10);
  const auto report = group_structure_test(lu, f, GroupTestMode::EqualitySet, probes);
  REQUIRE(report.passes());
}

TEST_CASE("group structure: identity alone is a group") {
  Rng rng(163);
  const auto cut = qubit_cut();
  const auto probes = default_probe_states(cut, rng, 10, 5);
  GateSet only_id;
  only_id.gates.push_back({"I", CMatrix::Identity(4, 4)});
  REQUIRE(group_structure_test(only_id, negativity_functional(cut),
                               GroupTestMode::EqualitySet, probes)
              .passes());
}

TEST_CASE("group structure: strict set excludes inverses") {
  Rng rng(167);
  const auto cut = qubit_cut();
  const auto f = negativity_functional(cut);
  // invertible local filter, strictly decreasing on entangled probes
  CMatrix filter(2, 2);
  filter << 1, 0, 0, 0.5;
  GateSet strict;
  strict.gates.push_back({"filter", tensor(filter, CMatrix::Identity(2, 2))});
  std::vector<DensityOperator> probes{bell()};
  const auto report = group_structure_test(strict, f, GroupTestMode::StrictSet, probes);
  REQUIRE(report.strict_elements_found == 1);
  REQUIRE(report.inverse_exclusions_confirmed == 1);
  REQUIRE(report.inverses_ok);
}
