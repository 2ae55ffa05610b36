#include "fibersim/topology.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace fibersim;

namespace {

std::vector<OpenSet> all_subsets(int n) {
  std::vector<OpenSet> out;
  for (OpenSet s = 0; s < (OpenSet{1} << n); ++s) out.push_back(s);
  return out;
}

}  // namespace

TEST_CASE("discrete topology on 3 points validates with 8 opens") {
  auto r = FiniteTopology::validate({"1", "2", "3"}, all_subsets(3));
  REQUIRE(std::holds_alternative<FiniteTopology>(r));
  REQUIRE(std::get<FiniteTopology>(r).opens().size() == 8);
}

TEST_CASE("validation failures carry the violated axiom") {
  {
    auto r = FiniteTopology::validate({"1", "2"}, {0b00, 0b01});
    REQUIRE(std::holds_alternative<TopologyViolation>(r));
    REQUIRE(std::get<TopologyViolation>(r).axiom == TopologyAxiom::MissingWhole);
  }
  {
    auto r = FiniteTopology::validate({"1", "2"}, {0b01, 0b11});
    REQUIRE(std::get<TopologyViolation>(r).axiom == TopologyAxiom::MissingEmpty);
  }
  {
    // {0,{1},{2},X} on 2 points is fine; use 3 points where {1}+{2} union missing
    auto r = FiniteTopology::validate({"1", "2", "3"}, {0b000, 0b001, 0b010, 0b111});
    REQUIRE(std::holds_alternative<TopologyViolation>(r));
    const auto v = std::get<TopologyViolation>(r);
    REQUIRE(v.axiom == TopologyAxiom::NotClosedUnderUnion);
    REQUIRE((v.witness_a | v.witness_b) == 0b011);
  }
  {
    auto r = FiniteTopology::validate({"1", "2", "3"}, {0b000, 0b011, 0b110, 0b111});
    REQUIRE(std::get<TopologyViolation>(r).axiom == TopologyAxiom::NotClosedUnderIntersection);
  }
}

TEST_CASE("Sierpinski-type family validates") {
  // oracle: all union/intersection pairs of {0,{1},{1,2}} stay inside
  auto r = FiniteTopology::validate({"1", "2"}, {0b00, 0b01, 0b11});
  REQUIRE(std::holds_alternative<FiniteTopology>(r));
}

TEST_CASE("generate_from_basis closure") {
  {
    std::vector<OpenSet> singles{0b001, 0b010, 0b100};
    const auto t = FiniteTopology::generate_from_basis({"1", "2", "3"}, singles);
    REQUIRE(t.opens().size() == 8);
  }
  {
    const auto t = FiniteTopology::generate_from_basis({"1", "2", "3"}, {});
    REQUIRE(t.opens().size() == 2);
  }
  {
    // oracle closure enumeration: {0,{1},{1,2},X}
    const auto t = FiniteTopology::generate_from_basis({"1", "2", "3"}, {0b001, 0b011});
    REQUIRE(t.opens() == std::vector<OpenSet>{0b000, 0b001, 0b011, 0b111});
  }
}

TEST_CASE("generate_from_basis round-trips through validate and is idempotent") {
  const auto t = FiniteTopology::generate_from_basis({"a", "b", "c", "d"},
                                                     {0b0011, 0b0110, 0b1000});
  auto r = FiniteTopology::validate(t.points(), t.opens());
  REQUIRE(std::holds_alternative<FiniteTopology>(r));
  const auto again = FiniteTopology::generate_from_basis(t.points(), t.opens());
  REQUIRE(again.opens() == t.opens());
}

TEST_CASE("neighborhoods") {
  const auto discrete = FiniteTopology::generate_from_basis(
      {"1", "2", "3"}, {0b001, 0b010, 0b100});
  const auto n1 = discrete.neighborhoods("1");
  REQUIRE(n1 == std::vector<OpenSet>{0b001, 0b011, 0b101, 0b111});

  const auto indiscrete = FiniteTopology::generate_from_basis({"1", "2", "3"}, {});
  REQUIRE(indiscrete.neighborhoods("2") == std::vector<OpenSet>{0b111});

  auto r = FiniteTopology::validate({"1", "2"}, {0b00, 0b01, 0b11});
  const auto& sierp = std::get<FiniteTopology>(r);
  REQUIRE(sierp.neighborhoods("2") == std::vector<OpenSet>{0b11});
  REQUIRE(sierp.minimal_neighborhood("2") == 0b11);
  REQUIRE(sierp.minimal_neighborhood("1") == 0b01);
  REQUIRE_THROWS_AS(sierp.neighborhoods("zzz"), std::invalid_argument);
}

TEST_CASE("opens form a bounded lattice, exhaustively for small spaces") {
  const auto t = FiniteTopology::generate_from_basis(
      {"1", "2", "3", "4", "5"}, {0b00011, 0b00110, 0b11000, 0b00100});
  REQUIRE(t.opens().size() <= (1u << 5));
  for (OpenSet a : t.opens())
    for (OpenSet b : t.opens()) {
      REQUIRE(t.is_open(a | b));
      REQUIRE(t.is_open(a & b));
    }
  REQUIRE(t.is_open(0));
  REQUIRE(t.is_open(t.full()));
}

TEST_CASE("opens count reaches 2^n exactly for the discrete topology") {
  const auto d2 = FiniteTopology::generate_from_basis({"x", "y"}, {0b01, 0b10});
  REQUIRE(d2.opens().size() == 4);
  const auto not_discrete = FiniteTopology::generate_from_basis({"x", "y"}, {0b01});
  REQUIRE(not_discrete.opens().size() < 4);
}

TEST_CASE("open cover membership and disjointness") {
  const auto t = FiniteTopology::generate_from_basis({"1", "2", "3"},
                                                     {0b001, 0b010, 0b100});
  const auto cover = OpenCover::make(t, {0b001, 0b010, 0b100});
  REQUIRE(cover.pairwise_disjoint());
  const auto overlapping = OpenCover::make(t, {0b011, 0b110});
  REQUIRE_FALSE(overlapping.pairwise_disjoint());
  REQUIRE_THROWS_AS(OpenCover::make(t, {0b001}), std::invalid_argument);
}

TEST_CASE("topology JSON round-trip") {
  const auto t = FiniteTopology::generate_from_basis({"p", "q", "r"}, {0b001, 0b110});
  const auto j = topology_to_json(t);
  const TopologyFile f = topology_file_from_json(j);
  auto r = FiniteTopology::validate(f.points, f.opens);
  REQUIRE(std::holds_alternative<FiniteTopology>(r));
  REQUIRE(std::get<FiniteTopology>(r).opens() == t.opens());

  nlohmann::json bad = j;
  bad["opens"].push_back({"unknown"});
  REQUIRE_THROWS_AS(topology_file_from_json(bad), std::invalid_argument);
}
