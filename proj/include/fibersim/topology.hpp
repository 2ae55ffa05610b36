#ifndef FIBERSIM_TOPOLOGY_HPP
#define FIBERSIM_TOPOLOGY_HPP

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fibersim {

using OpenSet = std::uint64_t;  // bitmask over the point ordering

enum class TopologyAxiom {
  MissingEmpty,
  MissingWhole,
  NotClosedUnderUnion,
  NotClosedUnderIntersection,
};

struct TopologyViolation {
  TopologyAxiom axiom;
  OpenSet witness_a = 0;
  OpenSet witness_b = 0;
  std::string describe() const {
    switch (axiom) {
      case TopologyAxiom::MissingEmpty: return "empty set not open";
      case TopologyAxiom::MissingWhole: return "whole space not open";
      case TopologyAxiom::NotClosedUnderUnion: return "not closed under union";
      case TopologyAxiom::NotClosedUnderIntersection: return "not closed under intersection";
    }
    return "unknown";
  }
};

/// A validated finite topology. Opens are stored sorted (by popcount, then value).
class FiniteTopology {
 public:
  static std::variant<FiniteTopology, TopologyViolation> validate(
      std::vector<std::string> points, std::vector<OpenSet> candidate_opens) {
    if (points.size() > 64) throw std::invalid_argument("FiniteTopology: > 64 points");
    const OpenSet full = full_mask(points.size());
    std::set<OpenSet> opens(candidate_opens.begin(), candidate_opens.end());
    if (!opens.count(0)) return TopologyViolation{TopologyAxiom::MissingEmpty};
    if (!opens.count(full)) return TopologyViolation{TopologyAxiom::MissingWhole};
    for (OpenSet a : opens)
      for (OpenSet b : opens) {
        if (!opens.count(a | b))
          return TopologyViolation{TopologyAxiom::NotClosedUnderUnion, a, b};
        if (!opens.count(a & b))
          return TopologyViolation{TopologyAxiom::NotClosedUnderIntersection, a, b};
      }
    return FiniteTopology(std::move(points), {opens.begin(), opens.end()});
  }

  /// Smallest topology containing the basis sets.
  static FiniteTopology generate_from_basis(std::vector<std::string> points,
                                            const std::vector<OpenSet>& basis) {
    if (points.size() > 64) throw std::invalid_argument("FiniteTopology: > 64 points");
    const OpenSet full = full_mask(points.size());
    for (OpenSet b : basis)
      if ((b & ~full) != 0) throw std::invalid_argument("basis set outside point set");
    std::set<OpenSet> opens{0, full};
    opens.insert(basis.begin(), basis.end());
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<OpenSet> cur(opens.begin(), opens.end());
      for (OpenSet a : cur)
        for (OpenSet b : cur) {
          if (opens.insert(a | b).second) changed = true;
          if (opens.insert(a & b).second) changed = true;
        }
    }
    return FiniteTopology(std::move(points), {opens.begin(), opens.end()});
  }

  const std::vector<std::string>& points() const { return points_; }
  const std::vector<OpenSet>& opens() const { return opens_; }
  OpenSet full() const { return full_mask(points_.size()); }

  bool is_open(OpenSet s) const {
    return std::binary_search(opens_.begin(), opens_.end(), s, cmp);
  }

  int point_index(const std::string& label) const {
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (points_[i] == label) return static_cast<int>(i);
    throw std::invalid_argument("unknown point: " + label);
  }

  OpenSet mask_of(const std::vector<std::string>& labels) const {
    OpenSet m = 0;
    for (const auto& l : labels) m |= OpenSet{1} << point_index(l);
    return m;
  }

  std::vector<std::string> labels_of(OpenSet s) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (s & (OpenSet{1} << i)) out.push_back(points_[i]);
    return out;
  }

  /// All opens containing x, ascending by size then value.
  std::vector<OpenSet> neighborhoods(const std::string& x) const {
    const OpenSet bit = OpenSet{1} << point_index(x);
    std::vector<OpenSet> out;
    for (OpenSet u : opens_)
      if (u & bit) out.push_back(u);
    return out;
  }

  /// Smallest open containing x (exists: intersection of all neighborhoods).
  OpenSet minimal_neighborhood(const std::string& x) const {
    OpenSet acc = full();
    for (OpenSet u : neighborhoods(x)) acc &= u;
    return acc;
  }

 private:
  FiniteTopology(std::vector<std::string> points, std::vector<OpenSet> opens)
      : points_(std::move(points)), opens_(std::move(opens)) {
    std::sort(opens_.begin(), opens_.end(), cmp);
  }

  static OpenSet full_mask(std::size_t n) {
    return n == 64 ? ~OpenSet{0} : (OpenSet{1} << n) - 1;
  }

  static bool cmp(OpenSet a, OpenSet b) {
    const int pa = std::popcount(a), pb = std::popcount(b);
    return pa != pb ? pa < pb : a < b;
  }

  std::vector<std::string> points_;
  std::vector<OpenSet> opens_;
};

/// A family of opens covering the whole space.
struct OpenCover {
  std::vector<OpenSet> members;

  static OpenCover make(const FiniteTopology& t, std::vector<OpenSet> members) {
    OpenSet acc = 0;
    for (OpenSet m : members) {
      if (!t.is_open(m)) throw std::invalid_argument("OpenCover: member not open");
      acc |= m;
    }
    if (acc != t.full()) throw std::invalid_argument("OpenCover: does not cover X");
    return OpenCover{std::move(members)};
  }

  bool pairwise_disjoint() const {
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j)
        if (members[i] & members[j]) return false;
    return true;
  }
};

// ---- topology JSON: {"points": [...], "opens": [[...], ...]} ----

inline nlohmann::json topology_to_json(const FiniteTopology& t) {
  nlohmann::json opens = nlohmann::json::array();
  for (OpenSet u : t.opens()) opens.push_back(t.labels_of(u));
  return {{"points", t.points()}, {"opens", opens}};
}

struct TopologyFile {
  std::vector<std::string> points;
  std::vector<OpenSet> opens;
};

inline TopologyFile topology_file_from_json(const nlohmann::json& j) {
  TopologyFile f;
  f.points = j.at("points").get<std::vector<std::string>>();
  auto index = [&](const std::string& l) {
    for (std::size_t i = 0; i < f.points.size(); ++i)
      if (f.points[i] == l) return static_cast<int>(i);
    throw std::invalid_argument("open set references unknown point: " + l);
  };
  for (const auto& open : j.at("opens")) {
    OpenSet m = 0;
    for (const auto& l : open) m |= OpenSet{1} << index(l.get<std::string>());
    f.opens.push_back(m);
  }
  return f;
}

}  // namespace fibersim

#endif  // FIBERSIM_TOPOLOGY_HPP
