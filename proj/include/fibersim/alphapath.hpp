#ifndef FIBERSIM_ALPHAPATH_HPP
#define FIBERSIM_ALPHAPATH_HPP

#include "fibersim/matcore.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fibersim {

/// A path point: an opaque label, optionally carrying a state. Label-valued
/// points compare by label; state-valued points by trace distance.
struct PathPoint {
  std::string label;
  std::optional<CMatrix> state;

  bool same_as(const PathPoint& other, double state_tol = 1e-9) const {
    if (state && other.state)
      return trace_distance(*state, *other.state) <= state_tol;
    return label == other.label;
  }
};

/// Real-valued functional evaluated along paths.
struct AlphaFunctional {
  std::string name;
  std::function<double(const PathPoint&)> eval;
};

/// A finite path: strictly increasing parameters from 0 to 1.
struct DiscretePath {
  std::vector<double> params;
  std::vector<PathPoint> points;

  void validate() const {
    if (params.size() != points.size() || params.size() < 2)
      throw std::invalid_argument("DiscretePath: need matching params/points, >= 2");
    if (std::abs(params.front()) > 1e-12 || std::abs(params.back() - 1.0) > 1e-12)
      throw std::invalid_argument("DiscretePath: parameters must run from 0 to 1");
    for (std::size_t i = 1; i < params.size(); ++i)
      if (params[i] <= params[i - 1])
        throw std::invalid_argument("DiscretePath: parameters must strictly increase");
  }

  const PathPoint& start() const { return points.front(); }
  const PathPoint& end() const { return points.back(); }
};

/// EmptyPath is modeled as an absent value; it is absorbing under products.
using PathResult = std::optional<DiscretePath>;

inline bool alpha_non_increasing(const std::vector<double>& values, double slack = 1e-12) {
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[i - 1] + slack) return false;
  return true;
}

/// The monotone filter: the path itself when alpha is non-increasing along
/// it, otherwise EmptyPath.
inline PathResult tilde_path(const DiscretePath& p, const AlphaFunctional& alpha,
                             double slack = 1e-12) {
  p.validate();
  std::vector<double> values;
  for (const auto& pt : p.points) values.push_back(alpha.eval(pt));
  if (!alpha_non_increasing(values, slack)) return std::nullopt;
  return p;
}

/// Concatenation reparameterized to [0,1], then the monotone filter. The
/// junction must match (exactly for labels, by trace distance for states).
inline PathResult path_product(const PathResult& f, const PathResult& g,
                               const AlphaFunctional& alpha, double state_tol = 1e-9) {
  if (!f || !g) return std::nullopt;  // EmptyPath absorbs
  f->validate();
  g->validate();
  if (!f->end().same_as(g->start(), state_tol))
    throw std::invalid_argument("path_product: endpoint mismatch");
  DiscretePath out;
  for (std::size_t i = 0; i < f->params.size(); ++i) {
    out.params.push_back(f->params[i] / 2.0);
    out.points.push_back(f->points[i]);
  }
  for (std::size_t i = 1; i < g->params.size(); ++i) {
    out.params.push_back(0.5 + g->params[i] / 2.0);
    out.points.push_back(g->points[i]);
  }
  return tilde_path(out, alpha);
}

/// Grid of points F(s_j, t_k); row j fixes the deformation parameter s_j.
struct HomotopyGrid {
  std::vector<std::vector<PathPoint>> rows;  // rows[j][k]

  void validate() const {
    if (rows.size() < 2) throw std::invalid_argument("HomotopyGrid: need >= 2 rows");
    for (const auto& r : rows)
      if (r.size() != rows.front().size() || r.size() < 2)
        throw std::invalid_argument("HomotopyGrid: ragged or degenerate grid");
  }

  std::size_t cols() const { return rows.front().size(); }
};

struct HomotopyVerdict {
  bool holds;
  std::optional<std::pair<std::size_t, std::size_t>> violation;  // (row, col)
};

/// Boundary check: column 0 equals f0 and the last column equals f1,
/// pointwise along the deformation parameter.
inline void require_boundaries(const HomotopyGrid& g, const DiscretePath& f0,
                               const DiscretePath& f1, double state_tol = 1e-9) {
  g.validate();
  f0.validate();
  f1.validate();
  if (g.rows.size() != f0.points.size() || g.rows.size() != f1.points.size())
    throw std::invalid_argument("homotopy: grid rows must match boundary path lengths");
  for (std::size_t j = 0; j < g.rows.size(); ++j) {
    if (!g.rows[j].front().same_as(f0.points[j], state_tol) ||
        !g.rows[j].back().same_as(f1.points[j], state_tol))
      throw std::invalid_argument("homotopy: grid boundary does not match paths");
  }
}

/// Discrete alpha-homotopy check: every row's alpha profile must be
/// non-increasing in t. Witness is the lexicographically first violation.
inline HomotopyVerdict is_alpha_homotopy(const HomotopyGrid& g, const DiscretePath& f0,
                                         const DiscretePath& f1,
                                         const AlphaFunctional& alpha,
                                         double slack = 1e-12) {
  require_boundaries(g, f0, f1);
  for (std::size_t j = 0; j < g.rows.size(); ++j) {
    double prev = alpha.eval(g.rows[j][0]);
    for (std::size_t k = 1; k < g.cols(); ++k) {
      const double cur = alpha.eval(g.rows[j][k]);
      if (cur > prev + slack) return {false, {{j, k}}};
      prev = cur;
    }
  }
  return {true, std::nullopt};
}

enum class EquivalenceVerdict { TwoWay, OneWayOnly, Neither };

/// Discrete reading of the constancy criterion: the deformation is two-way
/// exactly when every row's alpha profile is constant.
inline EquivalenceVerdict equivalence_check(const HomotopyGrid& g, const DiscretePath& f0,
                                            const DiscretePath& f1,
                                            const AlphaFunctional& alpha,
                                            double const_tol = 1e-9) {
  const HomotopyVerdict one_way = is_alpha_homotopy(g, f0, f1, alpha);
  if (!one_way.holds) return EquivalenceVerdict::Neither;
  for (const auto& row : g.rows) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& pt : row) {
      const double v = alpha.eval(pt);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > const_tol) return EquivalenceVerdict::OneWayOnly;
  }
  return EquivalenceVerdict::TwoWay;
}

/// Grid reversed in the t direction (the deformation run backwards).
inline HomotopyGrid time_reversed(const HomotopyGrid& g) {
  HomotopyGrid out = g;
  for (auto& row : out.rows) std::reverse(row.begin(), row.end());
  return out;
}

/// Half-time stitching of two grids sharing the middle boundary.
inline HomotopyGrid stitch(const HomotopyGrid& first, const HomotopyGrid& second) {
  first.validate();
  second.validate();
  if (first.rows.size() != second.rows.size())
    throw std::invalid_argument("stitch: row count mismatch");
  HomotopyGrid out;
  for (std::size_t j = 0; j < first.rows.size(); ++j) {
    std::vector<PathPoint> row = first.rows[j];
    row.insert(row.end(), second.rows[j].begin() + 1, second.rows[j].end());
    out.rows.push_back(std::move(row));
  }
  return out;
}

/// Loop product: path product specialized to loops at a shared basepoint.
inline PathResult loop_product(const PathResult& f, const PathResult& g,
                               const AlphaFunctional& alpha, double state_tol = 1e-9) {
  if (f) {
    f->validate();
    if (!f->start().same_as(f->end(), state_tol))
      throw std::invalid_argument("loop_product: first path is not a loop");
  }
  if (g) {
    g->validate();
    if (!g->start().same_as(g->end(), state_tol))
      throw std::invalid_argument("loop_product: second path is not a loop");
  }
  if (f && g && !f->start().same_as(g->start(), state_tol))
    throw std::invalid_argument("loop_product: basepoint mismatch");
  return path_product(f, g, alpha, state_tol);
}

}  // namespace fibersim

#endif  // FIBERSIM_ALPHAPATH_HPP
