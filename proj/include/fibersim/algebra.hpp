#ifndef FIBERSIM_ALGEBRA_HPP
#define FIBERSIM_ALGEBRA_HPP

#include "fibersim/matcore.hpp"
#include "fibersim/random.hpp"
#include "fibersim/states.hpp"

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fibersim {

inline CVector vec(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

inline CMatrix unvec(const CVector& v, long d) {
  return Eigen::Map<const CMatrix>(v.data(), d, d);
}

/// Orthonormal basis (Hilbert-Schmidt) of the span of the given matrices,
/// via SVD rank detection on the vectorized stack.
inline std::vector<CMatrix> orthonormal_span(const std::vector<CMatrix>& mats,
                                             long d, double rank_tol = 1e-10) {
  if (mats.empty()) return {};
  CMatrix stack(d * d, static_cast<long>(mats.size()));
  for (std::size_t i = 0; i < mats.size(); ++i)
    stack.col(static_cast<long>(i)) = vec(mats[i]);
  Eigen::JacobiSVD<CMatrix> svd(stack, Eigen::ComputeThinU);
  const double cutoff = rank_tol * std::max(1.0, svd.singularValues()(0));
  std::vector<CMatrix> basis;
  for (long i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > cutoff)
      basis.push_back(unvec(svd.matrixU().col(i), d));
  return basis;
}

/// Residual of the best span approximation of `a` in the orthonormal basis.
inline double span_residual(const CMatrix& a, const std::vector<CMatrix>& basis) {
  CMatrix proj = CMatrix::Zero(a.rows(), a.cols());
  for (const auto& b : basis) proj += hs_inner(b, a) * b;
  return hs_norm(a - proj);
}

/// A *-closed, identity-containing matrix span with an HS-orthonormal basis.
/// Closure under products and adjoints is verified at construction.
class MatrixStarAlgebra {
 public:
  /// Orthonormalizes the span of {I, generators, adjoints, products...} until
  /// the dimension stabilizes; the result is the smallest von Neumann algebra
  /// (finite-dimensional sense) containing the generators.
  static MatrixStarAlgebra generate(const std::vector<CMatrix>& generators, long d) {
    std::vector<CMatrix> pool{CMatrix::Identity(d, d)};
    for (const auto& g : generators) {
      if (g.rows() != d || g.cols() != d)
        throw std::invalid_argument("generate_algebra: generator dim mismatch");
      pool.push_back(g);
      pool.push_back(g.adjoint());
    }
    std::vector<CMatrix> basis = orthonormal_span(pool, d);
    for (;;) {
      std::vector<CMatrix> next = basis;
      for (const auto& a : basis) {
        next.push_back(a.adjoint());
        for (const auto& b : basis) next.push_back(a * b);
      }
      std::vector<CMatrix> closed = orthonormal_span(next, d);
      if (closed.size() == basis.size()) break;
      basis = std::move(closed);
    }
    return MatrixStarAlgebra(d, std::move(basis), /*verify=*/false);
  }

  /// Wraps an already *-closed span, verifying all invariants.
  static MatrixStarAlgebra from_span(const std::vector<CMatrix>& span_mats, long d) {
    return MatrixStarAlgebra(d, orthonormal_span(span_mats, d), /*verify=*/true);
  }

  long dim() const { return d_; }
  long span_dim() const { return static_cast<long>(basis_.size()); }
  const std::vector<CMatrix>& basis() const { return basis_; }

  bool contains(const CMatrix& a, double tolerance = tol::span) const {
    return span_residual(a, basis_) <= tolerance;
  }

  double residual(const CMatrix& a) const { return span_residual(a, basis_); }

  /// Commutant: the solution space of [B, g] = 0 over all basis elements g.
  MatrixStarAlgebra commutant() const {
    const long n = d_ * d_;
    CMatrix constraints(static_cast<long>(basis_.size()) * n, n);
    const CMatrix eye = CMatrix::Identity(d_, d_);
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      // vec(gB - Bg) = (I (x) g - g^T (x) I) vec(B), column-major vec.
      constraints.middleRows(static_cast<long>(k) * n, n) =
          tensor(eye, basis_[k]) - tensor(basis_[k].transpose(), eye);
    }
    Eigen::JacobiSVD<CMatrix> svd(constraints, Eigen::ComputeFullV);
    std::vector<CMatrix> null_basis;
    const auto& sv = svd.singularValues();
    const double cutoff = 1e-9 * std::max(1.0, sv.size() > 0 ? sv(0) : 1.0);
    for (long i = 0; i < svd.matrixV().cols(); ++i) {
      const double s = i < sv.size() ? sv(i) : 0.0;
      if (s <= cutoff) null_basis.push_back(unvec(svd.matrixV().col(i), d_));
    }
    // The commutant of a *-closed set is itself a von Neumann algebra.
    return MatrixStarAlgebra(d_, orthonormal_span(null_basis, d_), /*verify=*/false);
  }

  bool is_von_neumann(double tolerance = tol::span) const {
    const MatrixStarAlgebra dbl = commutant().commutant();
    if (dbl.span_dim() != span_dim()) return false;
    for (const auto& b : basis_)
      if (dbl.residual(b) > tolerance) return false;
    return true;
  }

  bool same_span(const MatrixStarAlgebra& other, double tolerance = tol::span) const {
    if (other.span_dim() != span_dim() || other.dim() != dim()) return false;
    for (const auto& b : basis_)
      if (other.residual(b) > tolerance) return false;
    return true;
  }

 private:
  MatrixStarAlgebra(long d, std::vector<CMatrix> basis, bool verify)
      : d_(d), basis_(std::move(basis)) {
    if (verify) {
      if (span_residual(CMatrix::Identity(d_, d_), basis_) > tol::span)
        throw std::invalid_argument("MatrixStarAlgebra: identity not in span");
      for (const auto& a : basis_) {
        if (span_residual(a.adjoint(), basis_) > tol::span)
          throw std::invalid_argument("MatrixStarAlgebra: span not *-closed");
        for (const auto& b : basis_)
          if (span_residual(a * b, basis_) > tol::span)
            throw std::invalid_argument("MatrixStarAlgebra: span not closed under products");
      }
    }
  }

  long d_;
  std::vector<CMatrix> basis_;
};

inline MatrixStarAlgebra generate_algebra(const std::vector<CMatrix>& generators, long d) {
  return MatrixStarAlgebra::generate(generators, d);
}

inline MatrixStarAlgebra full_matrix_algebra(long d) {
  std::vector<CMatrix> units;
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j) {
      CMatrix e = CMatrix::Zero(d, d);
      e(i, j) = 1;
      units.push_back(e);
    }
  return MatrixStarAlgebra::from_span(units, d);
}

/// Named gate collection.
struct GateSet {
  struct Entry {
    std::string name;
    CMatrix matrix;
  };
  std::vector<Entry> gates;

  static GateSet of(std::vector<std::pair<std::string, CMatrix>> named) {
    GateSet s;
    for (auto& [n, m] : named) s.gates.push_back({std::move(n), std::move(m)});
    return s;
  }
};

/// Membership verdict for the trace-positivity-preserving subset of an
/// algebra. In finite dimension a acts invariantly on unnormalized states
/// iff a*a is positive definite: Tr(a rho a*) = Tr(a*a rho) > 0 for every
/// nonzero PSD rho exactly when ker a = {0}.
struct CheckAVerdict {
  bool member;
  double min_eig_a_star_a;
  std::optional<CVector> kernel_witness;  // rho = vv* vanishes under a
  int probes_checked = 0;
  bool probe_agreement = true;
};

inline CheckAVerdict in_check_A(const CMatrix& a, const MatrixStarAlgebra& alg,
                                const std::vector<UnnormalizedState>& probes = {},
                                double eig_tol = 1e-10) {
  if (alg.residual(a) > tol::span)
    throw std::invalid_argument("in_check_A: operator not in algebra span");
  const CMatrix gram = a.adjoint() * a;
  const EigResult eig = eig_hermitian(HermitianOp((gram + gram.adjoint()) / 2.0, 1e-8));
  CheckAVerdict v{};
  v.min_eig_a_star_a = eig.eigenvalues(0);
  v.member = v.min_eig_a_star_a > eig_tol;
  if (!v.member) v.kernel_witness = eig.eigenvectors.col(0);
  for (const auto& p : probes) {
    ++v.probes_checked;
    const bool survived = conj_act(a, p).has_value();
    if (survived != v.member && !v.member) {
      // A singular operator can still keep a full-rank probe alive; only a
      // vanished probe against a member verdict is a contradiction.
      continue;
    }
    if (!survived && v.member) v.probe_agreement = false;
  }
  return v;
}

struct GroupCheckReport {
  bool identity_in_set = false;
  bool all_invertible = true;
  bool products_in_span = true;
  bool inverses_in_span = true;
  std::vector<std::string> notes;

  bool passes() const {
    return identity_in_set && all_invertible && products_in_span && inverses_in_span;
  }
};

/// Verifies the group axioms for a gate set inside the invertible part of an
/// algebra: identity present, products stay in the span, numerical inverses
/// stay in the span.
inline GroupCheckReport regular_subgroup_check(const GateSet& set,
                                               const MatrixStarAlgebra& alg,
                                               double span_tol = 1e-8) {
  GroupCheckReport report;
  const long d = alg.dim();
  const CMatrix eye = CMatrix::Identity(d, d);
  for (const auto& g : set.gates)
    if (max_norm(g.matrix - eye) <= 1e-10) report.identity_in_set = true;
  if (!report.identity_in_set)
    report.notes.push_back("identity not listed; closure extends the set");
  for (const auto& g : set.gates) {
    Eigen::FullPivLU<CMatrix> lu(g.matrix);
    if (!lu.isInvertible()) {
      report.all_invertible = false;
      report.notes.push_back("non-invertible element: " + g.name);
      continue;
    }
    const CMatrix inv = lu.inverse();
    if (alg.residual(inv) > span_tol) {
      report.inverses_in_span = false;
      report.notes.push_back("inverse leaves span: " + g.name);
    }
    for (const auto& h : set.gates) {
      if (alg.residual(g.matrix * h.matrix) > span_tol) {
        report.products_in_span = false;
        report.notes.push_back("product leaves span: " + g.name + "*" + h.name);
      }
    }
  }
  return report;
}

/// Breadth-first closure of normalized conjugation images under a gate set.
/// The identity word is included, so the input state is always present.
inline std::vector<DensityOperator> orbit(const DensityOperator& rho0,
                                          const GateSet& gates, int max_depth,
                                          double dedup_tol = 1e-9,
                                          const MatrixStarAlgebra* alg = nullptr) {
  if (alg) {
    for (const auto& g : gates.gates) {
      CheckAVerdict v = in_check_A(g.matrix, *alg);
      if (!v.member)
        throw std::invalid_argument("orbit: gate outside the admissible set: " + g.name);
    }
  }
  std::vector<DensityOperator> states{rho0};
  std::deque<std::pair<CMatrix, int>> frontier{{rho0.matrix(), 0}};
  auto known = [&](const CMatrix& m) {
    for (const auto& s : states)
      if (trace_distance(s.matrix(), m) <= dedup_tol) return true;
    return false;
  };
  while (!frontier.empty()) {
    auto [cur, depth] = frontier.front();
    frontier.pop_front();
    if (depth >= max_depth) continue;
    for (const auto& g : gates.gates) {
      CMatrix image = g.matrix * cur * g.matrix.adjoint();
      const double tr = image.trace().real();
      if (tr <= tol::trace) continue;  // vanished branch
      image /= tr;
      if (!known(image)) {
        states.emplace_back(image);
        frontier.emplace_back(image, depth + 1);
      }
    }
  }
  return states;
}

struct UniversalityReport {
  int targets = 0;
  int reached = 0;
  int orbit_states = 0;
  double epsilon = 0;
  int depth = 0;
  double reachable_fraction() const {
    return targets == 0 ? 0.0 : static_cast<double>(reached) / targets;
  }
};

namespace detail {

// Fast trace distance for qubit states; falls back to the eigenvalue route.
inline double fast_trace_distance(const CMatrix& a, const CMatrix& b) {
  if (a.rows() == 2) {
    const CMatrix d = a - b;
    const double tr = d.trace().real();
    const double det = (d(0, 0) * d(1, 1) - d(0, 1) * d(1, 0)).real();
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    return 0.5 * (std::abs((tr + disc) / 2.0) + std::abs((tr - disc) / 2.0));
  }
  return trace_distance(a, b);
}

}  // namespace detail

/// Statistical reachability probe: BFS over unitary words from a fiducial
/// basis state, then the fraction of Haar-random pure targets within trace
/// distance epsilon. Never a proof of universality.
inline UniversalityReport universality_probe(const GateSet& gates, long d,
                                             int n_targets, int depth, double epsilon,
                                             std::uint64_t seed = 0,
                                             std::size_t max_states = 200000) {
  UniversalityReport report;
  report.targets = n_targets;
  report.epsilon = epsilon;
  report.depth = depth;

  const CMatrix fiducial = projector(gates::basis_vector(d, 0));
  std::vector<CMatrix> states;
  // Dedup by a quantized key over the vectorized state; collisions re-check
  // with the exact distance, near-boundary misses only add rare duplicates.
  std::map<std::vector<long>, std::vector<std::size_t>> buckets;
  auto key_of = [&](const CMatrix& m) {
    std::vector<long> key;
    key.reserve(static_cast<std::size_t>(2 * m.size()));
    for (long c = 0; c < m.cols(); ++c)
      for (long r = 0; r < m.rows(); ++r) {
        key.push_back(std::lround(m(r, c).real() * 1e6));
        key.push_back(std::lround(m(r, c).imag() * 1e6));
      }
    return key;
  };
  auto try_insert = [&](const CMatrix& m) {
    auto key = key_of(m);
    auto& bucket = buckets[key];
    for (std::size_t idx : bucket)
      if (detail::fast_trace_distance(states[idx], m) <= 1e-9) return false;
    bucket.push_back(states.size());
    states.push_back(m);
    return true;
  };
  try_insert(fiducial);

  std::deque<std::pair<std::size_t, int>> frontier{{0, 0}};
  while (!frontier.empty() && states.size() < max_states) {
    auto [idx, dep] = frontier.front();
    frontier.pop_front();
    if (dep >= depth) continue;
    for (const auto& g : gates.gates) {
      CMatrix image = g.matrix * states[idx] * g.matrix.adjoint();
      if (try_insert(image)) frontier.emplace_back(states.size() - 1, dep + 1);
    }
  }
  report.orbit_states = static_cast<int>(states.size());

  Rng rng(seed);
  for (int t = 0; t < n_targets; ++t) {
    const CMatrix target = projector(rng.haar_pure_state(d));
    for (const auto& s : states)
      if (detail::fast_trace_distance(s, target) <= epsilon) {
        ++report.reached;
        break;
      }
  }
  return report;
}

// ---- gate-set JSON: list of named matrix objects ----

inline nlohmann::json gateset_to_json(const GateSet& s) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& g : s.gates) {
    nlohmann::json e = matrix_to_json(g.matrix);
    e["name"] = g.name;
    j.push_back(e);
  }
  return j;
}

inline GateSet gateset_from_json(const nlohmann::json& j) {
  GateSet s;
  for (const auto& e : j)
    s.gates.push_back({e.value("name", "gate" + std::to_string(s.gates.size())),
                       matrix_from_json(e)});
  return s;
}

}  // namespace fibersim

#endif  // FIBERSIM_ALGEBRA_HPP
