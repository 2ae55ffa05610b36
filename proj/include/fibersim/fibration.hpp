#ifndef FIBERSIM_FIBRATION_HPP
#define FIBERSIM_FIBRATION_HPP

#include "fibersim/algebra.hpp"
#include "fibersim/channels.hpp"
#include "fibersim/topology.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace fibersim {

/// Per-open-set data used to assemble a fibration. Opens are keyed by their
/// bitmask over the topology's point ordering.
struct FibrationAssignments {
  std::map<std::string, int> site_dims;                // point label -> local dim
  std::map<OpenSet, MatrixStarAlgebra> algebras;
  std::map<OpenSet, DensityOperator> initial_states;
  std::map<OpenSet, GateSet> gate_sets;
  int orbit_depth = 6;
  double orbit_dedup_tol = 1e-9;
};

struct AssemblyReport {
  std::vector<std::string> errors;
  std::vector<std::string> metadata;
  bool ok() const { return errors.empty(); }
};

/// A finite topology with a von Neumann algebra, an optional initial state
/// and gate set per open set, partial-trace restrictions, and orbit fibers.
class QuantumFibration {
 public:
  static std::pair<std::optional<QuantumFibration>, AssemblyReport> assemble(
      FiniteTopology topology, FibrationAssignments assignments) {
    AssemblyReport report;
    QuantumFibration f(std::move(topology), std::move(assignments));

    for (const auto& p : f.topology_.points())
      if (!f.assignments_.site_dims.count(p)) {
        report.errors.push_back("no local dimension declared for point " + p);
        return {std::nullopt, report};
      }

    // Dimension consistency of every declared object.
    for (const auto& [u, alg] : f.assignments_.algebras)
      if (alg.dim() != f.ambient_dim(u))
        report.errors.push_back("algebra on " + f.open_name(u) + " has wrong ambient dim");
    for (const auto& [u, rho] : f.assignments_.initial_states)
      if (rho.dim() != f.ambient_dim(u))
        report.errors.push_back("state on " + f.open_name(u) + " has wrong ambient dim");
    if (!report.ok()) return {std::nullopt, report};

    // Isotony: span(alg(V)) embeds into span(alg(U)) for nested declared opens.
    for (const auto& [v, alg_v] : f.assignments_.algebras)
      for (const auto& [u, alg_u] : f.assignments_.algebras) {
        if (u == v || (v & u) != v) continue;
        for (const auto& basis_elem : alg_v.basis()) {
          const CMatrix embedded = f.embed_op(basis_elem, v, u);
          if (alg_u.residual(embedded) > tol::span) {
            report.errors.push_back("isotony violation: algebra of " + f.open_name(v) +
                                    " does not embed into algebra of " + f.open_name(u));
            break;
          }
        }
      }

    // Every gate must act invariantly on unnormalized states of its fiber.
    for (const auto& [u, gs] : f.assignments_.gate_sets) {
      const MatrixStarAlgebra* alg = f.declared_algebra(u);
      for (const auto& g : gs.gates) {
        if (g.matrix.rows() != f.ambient_dim(u)) {
          report.errors.push_back("gate " + g.name + " on " + f.open_name(u) +
                                  " has wrong dimension");
          continue;
        }
        if (alg && alg->contains(g.matrix)) {
          const CheckAVerdict v = in_check_A(g.matrix, *alg);
          if (!v.member)
            report.errors.push_back("gate " + g.name + " on " + f.open_name(u) +
                                    " has a kernel (outside the admissible set)");
        } else if (alg) {
          report.errors.push_back("gate " + g.name + " on " + f.open_name(u) +
                                  " leaves the algebra span");
        }
      }
    }

    // Presheaf law r_VW o r_UV = r_UW on declared states along all chains.
    for (const auto& [u, rho] : f.assignments_.initial_states)
      for (OpenSet v : f.topology_.opens()) {
        if (v == 0 || v == u || (v & u) != v) continue;
        for (OpenSet w : f.topology_.opens()) {
          if (w == 0 || w == v || (w & v) != w) continue;
          const CMatrix two_step =
              f.restrict_raw(f.restrict_raw(rho.matrix(), u, v), v, w);
          const CMatrix one_step = f.restrict_raw(rho.matrix(), u, w);
          if (max_norm(two_step - one_step) > 1e-12)
            report.errors.push_back("restriction presheaf law fails along " +
                                    f.open_name(w) + " in " + f.open_name(v) + " in " +
                                    f.open_name(u));
        }
      }

    report.metadata.push_back("covariance: not checked");
    report.metadata.push_back("restriction: partial trace");
    if (!report.ok()) return {std::nullopt, report};
    return {std::move(f), report};
  }

  const FiniteTopology& topology() const { return topology_; }

  long ambient_dim(OpenSet u) const {
    long d = 1;
    for (const auto& label : topology_.labels_of(u))
      d *= assignments_.site_dims.at(label);
    return d;
  }

  /// Algebra attached to an open: the declared one, or the one inherited
  /// from the smallest declared superset under the canonical embedding.
  const MatrixStarAlgebra* declared_algebra(OpenSet u) const {
    auto it = assignments_.algebras.find(u);
    return it == assignments_.algebras.end() ? nullptr : &it->second;
  }

  /// Restriction map: partial trace over the factors of U not in V.
  DensityOperator restrict(const DensityOperator& rho_u, OpenSet u, OpenSet v) const {
    if ((v & u) != v) throw std::invalid_argument("restrict: opens not nested");
    return DensityOperator(restrict_raw(rho_u.matrix(), u, v));
  }

  /// Fiber over U: the orbit of the declared initial state under the
  /// declared gates. Empty (nullopt) when no initial state is declared.
  std::optional<std::vector<DensityOperator>> fiber(OpenSet u) const {
    {
      std::lock_guard<std::mutex> lock(cache_mutex_);
      auto it = fiber_cache_.find(u);
      if (it != fiber_cache_.end()) return it->second;
    }
    auto state_it = assignments_.initial_states.find(u);
    if (state_it == assignments_.initial_states.end()) return std::nullopt;
    GateSet gates;
    auto gates_it = assignments_.gate_sets.find(u);
    if (gates_it != assignments_.gate_sets.end()) gates = gates_it->second;
    auto states = orbit(state_it->second, gates, assignments_.orbit_depth,
                        assignments_.orbit_dedup_tol);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return fiber_cache_.emplace(u, std::move(states)).first->second;
  }

  /// Embed an operator living on open v into the space of a superset u.
  CMatrix embed_op(const CMatrix& op, OpenSet v, OpenSet u) const {
    if ((v & u) != v) throw std::invalid_argument("embed_op: opens not nested");
    const auto labels_u = topology_.labels_of(u);
    std::vector<int> dims;
    for (const auto& l : labels_u) dims.push_back(assignments_.site_dims.at(l));
    std::vector<int> positions;
    for (std::size_t i = 0; i < labels_u.size(); ++i)
      if (v & (OpenSet{1} << topology_.point_index(labels_u[i])))
        positions.push_back(static_cast<int>(i));
    return op_on_sites(op, positions, TensorShape(dims));
  }

  std::string open_name(OpenSet u) const {
    std::string s = "{";
    for (const auto& l : topology_.labels_of(u)) {
      if (s.size() > 1) s += ",";
      s += l;
    }
    return s + "}";
  }

  CMatrix restrict_raw(const CMatrix& m, OpenSet u, OpenSet v) const {
    const auto labels_u = topology_.labels_of(u);
    std::vector<int> dims, keep;
    for (std::size_t i = 0; i < labels_u.size(); ++i) {
      dims.push_back(assignments_.site_dims.at(labels_u[i]));
      if (v & (OpenSet{1} << topology_.point_index(labels_u[i])))
        keep.push_back(static_cast<int>(i));
    }
    return partial_trace(m, TensorShape(dims), keep);
  }

  const FibrationAssignments& assignments() const { return assignments_; }

 private:
  QuantumFibration(FiniteTopology t, FibrationAssignments a)
      : topology_(std::move(t)), assignments_(std::move(a)) {}

  FiniteTopology topology_;
  FibrationAssignments assignments_;
  mutable std::mutex cache_mutex_;
  mutable std::map<OpenSet, std::vector<DensityOperator>> fiber_cache_;

 public:
  QuantumFibration(QuantumFibration&& other) noexcept
      : topology_(std::move(other.topology_)),
        assignments_(std::move(other.assignments_)),
        fiber_cache_(std::move(other.fiber_cache_)) {}
};

/// User-declared causal disjointness relation between opens.
struct CausalNet {
  const QuantumFibration* fibration;
  std::vector<std::pair<OpenSet, OpenSet>> disjoint_pairs;
};

struct CausalityReport {
  bool ok = true;
  double worst_commutator = 0.0;
  std::optional<std::pair<OpenSet, OpenSet>> worst_pair;
  std::vector<std::string> violations;
};

/// For every declared disjoint pair, all cross-commutators of the embedded
/// algebra bases must vanish.
inline CausalityReport causality_check(const CausalNet& net, double tolerance = 1e-10) {
  CausalityReport report;
  const auto& f = *net.fibration;
  const OpenSet full = f.topology().full();
  for (const auto& [o1, o2] : net.disjoint_pairs) {
    const MatrixStarAlgebra* a1 = f.declared_algebra(o1);
    const MatrixStarAlgebra* a2 = f.declared_algebra(o2);
    if (!a1 || !a2) continue;
    double worst = 0.0;
    for (const auto& b1 : a1->basis())
      for (const auto& b2 : a2->basis()) {
        const CMatrix e1 = f.embed_op(b1, o1, full);
        const CMatrix e2 = f.embed_op(b2, o2, full);
        worst = std::max(worst, max_norm(e1 * e2 - e2 * e1));
      }
    if (worst > report.worst_commutator) {
      report.worst_commutator = worst;
      report.worst_pair = {o1, o2};
    }
    if (worst > tolerance) {
      report.ok = false;
      report.violations.push_back("causal commutation fails for " + f.open_name(o1) +
                                  " vs " + f.open_name(o2) + " (max commutator " +
                                  std::to_string(worst) + ")");
    }
  }
  return report;
}

/// Labeled CPTP edges between the fibers of two fibrations.
class QuantumNetwork {
 public:
  struct Edge {
    OpenSet source_open;
    OpenSet target_open;
    KrausChannel channel;
  };

  QuantumNetwork(const QuantumFibration* source, const QuantumFibration* target)
      : source_(source), target_(target) {}

  /// Registers an edge; the channel is re-validated eagerly (dims + Choi PSD).
  void connect(OpenSet u, OpenSet v, KrausChannel channel) {
    if (channel.input_dim() != source_->ambient_dim(u) ||
        channel.output_dim() != target_->ambient_dim(v))
      throw std::invalid_argument("connect: channel dims do not match fibers");
    if (!is_completely_positive(channel))
      throw std::invalid_argument("connect: channel is not completely positive");
    edges_.push_back({u, v, std::move(channel)});
  }

  DensityOperator transmit(std::size_t edge_index, const DensityOperator& rho) const {
    return apply(edges_.at(edge_index).channel, rho);
  }

  const std::vector<Edge>& edges() const { return edges_; }

 private:
  const QuantumFibration* source_;
  const QuantumFibration* target_;
  std::vector<Edge> edges_;
};

struct TrotterResult {
  DensityOperator state;
  double error_bound;  // first-order bound from adjacent-piece commutators
};

/// Ordered-product Trotter evolution exp(-i sum_j H_j t) approximated by
/// n_steps repetitions of the per-piece exponentials.
inline TrotterResult trotter_evolve(const DensityOperator& rho,
                                    const std::vector<HermitianOp>& pieces, double t,
                                    int n_steps) {
  if (pieces.empty() || n_steps < 1)
    throw std::invalid_argument("trotter_evolve: need pieces and steps");
  const long d = rho.dim();
  CMatrix step = CMatrix::Identity(d, d);
  for (const auto& h : pieces) step = expm_i(h, t / n_steps) * step;
  CMatrix u = CMatrix::Identity(d, d);
  for (int k = 0; k < n_steps; ++k) u = step * u;

  double bound = 0.0;
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    const CMatrix comm = pieces[i].matrix() * pieces[i + 1].matrix() -
                         pieces[i + 1].matrix() * pieces[i].matrix();
    bound += t * t * max_norm(comm) / (2.0 * n_steps);
  }
  return {DensityOperator(u * rho.matrix() * u.adjoint()), bound};
}

// ---- fibration bundle directory loader ----
// Layout: topology.json, algebras/*.json, states/*.json, gates/*.json,
// restrictions.json (optional), dims.json.

struct FibrationBundle {
  FiniteTopology topology;
  FibrationAssignments assignments;
};

inline FibrationBundle load_fibration_bundle(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  auto read_json = [](const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    return nlohmann::json::parse(in);
  };

  const nlohmann::json tj = read_json(dir / "topology.json");
  const TopologyFile tf = topology_file_from_json(tj);
  auto validated = FiniteTopology::validate(tf.points, tf.opens);
  if (std::holds_alternative<TopologyViolation>(validated))
    throw std::runtime_error("invalid topology: " +
                             std::get<TopologyViolation>(validated).describe());
  FiniteTopology topology = std::get<FiniteTopology>(std::move(validated));

  FibrationAssignments assignments;
  const nlohmann::json dims = read_json(dir / "dims.json");
  for (auto it = dims.begin(); it != dims.end(); ++it)
    assignments.site_dims[it.key()] = it.value().get<int>();

  auto open_of = [&](const nlohmann::json& j) {
    return topology.mask_of(j.at("open").get<std::vector<std::string>>());
  };
  if (fs::exists(dir / "algebras"))
    for (const auto& entry : fs::directory_iterator(dir / "algebras")) {
      const nlohmann::json j = read_json(entry.path());
      std::vector<CMatrix> gens;
      for (const auto& g : j.at("generators")) gens.push_back(matrix_from_json(g));
      const OpenSet u = open_of(j);
      long d = 1;
      for (const auto& l : topology.labels_of(u)) d *= assignments.site_dims.at(l);
      assignments.algebras.emplace(u, generate_algebra(gens, d));
    }
  if (fs::exists(dir / "states"))
    for (const auto& entry : fs::directory_iterator(dir / "states")) {
      const nlohmann::json j = read_json(entry.path());
      assignments.initial_states.emplace(open_of(j), density_from_json(j));
    }
  if (fs::exists(dir / "gates"))
    for (const auto& entry : fs::directory_iterator(dir / "gates")) {
      const nlohmann::json j = read_json(entry.path());
      assignments.gate_sets.emplace(open_of(j), gateset_from_json(j.at("gates")));
    }
  return FibrationBundle{std::move(topology), std::move(assignments)};
}

}  // namespace fibersim

#endif  // FIBERSIM_FIBRATION_HPP
