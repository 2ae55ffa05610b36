#ifndef FIBERSIM_POLYMER_HPP
#define FIBERSIM_POLYMER_HPP

#include "fibersim/correlation.hpp"
#include "fibersim/matcore.hpp"
#include "fibersim/states.hpp"

#include <string>
#include <vector>

namespace fibersim {

enum class UnitType { A, B };

/// Two-unit chain model: unit assignment, local operators, per-site couplings
/// and fields. Open chain by default; `ring` links the last site back to the
/// first.
struct PolymerSpec {
  std::vector<UnitType> units;  // site i -> unit type, 0-based
  CMatrix h_local_a, h_local_b;  // on-site Hamiltonians
  CMatrix h_int_a, h_int_b;      // interaction operators, same dims as local
  std::vector<double> j_aa, j_ab, j_ba, j_bb;  // per-link couplings, indexed by left site
  std::vector<double> field;                   // per-site field strength
  bool ring = false;

  int sites() const { return static_cast<int>(units.size()); }
  int local_dim(UnitType t) const {
    return static_cast<int>(t == UnitType::A ? h_local_a.rows() : h_local_b.rows());
  }
  const CMatrix& local_h(UnitType t) const {
    return t == UnitType::A ? h_local_a : h_local_b;
  }
  const CMatrix& int_op(UnitType t) const {
    return t == UnitType::A ? h_int_a : h_int_b;
  }

  TensorShape shape() const {
    std::vector<int> dims;
    for (UnitType t : units) dims.push_back(local_dim(t));
    return TensorShape(dims);
  }

  void validate() const {
    const int n = sites();
    if (n < 1) throw std::invalid_argument("PolymerSpec: no sites");
    auto check_square = [](const CMatrix& m, const char* what) {
      if (m.rows() < 1 || m.rows() != m.cols())
        throw std::invalid_argument(std::string("PolymerSpec: ") + what + " not square");
    };
    check_square(h_local_a, "H^A");
    check_square(h_local_b, "H^B");
    check_square(h_int_a, "interaction A");
    check_square(h_int_b, "interaction B");
    if (h_int_a.rows() != h_local_a.rows() || h_int_b.rows() != h_local_b.rows())
      throw std::invalid_argument("PolymerSpec: interaction/local dim mismatch");
    HermitianOp ha(h_local_a), hb(h_local_b);  // Hermiticity of on-site terms
    for (const auto* v : {&j_aa, &j_ab, &j_ba, &j_bb, &field})
      if (static_cast<int>(v->size()) != n)
        throw std::invalid_argument("PolymerSpec: coupling/field vector size != N");
    if (shape().total() > 1024)
      throw std::invalid_argument("PolymerSpec: ambient dimension exceeds 1024");
  }

  bool all_qubits() const {
    for (UnitType t : units)
      if (local_dim(t) != 2) return false;
    return true;
  }
};

/// Site index sets of the chain: unit labels and the four link classes,
/// keyed by the left site of each link. The last site carries no link on an
/// open chain.
struct LinkSets {
  std::vector<int> label_a, label_b;
  std::vector<int> link_aa, link_ab, link_bb, link_ba;
};

inline LinkSets link_sets(const PolymerSpec& spec) {
  LinkSets out;
  const int n = spec.sites();
  for (int i = 0; i < n; ++i)
    (spec.units[static_cast<std::size_t>(i)] == UnitType::A ? out.label_a : out.label_b)
        .push_back(i);
  const int last = spec.ring ? n : n - 1;
  for (int i = 0; i < last; ++i) {
    const UnitType c = spec.units[static_cast<std::size_t>(i)];
    const UnitType d = spec.units[static_cast<std::size_t>((i + 1) % n)];
    if (c == UnitType::A && d == UnitType::A) out.link_aa.push_back(i);
    if (c == UnitType::A && d == UnitType::B) out.link_ab.push_back(i);
    if (c == UnitType::B && d == UnitType::B) out.link_bb.push_back(i);
    if (c == UnitType::B && d == UnitType::A) out.link_ba.push_back(i);
  }
  return out;
}

namespace detail {

/// J * Op_i Op_{i+1} + h.c., placed on the chain. A Hermitian product term
/// therefore contributes twice its raw value; the formula is followed as
/// written rather than silently halved.
inline CMatrix link_term(const PolymerSpec& spec, int i, double coupling) {
  const int n = spec.sites();
  const int j = (i + 1) % n;
  const CMatrix& op_i = spec.int_op(spec.units[static_cast<std::size_t>(i)]);
  const CMatrix& op_j = spec.int_op(spec.units[static_cast<std::size_t>(j)]);
  const TensorShape shape = spec.shape();
  CMatrix term;
  if (j > i) {
    term = coupling * op_on_sites(tensor(op_i, op_j), {i, j}, shape);
  } else {  // ring wrap: sites must ascend, so the pair is (j, i)
    term = coupling * op_on_sites(tensor(op_j, op_i), {j, i}, shape);
  }
  return term + term.adjoint();
}

}  // namespace detail

/// Chain Hamiltonian: link terms with Hermitian conjugates over the four
/// link classes plus on-site field terms.
inline HermitianOp build_h_polymer(const PolymerSpec& spec) {
  spec.validate();
  const TensorShape shape = spec.shape();
  const long d = shape.total();
  const LinkSets links = link_sets(spec);
  CMatrix h = CMatrix::Zero(d, d);
  for (int i : links.link_aa) h += detail::link_term(spec, i, spec.j_aa[static_cast<std::size_t>(i)]);
  for (int i : links.link_ab) h += detail::link_term(spec, i, spec.j_ab[static_cast<std::size_t>(i)]);
  for (int i : links.link_bb) h += detail::link_term(spec, i, spec.j_bb[static_cast<std::size_t>(i)]);
  for (int i : links.link_ba) h += detail::link_term(spec, i, spec.j_ba[static_cast<std::size_t>(i)]);
  for (int i = 0; i < spec.sites(); ++i) {
    const UnitType t = spec.units[static_cast<std::size_t>(i)];
    h += spec.field[static_cast<std::size_t>(i)] *
         op_on_sites(spec.local_h(t), {i}, shape);
  }
  return HermitianOp(std::move(h), 1e-9);
}

/// Mixer -sum_i X_i. The ground state is the all-plus product with energy -N.
inline HermitianOp build_h_mixer(const PolymerSpec& spec) {
  if (!spec.all_qubits())
    throw std::invalid_argument("build_h_mixer: requires spin-1/2 sites");
  const TensorShape shape = spec.shape();
  CMatrix h = CMatrix::Zero(shape.total(), shape.total());
  for (int i = 0; i < spec.sites(); ++i)
    h -= op_on_sites(gates::pauli_x(), {i}, shape);
  return HermitianOp(std::move(h));
}

/// Non-interacting Hamiltonian sum_i H^{u(i)}_i.
inline HermitianOp build_h_noninteracting(const PolymerSpec& spec) {
  spec.validate();
  const TensorShape shape = spec.shape();
  CMatrix h = CMatrix::Zero(shape.total(), shape.total());
  for (int i = 0; i < spec.sites(); ++i)
    h += op_on_sites(spec.local_h(spec.units[static_cast<std::size_t>(i)]), {i}, shape);
  return HermitianOp(std::move(h));
}

/// Monotone schedule f: [0,1] -> [0,1] with f(0)=0, f(1)=1.
class Schedule {
 public:
  static Schedule linear() { return Schedule(Kind::Linear, {}); }
  static Schedule smoothstep() { return Schedule(Kind::Smoothstep, {}); }
  static Schedule table(std::vector<std::pair<double, double>> points) {
    return Schedule(Kind::Table, std::move(points));
  }

  double operator()(double s) const {
    switch (kind_) {
      case Kind::Linear: return s;
      case Kind::Smoothstep: return s * s * (3.0 - 2.0 * s);
      case Kind::Table: {
        if (s <= table_.front().first) return table_.front().second;
        if (s >= table_.back().first) return table_.back().second;
        for (std::size_t i = 1; i < table_.size(); ++i)
          if (s <= table_[i].first) {
            const auto& [t0, f0] = table_[i - 1];
            const auto& [t1, f1] = table_[i];
            return f0 + (f1 - f0) * (s - t0) / (t1 - t0);
          }
        return table_.back().second;
      }
    }
    return s;
  }

  std::string name() const {
    switch (kind_) {
      case Kind::Linear: return "linear";
      case Kind::Smoothstep: return "smoothstep";
      case Kind::Table: return "table";
    }
    return "?";
  }

 private:
  enum class Kind { Linear, Smoothstep, Table };
  Schedule(Kind k, std::vector<std::pair<double, double>> table)
      : kind_(k), table_(std::move(table)) {
    if (kind_ == Kind::Table) {
      if (table_.size() < 2 || table_.front() != std::pair{0.0, 0.0} ||
          std::abs(table_.back().first - 1.0) > 1e-12 ||
          std::abs(table_.back().second - 1.0) > 1e-12)
        throw std::invalid_argument("Schedule: table must run from (0,0) to (1,1)");
      for (std::size_t i = 1; i < table_.size(); ++i)
        if (table_[i].first <= table_[i - 1].first ||
            table_[i].second < table_[i - 1].second)
          throw std::invalid_argument("Schedule: table must be increasing");
    }
  }
  Kind kind_;
  std::vector<std::pair<double, double>> table_;
};

/// Time grid, per-step pure states, and monitor series of one evolution run.
struct Trajectory {
  TensorShape shape;
  std::vector<double> times;
  std::vector<CVector> states;            // state vector at each grid point
  std::vector<double> energy;             // <H(t)> at each grid point
  std::vector<std::vector<double>> ee_cuts;  // entanglement entropy per cut
  double trace_drift = 0.0;

  DensityOperator state_at(std::size_t k) const {
    const CVector& v = states.at(k);
    return DensityOperator(v * v.adjoint() / v.squaredNorm());
  }
  std::size_t steps() const { return times.size(); }
};

namespace detail {

inline std::vector<double> cut_entropies(const CVector& psi, const TensorShape& shape) {
  std::vector<double> out;
  const CMatrix rho = psi * psi.adjoint();
  for (int cut = 1; cut < shape.factors(); ++cut) {
    std::vector<int> keep;
    for (int i = 0; i < cut; ++i) keep.push_back(i);
    out.push_back(von_neumann_entropy(partial_trace(rho, shape, keep)));
  }
  return out;
}

/// Piecewise-constant propagation of a pure state under a per-step
/// Hamiltonian builder, recording monitors on the way.
template <typename HamiltonianAt>
Trajectory propagate(const PolymerSpec& spec, CVector psi, double total_time,
                     int n_steps, HamiltonianAt&& hamiltonian_at) {
  const TensorShape shape = spec.shape();
  Trajectory traj{shape, {}, {}, {}, {}, 0.0};
  const double dt = total_time / std::max(1, n_steps);
  const double norm0 = psi.norm();

  auto record = [&](double t, const HermitianOp& h) {
    traj.times.push_back(t);
    traj.states.push_back(psi);
    traj.energy.push_back((psi.adjoint() * h.matrix() * psi)(0).real() / psi.squaredNorm());
    traj.ee_cuts.push_back(cut_entropies(psi / psi.norm(), shape));
    traj.trace_drift = std::max(traj.trace_drift, std::abs(psi.squaredNorm() - norm0 * norm0));
  };

  record(0.0, hamiltonian_at(0.0));
  if (total_time <= 0.0) return traj;
  for (int k = 0; k < n_steps; ++k) {
    const double t_k = k * dt;
    const HermitianOp h = hamiltonian_at(t_k);
    psi = expm_i(h, dt) * psi;
    record((k + 1) * dt, hamiltonian_at((k + 1) * dt));
  }
  return traj;
}

}  // namespace detail

/// Quantum annealing H(t) = f(t/T) H_polymer + (1 - f(t/T)) H_mixer from the
/// all-plus mixer ground state.
inline Trajectory anneal(const PolymerSpec& spec, const Schedule& schedule,
                         double total_time, int n_steps) {
  spec.validate();
  if (!spec.all_qubits())
    throw std::invalid_argument("anneal: requires spin-1/2 sites");
  const HermitianOp h_problem = build_h_polymer(spec);
  const HermitianOp h_mixer = build_h_mixer(spec);

  CVector psi(1);
  psi(0) = 1.0;
  for (int i = 0; i < spec.sites(); ++i) psi = tensor(psi, CVector(gates::plus_state()));

  auto hamiltonian_at = [&](double t) {
    const double f = total_time > 0 ? schedule(std::clamp(t / total_time, 0.0, 1.0)) : 0.0;
    return HermitianOp(f * h_problem.matrix() + (1.0 - f) * h_mixer.matrix(), 1e-9);
  };
  return detail::propagate(spec, std::move(psi), total_time, n_steps, hamiltonian_at);
}

/// Step tables for the general time-dependent Hamiltonian: values over the
/// normalized time [0,1], piecewise-linearly interpolated.
struct ParameterTable {
  std::vector<double> grid;                  // ascending, covering [0,1]
  std::vector<std::vector<double>> values;   // per grid point, one value per site

  std::vector<double> at(double s) const {
    if (grid.empty()) throw std::invalid_argument("ParameterTable: empty");
    if (s <= grid.front()) return values.front();
    if (s >= grid.back()) return values.back();
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (s <= grid[i]) {
        const double w = (s - grid[i - 1]) / (grid[i] - grid[i - 1]);
        std::vector<double> out(values[i].size());
        for (std::size_t k = 0; k < out.size(); ++k)
          out[k] = (1.0 - w) * values[i - 1][k] + w * values[i][k];
        return out;
      }
    return values.back();
  }
};

/// General evolution with per-step Hamiltonian rebuild from coupling and
/// field tables. Boundary conditions: J_i(0) = 0 for every site; h_i(0)
/// matches the declared per-site field. At s = 1 the tables must realize the
/// declared target couplings.
inline Trajectory evolve_general(const PolymerSpec& spec, const ParameterTable& j_table,
                                 const ParameterTable& h_table, double total_time,
                                 int n_steps) {
  spec.validate();
  const int n = spec.sites();
  const auto j0 = j_table.at(0.0);
  const auto h0 = h_table.at(0.0);
  if (static_cast<int>(j0.size()) != n || static_cast<int>(h0.size()) != n)
    throw std::invalid_argument("evolve_general: table width != N");
  for (int i = 0; i < n; ++i)
    if (std::abs(j0[static_cast<std::size_t>(i)]) > 1e-12)
      throw std::invalid_argument("evolve_general: J_i(0) must vanish (site " +
                                  std::to_string(i) + ")");
  for (int i = 0; i < n; ++i)
    if (std::abs(h0[static_cast<std::size_t>(i)] - spec.field[static_cast<std::size_t>(i)]) > 1e-12)
      throw std::invalid_argument("evolve_general: h_i(0) must match the declared field (site " +
                                  std::to_string(i) + ")");
  // Final configuration must realize the declared target polymer couplings.
  {
    const auto j1 = j_table.at(1.0);
    const auto h1 = h_table.at(1.0);
    const LinkSets links = link_sets(spec);
    auto expect = [&](const std::vector<int>& sites, const std::vector<double>& target) {
      for (int i : sites)
        if (std::abs(j1[static_cast<std::size_t>(i)] - target[static_cast<std::size_t>(i)]) > 1e-9)
          throw std::invalid_argument("evolve_general: J_i(1) does not realize the target (site " +
                                      std::to_string(i) + ")");
    };
    expect(links.link_aa, spec.j_aa);
    expect(links.link_ab, spec.j_ab);
    expect(links.link_bb, spec.j_bb);
    expect(links.link_ba, spec.j_ba);
    for (int i = 0; i < n; ++i)
      if (std::abs(h1[static_cast<std::size_t>(i)] - spec.field[static_cast<std::size_t>(i)]) > 1e-9)
        throw std::invalid_argument("evolve_general: h_i(1) does not realize the target field");
  }

  const TensorShape shape = spec.shape();
  const long d = shape.total();
  auto hamiltonian_at = [&](double t) {
    const double s = total_time > 0 ? std::clamp(t / total_time, 0.0, 1.0) : 0.0;
    const auto j = j_table.at(s);
    const auto h = h_table.at(s);
    CMatrix ham = CMatrix::Zero(d, d);
    const int last = spec.ring ? n : n - 1;
    for (int i = 0; i < last; ++i)
      if (std::abs(j[static_cast<std::size_t>(i)]) > 0.0)
        ham += detail::link_term(spec, i, j[static_cast<std::size_t>(i)]);
    for (int i = 0; i < n; ++i)
      ham += h[static_cast<std::size_t>(i)] *
             op_on_sites(spec.local_h(spec.units[static_cast<std::size_t>(i)]), {i}, shape);
    return HermitianOp(std::move(ham), 1e-9);
  };

  // Initial state: product of per-site ground states of h_i(0) H^{u(i)}.
  CVector psi(1);
  psi(0) = 1.0;
  for (int i = 0; i < n; ++i) {
    const UnitType t = spec.units[static_cast<std::size_t>(i)];
    const CMatrix local = h0[static_cast<std::size_t>(i)] * spec.local_h(t);
    const EigResult e = eig_hermitian(HermitianOp(local, 1e-9));
    psi = tensor(psi, CVector(e.eigenvectors.col(0)));
  }
  return detail::propagate(spec, std::move(psi), total_time, n_steps, hamiltonian_at);
}

/// Marginal of the trajectory state on one member of a pairwise-disjoint
/// site cover.
inline DensityOperator local_state(const Trajectory& traj, std::size_t step,
                                   const std::vector<int>& cover_sites) {
  const CVector& psi = traj.states.at(step);
  const CMatrix rho = psi * psi.adjoint() / psi.squaredNorm();
  return DensityOperator(partial_trace(rho, traj.shape, cover_sites));
}

// ---- polymer config JSON ----
// {"units": "ABAB", "local_ops": {...}, "couplings": {...}, "fields": [...],
//  "schedule": {...}, "run": {...}}

inline CMatrix named_operator(const nlohmann::json& j) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "X") return gates::pauli_x();
    if (name == "Y") return gates::pauli_y();
    if (name == "Z") return gates::pauli_z();
    if (name == "I") return gates::identity(2);
    throw std::invalid_argument("unknown operator name: " + name);
  }
  return matrix_from_json(j);
}

inline PolymerSpec polymer_spec_from_json(const nlohmann::json& j) {
  PolymerSpec spec;
  const std::string units = j.at("units").get<std::string>();
  for (char c : units) {
    if (c == 'A') spec.units.push_back(UnitType::A);
    else if (c == 'B') spec.units.push_back(UnitType::B);
    else throw std::invalid_argument("units must be a string over {A,B}");
  }
  const auto& ops = j.at("local_ops");
  spec.h_local_a = named_operator(ops.at("HA"));
  spec.h_local_b = named_operator(ops.at("HB"));
  spec.h_int_a = ops.contains("HA_int") ? named_operator(ops.at("HA_int")) : spec.h_local_a;
  spec.h_int_b = ops.contains("HB_int") ? named_operator(ops.at("HB_int")) : spec.h_local_b;

  const int n = spec.sites();
  auto vec_of = [&](const nlohmann::json& v) {
    if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(n), v.get<double>());
    auto out = v.get<std::vector<double>>();
    if (static_cast<int>(out.size()) != n)
      throw std::invalid_argument("coupling/field vector length != number of sites");
    return out;
  };
  const auto& cpl = j.at("couplings");
  spec.j_aa = vec_of(cpl.value("J_AA", nlohmann::json(0.0)));
  spec.j_ab = vec_of(cpl.value("J_AB", nlohmann::json(0.0)));
  spec.j_ba = vec_of(cpl.value("J_BA", nlohmann::json(0.0)));
  spec.j_bb = vec_of(cpl.value("J_BB", nlohmann::json(0.0)));
  spec.field = vec_of(j.value("fields", nlohmann::json(0.0)));
  spec.ring = j.value("ring", false);
  spec.validate();
  return spec;
}

inline Schedule schedule_from_json(const nlohmann::json& j) {
  const std::string kind = j.value("kind", "linear");
  if (kind == "linear") return Schedule::linear();
  if (kind == "smoothstep") return Schedule::smoothstep();
  if (kind == "table") {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : j.at("points")) pts.emplace_back(p[0].get<double>(), p[1].get<double>());
    return Schedule::table(std::move(pts));
  }
  throw std::invalid_argument("unknown schedule kind: " + kind);
}

}  // namespace fibersim

#endif  // FIBERSIM_POLYMER_HPP
