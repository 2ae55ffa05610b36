#ifndef FIBERSIM_STATES_HPP
#define FIBERSIM_STATES_HPP

#include "fibersim/matcore.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fibersim {

struct StateTolerances {
  double tau_h = tol::hermiticity;
  double tau_p = tol::psd;
  double tau_t = tol::trace;
};

/// Hermitian PSD operator with strictly positive trace (an element of the
/// unnormalized state set). Normalizes to a DensityOperator.
class UnnormalizedState {
 public:
  explicit UnnormalizedState(CMatrix m, StateTolerances tols = {})
      : mat_(std::move(m)), tols_(tols) {
    HermitianOp check(mat_, tols_.tau_h);  // validates shape + hermiticity
    mat_ = (mat_ + mat_.adjoint()) / 2.0;  // symmetrize roundoff
    const double mineig = min_eigenvalue(mat_);
    if (mineig < -tols_.tau_p)
      throw std::invalid_argument("UnnormalizedState: min eigenvalue " +
                                  std::to_string(mineig));
    if (mat_.trace().real() <= tols_.tau_t)
      throw std::invalid_argument("UnnormalizedState: trace not positive");
  }

  const CMatrix& matrix() const { return mat_; }
  long dim() const { return mat_.rows(); }
  double trace() const { return mat_.trace().real(); }
  const StateTolerances& tolerances() const { return tols_; }

 private:
  CMatrix mat_;
  StateTolerances tols_;
};

/// Hermitian PSD unit-trace matrix.
class DensityOperator {
 public:
  explicit DensityOperator(CMatrix m, StateTolerances tols = {})
      : state_(std::move(m), tols) {
    const double tr = state_.trace();
    if (std::abs(tr - 1.0) > tols.tau_t)
      throw std::invalid_argument("DensityOperator: |Tr - 1| = " +
                                  std::to_string(std::abs(tr - 1.0)));
  }

  static DensityOperator pure(const CVector& psi, StateTolerances tols = {}) {
    CVector n = psi / psi.norm();
    return DensityOperator(n * n.adjoint(), tols);
  }

  const CMatrix& matrix() const { return state_.matrix(); }
  long dim() const { return state_.dim(); }

 private:
  UnnormalizedState state_;
};

/// sigma / Tr(sigma). Idempotent on density operators.
inline DensityOperator normalize(const UnnormalizedState& sigma) {
  return DensityOperator(sigma.matrix() / sigma.trace(), sigma.tolerances());
}

/// The conjugation action a rho a*. Returns nullopt (Vanished) when the
/// image trace falls below the trace cut-off, i.e. the state left the
/// unnormalized-state set. Vanished is absorbing.
inline std::optional<UnnormalizedState> conj_act(const CMatrix& a,
                                                 const UnnormalizedState& sigma) {
  if (a.cols() != sigma.dim())
    throw std::invalid_argument("conj_act: dimension mismatch");
  CMatrix image = a * sigma.matrix() * a.adjoint();
  if (image.trace().real() <= sigma.tolerances().tau_t) return std::nullopt;
  return UnnormalizedState(std::move(image), sigma.tolerances());
}

inline std::optional<UnnormalizedState> conj_act(const CMatrix& a,
                                                 const DensityOperator& rho) {
  return conj_act(a, UnnormalizedState(rho.matrix()));
}

/// Tr(rho^2); 1 exactly for pure states.
inline double purity(const DensityOperator& rho) {
  return (rho.matrix() * rho.matrix()).trace().real();
}

inline bool is_pure(const DensityOperator& rho, double slack = 1e-9) {
  return purity(rho) >= 1.0 - slack;
}

/// Kraus operators grouped by measurement outcome.
struct KrausOutcomeFamily {
  std::vector<std::string> labels;                // one per outcome
  std::vector<std::vector<CMatrix>> operators;    // parallel to labels

  double completeness_residual(long dim) const {
    CMatrix acc = CMatrix::Zero(dim, dim);
    for (const auto& group : operators)
      for (const auto& e : group) acc += e.adjoint() * e;
    return max_norm(acc - CMatrix::Identity(dim, dim));
  }
};

struct MeasureOutcome {
  std::string label;
  double probability;
  std::optional<DensityOperator> post_state;  // nullopt when the branch vanished
};

/// Generalized measurement: p_k = Tr(sum_j E^k_j rho E^k_j*), with normalized
/// post-states. Completeness sum_kj E*E = I is enforced up front.
inline std::vector<MeasureOutcome> measure(const DensityOperator& rho,
                                           const KrausOutcomeFamily& family) {
  const double residual = family.completeness_residual(rho.dim());
  if (residual > tol::completeness)
    throw std::invalid_argument("measure: completeness violated, residual " +
                                std::to_string(residual));
  std::vector<MeasureOutcome> outcomes;
  for (std::size_t k = 0; k < family.operators.size(); ++k) {
    CMatrix branch = CMatrix::Zero(rho.dim(), rho.dim());
    for (const auto& e : family.operators[k])
      branch += e * rho.matrix() * e.adjoint();
    const double p = branch.trace().real();
    MeasureOutcome out{family.labels[k], p, std::nullopt};
    if (p > tol::trace)
      out.post_state = DensityOperator(branch / p);
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

// ---- state JSON: matrix fields plus {"kind": "density"|"unnormalized"} ----

inline nlohmann::json density_to_json(const DensityOperator& rho) {
  nlohmann::json j = matrix_to_json(rho.matrix());
  j["kind"] = "density";
  return j;
}

inline DensityOperator density_from_json(const nlohmann::json& j) {
  CMatrix m = matrix_from_json(j);
  const std::string kind = j.value("kind", "density");
  if (kind == "unnormalized") return normalize(UnnormalizedState(std::move(m)));
  return DensityOperator(std::move(m));
}

}  // namespace fibersim

#endif  // FIBERSIM_STATES_HPP
