#ifndef FIBERSIM_SEMICLASSICAL_HPP
#define FIBERSIM_SEMICLASSICAL_HPP

#include "fibersim/algebra.hpp"
#include "fibersim/correlation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fibersim {

/// Rank-one operator Schmidt factorization across a bipartition. Returns the
/// factors (a = u (x) v on the A|Ac ordering) when the realigned matrix has
/// numerical Schmidt rank one.
struct LocalFactorization {
  CMatrix u, v;
};

inline std::optional<LocalFactorization> local_factorization(
    const CMatrix& a, const Bipartition& b, double rank_tol = 1e-9) {
  const auto& shape = b.shape();
  shape.require_total(a.rows());
  const long da = b.dim_a(), db = b.dim_b();
  const auto strides = shape.strides();
  const auto part_a = b.part_a();
  const auto part_b = b.complement();

  auto split = [&](long full, long& ia, long& ib) {
    ia = 0;
    ib = 0;
    long acc_a = 1, acc_b = 1;
    for (int f = shape.factors() - 1; f >= 0; --f) {
      const long digit = (full / strides[static_cast<std::size_t>(f)]) % shape.dim(f);
      if (std::binary_search(part_a.begin(), part_a.end(), f)) {
        ia += digit * acc_a;
        acc_a *= shape.dim(f);
      } else {
        ib += digit * acc_b;
        acc_b *= shape.dim(f);
      }
    }
  };

  // Realign: R_{(ia ja), (ib jb)} = a_{(ia,ib),(ja,jb)}.
  CMatrix realigned(da * da, db * db);
  for (long r = 0; r < a.rows(); ++r) {
    long ra, rb;
    split(r, ra, rb);
    for (long c = 0; c < a.cols(); ++c) {
      long ca, cb;
      split(c, ca, cb);
      realigned(ra * da + ca, rb * db + cb) = a(r, c);
    }
  }
  Eigen::JacobiSVD<CMatrix> svd(realigned, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() > 1 && sv(1) > rank_tol * std::max(1.0, sv(0))) return std::nullopt;
  LocalFactorization lf;
  lf.u = CMatrix(da, da);
  lf.v = CMatrix(db, db);
  for (long i = 0; i < da; ++i)
    for (long j = 0; j < da; ++j) lf.u(i, j) = svd.matrixU()(i * da + j, 0) * std::sqrt(sv(0));
  for (long i = 0; i < db; ++i)
    for (long j = 0; j < db; ++j) lf.v(i, j) = std::conj(svd.matrixV()(i * db + j, 0)) * std::sqrt(sv(0));
  return lf;
}

inline bool is_unitary_up_to_scale(const CMatrix& m, double tolerance = 1e-8) {
  const CMatrix g = m.adjoint() * m;
  const double scale = g.trace().real() / static_cast<double>(m.rows());
  if (scale <= tolerance) return false;
  return max_norm(g - scale * CMatrix::Identity(m.rows(), m.cols())) <= tolerance * scale;
}

/// True when a is (a scalar multiple of) a tensor product of unitaries
/// across the bipartition.
inline bool is_local_unitary(const CMatrix& a, const Bipartition& b,
                             double tolerance = 1e-8) {
  const auto lf = local_factorization(a, b);
  if (!lf) return false;
  return is_unitary_up_to_scale(lf->u, tolerance) && is_unitary_up_to_scale(lf->v, tolerance);
}

/// f(rho) <= tol: rho counts as a classical state for the functional.
inline bool in_D0(const DensityOperator& rho, const CorrelationFunctional& f,
                  double tolerance = 1e-8) {
  return f.eval(rho) <= tolerance;
}

enum class MembershipKind { CertifiedMember, ProbeMember, NonMember };

/// Verdict with its epistemic status made explicit: the universal quantifier
/// over all states is not checkable numerically, so membership is either
/// certified structurally, supported by probes, or refuted by a witness.
struct SemiclassicalVerdict {
  std::string operator_id;
  std::string functional;
  MembershipKind kind;
  int probes_checked = 0;
  int probes_vanished = 0;
  double max_increase = 0.0;
  std::optional<DensityOperator> witness;  // for NonMember: f increased here
  double witness_increase = 0.0;

  bool member() const { return kind != MembershipKind::NonMember; }
};

inline std::vector<DensityOperator> default_probe_states(const Bipartition& b,
                                                         Rng& rng, int n_mixed = 200,
                                                         int n_pure = 50) {
  const long d = b.shape().total();
  std::vector<DensityOperator> probes;
  for (int i = 0; i < n_mixed; ++i)
    probes.emplace_back(rng.hs_random_density(d));
  for (int i = 0; i < n_pure; ++i)
    probes.push_back(DensityOperator::pure(rng.haar_pure_state(d)));
  // Extremal anchors for the 2-qubit case.
  if (d == 4) {
    probes.push_back(DensityOperator::pure(gates::bell_phi_plus()));
    probes.push_back(DensityOperator::pure(
        tensor(CVector(gates::plus_state()), CVector(gates::basis_vector(2, 0)))));
    probes.push_back(DensityOperator::pure(gates::basis_vector(4, 0)));
  }
  return probes;
}

/// Membership test for the semiclassical set of a correlation functional.
inline SemiclassicalVerdict in_Af(const CMatrix& a, const CorrelationFunctional& f,
                                  const Bipartition& b,
                                  const std::vector<DensityOperator>& probes,
                                  double tolerance = 1e-8,
                                  const std::string& operator_id = "op") {
  SemiclassicalVerdict v;
  v.operator_id = operator_id;
  v.functional = f.name;

  if (f.local_unitary_invariant && is_local_unitary(a, b)) {
    v.kind = MembershipKind::CertifiedMember;
    return v;
  }

  v.kind = MembershipKind::ProbeMember;
  for (const auto& rho : probes) {
    ++v.probes_checked;
    const auto image = conj_act(a, rho);
    if (!image) {
      ++v.probes_vanished;
      continue;
    }
    const double before = f.eval(rho);
    const double after = f.eval(normalize(*image));
    const double delta = after - before;
    v.max_increase = std::max(v.max_increase, delta);
    if (delta > tolerance) {
      v.kind = MembershipKind::NonMember;
      v.witness = rho;
      v.witness_increase = delta;
      return v;
    }
  }
  return v;
}

struct ClosureViolation {
  std::vector<std::string> word;
  std::size_t seed_index;
  double f_value;
};

struct ClosureReport {
  int words_applied = 0;
  int vanished = 0;
  std::vector<ClosureViolation> violations;
};

/// Applies random words of verified semiclassical gates to classical seeds
/// and checks the images stay classical. A violation falsifies a membership
/// verdict, not the closure statement itself.
inline ClosureReport closure_test(const CorrelationFunctional& f, const GateSet& gates,
                                  const std::vector<DensityOperator>& seeds,
                                  int n_words, int max_len, double tolerance, Rng& rng) {
  ClosureReport report;
  if (gates.gates.empty() || seeds.empty()) return report;
  for (int w = 0; w < n_words; ++w) {
    const std::size_t seed_idx = rng.integer(seeds.size());
    const int len = 1 + static_cast<int>(rng.integer(static_cast<std::uint64_t>(max_len)));
    std::vector<std::string> word;
    std::optional<UnnormalizedState> state{UnnormalizedState(seeds[seed_idx].matrix())};
    for (int k = 0; k < len && state; ++k) {
      const auto& g = gates.gates[rng.integer(gates.gates.size())];
      word.push_back(g.name);
      state = conj_act(g.matrix, *state);
    }
    ++report.words_applied;
    if (!state) {
      ++report.vanished;
      continue;
    }
    const DensityOperator out = normalize(*state);
    const double value = f.eval(out);
    if (value > tolerance)
      report.violations.push_back({word, seed_idx, value});
  }
  return report;
}

enum class GroupTestMode { EqualitySet, StrictSet };

struct GroupStructureReport {
  GroupTestMode mode;
  bool identity_ok = true;
  bool closure_ok = true;
  bool inverses_ok = true;          // equality mode: inverses preserve f
  int strict_elements_found = 0;     // strict mode
  int inverse_exclusions_confirmed = 0;
  std::vector<std::string> notes;

  bool passes() const { return identity_ok && closure_ok && inverses_ok; }
};

/// Equality mode checks the group axioms of the f-preserving invertible
/// elements on probe states. Strict mode confirms that the inverse of any
/// strictly f-decreasing element increases f on the decreased image, so the
/// strictly-decreasing set has no inverses and is not a group.
inline GroupStructureReport group_structure_test(const GateSet& set,
                                                 const CorrelationFunctional& f,
                                                 GroupTestMode mode,
                                                 const std::vector<DensityOperator>& probes,
                                                 double tolerance = 1e-8) {
  GroupStructureReport report;
  report.mode = mode;

  auto delta_f = [&](const CMatrix& a, const DensityOperator& rho)
      -> std::optional<double> {
    const auto image = conj_act(a, rho);
    if (!image) return std::nullopt;
    return f.eval(normalize(*image)) - f.eval(rho);
  };

  if (mode == GroupTestMode::EqualitySet) {
    for (const auto& g : set.gates) {
      Eigen::FullPivLU<CMatrix> lu(g.matrix);
      if (!lu.isInvertible()) {
        report.inverses_ok = false;
        report.notes.push_back("non-invertible: " + g.name);
        continue;
      }
      const CMatrix inv = lu.inverse();
      for (const auto& rho : probes) {
        const auto d1 = delta_f(g.matrix, rho);
        if (d1 && std::abs(*d1) > tolerance) {
          report.closure_ok = false;
          report.notes.push_back("f not preserved by " + g.name);
          break;
        }
        const auto d2 = delta_f(inv, rho);
        if (d2 && std::abs(*d2) > tolerance) {
          report.inverses_ok = false;
          report.notes.push_back("f not preserved by inverse of " + g.name);
          break;
        }
      }
      for (const auto& h : set.gates) {
        bool bad = false;
        for (const auto& rho : probes) {
          const auto d = delta_f(g.matrix * h.matrix, rho);
          if (d && std::abs(*d) > tolerance) {
            bad = true;
            break;
          }
        }
        if (bad) {
          report.closure_ok = false;
          report.notes.push_back("product breaks preservation: " + g.name + "*" + h.name);
        }
      }
    }
    return report;
  }

  // Strict mode.
  for (const auto& g : set.gates) {
    std::optional<std::pair<DensityOperator, double>> decrease;
    for (const auto& rho : probes) {
      const auto d = delta_f(g.matrix, rho);
      if (d && *d < -tolerance) {
        decrease = {rho, *d};
        break;
      }
    }
    if (!decrease) continue;
    ++report.strict_elements_found;
    Eigen::FullPivLU<CMatrix> lu(g.matrix);
    if (!lu.isInvertible()) {
      report.notes.push_back("strictly decreasing but singular: " + g.name);
      continue;
    }
    const CMatrix inv = lu.inverse();
    const auto image = conj_act(g.matrix, decrease->first);
    if (!image) continue;
    const auto back = delta_f(inv, normalize(*image));
    if (back && *back > tolerance) {
      ++report.inverse_exclusions_confirmed;
    } else {
      report.inverses_ok = false;
      report.notes.push_back("inverse of " + g.name + " did not restore f on the image");
    }
  }
  if (report.strict_elements_found == 0)
    report.notes.push_back("no strictly decreasing element witnessed");
  return report;
}

}  // namespace fibersim

#endif  // FIBERSIM_SEMICLASSICAL_HPP
