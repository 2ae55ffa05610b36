#ifndef FIBERSIM_CHANNELS_HPP
#define FIBERSIM_CHANNELS_HPP

#include "fibersim/matcore.hpp"
#include "fibersim/states.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fibersim {

/// A CPTP map in Kraus form. Completeness sum E*E = I is enforced at
/// construction; complete positivity then holds by construction and is
/// re-checkable through the Choi matrix.
class KrausChannel {
 public:
  KrausChannel(long input_dim, long output_dim, std::vector<CMatrix> kraus,
               std::vector<std::vector<int>> outcome_groups = {})
      : in_(input_dim), out_(output_dim), kraus_(std::move(kraus)),
        groups_(std::move(outcome_groups)) {
    if (kraus_.empty()) throw std::invalid_argument("KrausChannel: no operators");
    for (const auto& e : kraus_)
      if (e.rows() != out_ || e.cols() != in_)
        throw std::invalid_argument("KrausChannel: operator shape mismatch");
    CMatrix acc = CMatrix::Zero(in_, in_);
    for (const auto& e : kraus_) acc += e.adjoint() * e;
    residual_ = max_norm(acc - CMatrix::Identity(in_, in_));
    if (residual_ > tol::completeness)
      throw std::invalid_argument("KrausChannel: completeness residual " +
                                  std::to_string(residual_));
    for (const auto& g : groups_)
      for (int i : g)
        if (i < 0 || i >= static_cast<int>(kraus_.size()))
          throw std::invalid_argument("KrausChannel: outcome group index out of range");
  }

  long input_dim() const { return in_; }
  long output_dim() const { return out_; }
  const std::vector<CMatrix>& kraus() const { return kraus_; }
  const std::vector<std::vector<int>>& outcome_groups() const { return groups_; }
  double completeness_residual() const { return residual_; }

  CMatrix apply_raw(const CMatrix& rho) const {
    if (rho.rows() != in_ || rho.cols() != in_)
      throw std::invalid_argument("KrausChannel: state dim mismatch");
    CMatrix out = CMatrix::Zero(out_, out_);
    for (const auto& e : kraus_) out += e * rho * e.adjoint();
    return out;
  }

 private:
  long in_, out_;
  std::vector<CMatrix> kraus_;
  std::vector<std::vector<int>> groups_;
  double residual_;
};

inline DensityOperator apply(const KrausChannel& c, const DensityOperator& rho) {
  return DensityOperator(c.apply_raw(rho.matrix()));
}

/// Positive-operator valued measure: Hermitian PSD effects summing to I.
class Povm {
 public:
  struct Effect {
    std::string label;
    CMatrix matrix;
  };

  explicit Povm(std::vector<Effect> effects) : effects_(std::move(effects)) {
    if (effects_.empty()) throw std::invalid_argument("Povm: no effects");
    const long d = effects_.front().matrix.rows();
    CMatrix acc = CMatrix::Zero(d, d);
    for (const auto& e : effects_) {
      if (e.matrix.rows() != d || e.matrix.cols() != d)
        throw std::invalid_argument("Povm: effect dim mismatch");
      if (hermiticity_defect(e.matrix) > tol::hermiticity)
        throw std::invalid_argument("Povm: non-Hermitian effect " + e.label);
      if (min_eigenvalue((e.matrix + e.matrix.adjoint()) / 2.0) < -tol::psd)
        throw std::invalid_argument("Povm: effect not PSD: " + e.label);
      acc += e.matrix;
    }
    if (max_norm(acc - CMatrix::Identity(d, d)) > tol::completeness)
      throw std::invalid_argument("Povm: effects do not sum to identity");
  }

  const std::vector<Effect>& effects() const { return effects_; }
  long dim() const { return effects_.front().matrix.rows(); }

  double probability(std::size_t k, const DensityOperator& rho) const {
    return (effects_.at(k).matrix * rho.matrix()).trace().real();
  }

 private:
  std::vector<Effect> effects_;
};

/// Effects M_m = sum_j (E^m_j)* E^m_j from a channel grouped by outcome.
/// Ungrouped channels produce one effect per Kraus operator.
inline Povm povm_from_kraus(const KrausChannel& c) {
  std::vector<std::vector<int>> groups = c.outcome_groups();
  if (groups.empty())
    for (std::size_t i = 0; i < c.kraus().size(); ++i)
      groups.push_back({static_cast<int>(i)});
  std::vector<Povm::Effect> effects;
  for (std::size_t m = 0; m < groups.size(); ++m) {
    CMatrix acc = CMatrix::Zero(c.input_dim(), c.input_dim());
    for (int j : groups[m]) {
      const CMatrix& e = c.kraus()[static_cast<std::size_t>(j)];
      acc += e.adjoint() * e;
    }
    effects.push_back({"m" + std::to_string(m), (acc + acc.adjoint()) / 2.0});
  }
  return Povm(std::move(effects));
}

/// A general linear map on operators, kept separate from KrausChannel so
/// that non-CP maps (e.g. the transpose) exist only for negative testing.
struct OperatorMap {
  long input_dim;
  long output_dim;
  std::function<CMatrix(const CMatrix&)> apply;
};

inline OperatorMap transpose_map(long d) {
  return {d, d, [](const CMatrix& m) { return m.transpose().eval(); }};
}

inline OperatorMap map_of(const KrausChannel& c) {
  return {c.input_dim(), c.output_dim(),
          [c](const CMatrix& m) { return c.apply_raw(m); }};
}

/// Choi matrix (I (x) Lambda)(|Omega><Omega|) with the unnormalized maximally
/// entangled |Omega> = sum_i |ii>; the ancilla owns the coarse index. The CP
/// test at ancilla dimension equal to the input dimension is conclusive in
/// finite dimension.
inline CMatrix choi(const OperatorMap& map) {
  const long d = map.input_dim;
  const long dout = map.output_dim;
  CMatrix c = CMatrix::Zero(d * dout, d * dout);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j) {
      CMatrix eij = CMatrix::Zero(d, d);
      eij(i, j) = 1;
      c.block(i * dout, j * dout, dout, dout) = map.apply(eij);
    }
  return c;
}

inline CMatrix choi(const KrausChannel& c) { return choi(map_of(c)); }

inline bool is_completely_positive(const OperatorMap& map, double tolerance = 1e-9) {
  const CMatrix c = choi(map);
  return min_eigenvalue((c + c.adjoint()) / 2.0) >= -tolerance;
}

inline bool is_completely_positive(const KrausChannel& c, double tolerance = 1e-9) {
  return is_completely_positive(map_of(c), tolerance);
}

inline bool is_trace_preserving(const OperatorMap& map, double tolerance = 1e-9) {
  for (long i = 0; i < map.input_dim; ++i)
    for (long j = 0; j < map.input_dim; ++j) {
      CMatrix eij = CMatrix::Zero(map.input_dim, map.input_dim);
      eij(i, j) = 1;
      const Complex expected = i == j ? 1.0 : 0.0;
      if (std::abs(map.apply(eij).trace() - expected) > tolerance) return false;
    }
  return true;
}

/// Isometry K: H_rest -> H_full gluing the chosen unit vector into one
/// tensor factor. K*K = I on the domain; the family over a basis of the
/// factor resolves the identity.
class EmbedIsometry {
 public:
  EmbedIsometry(TensorShape shape, int factor, CVector psi)
      : shape_(std::move(shape)), factor_(factor), psi_(std::move(psi)) {
    if (factor_ < 0 || factor_ >= shape_.factors())
      throw std::invalid_argument("EmbedIsometry: factor out of range");
    if (psi_.size() != shape_.dim(factor_))
      throw std::invalid_argument("EmbedIsometry: vector dim mismatch");
    const double n = psi_.norm();
    if (std::abs(n - 1.0) > tol::hermiticity) psi_ /= n;
  }

  long domain_dim() const { return shape_.total() / shape_.dim(factor_); }
  long range_dim() const { return shape_.total(); }

  CMatrix matrix() const {
    const long total = shape_.total();
    const long rest = domain_dim();
    const auto strides = shape_.strides();
    CMatrix k = CMatrix::Zero(total, rest);
    for (long full = 0; full < total; ++full) {
      long rest_idx = 0, rest_acc = 1;
      long factor_digit = 0;
      for (int f = shape_.factors() - 1; f >= 0; --f) {
        const long digit = (full / strides[static_cast<std::size_t>(f)]) % shape_.dim(f);
        if (f == factor_) {
          factor_digit = digit;
        } else {
          rest_idx += digit * rest_acc;
          rest_acc *= shape_.dim(f);
        }
      }
      k(full, rest_idx) = psi_(factor_digit);
    }
    return k;
  }

  CVector embed(const CVector& phi) const { return matrix() * phi; }
  CMatrix embed(const CMatrix& op) const {
    const CMatrix k = matrix();
    return k * op * k.adjoint();
  }

 private:
  TensorShape shape_;
  int factor_;
  CVector psi_;
};

/// Matrix block a_ij = K_i* a K_j with K_i the basis-vector embeddings of
/// the chosen factor. Reassembly sum_ij K_i a_ij K_j* recovers a exactly.
inline CMatrix block(const CMatrix& a, const TensorShape& shape, int factor,
                     long i, long j) {
  shape.require_total(a.rows());
  const CMatrix ki = EmbedIsometry(shape, factor, gates::basis_vector(shape.dim(factor), i)).matrix();
  const CMatrix kj = EmbedIsometry(shape, factor, gates::basis_vector(shape.dim(factor), j)).matrix();
  return ki.adjoint() * a * kj;
}

// ---- channel JSON: {"input_dim", "output_dim", "kraus": [...], "outcome_groups": optional} ----

inline nlohmann::json channel_to_json(const KrausChannel& c) {
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& e : c.kraus()) ops.push_back(matrix_to_json(e));
  nlohmann::json j = {{"input_dim", c.input_dim()},
                      {"output_dim", c.output_dim()},
                      {"kraus", ops}};
  if (!c.outcome_groups().empty()) j["outcome_groups"] = c.outcome_groups();
  return j;
}

inline KrausChannel channel_from_json(const nlohmann::json& j) {
  std::vector<CMatrix> kraus;
  for (const auto& e : j.at("kraus")) kraus.push_back(matrix_from_json(e));
  std::vector<std::vector<int>> groups;
  if (j.contains("outcome_groups"))
    groups = j.at("outcome_groups").get<std::vector<std::vector<int>>>();
  return KrausChannel(j.at("input_dim").get<long>(), j.at("output_dim").get<long>(),
                      std::move(kraus), std::move(groups));
}

}  // namespace fibersim

#endif  // FIBERSIM_CHANNELS_HPP
