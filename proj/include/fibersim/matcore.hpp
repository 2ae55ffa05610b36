#ifndef FIBERSIM_MATCORE_HPP
#define FIBERSIM_MATCORE_HPP

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fibersim {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

namespace tol {
inline constexpr double hermiticity = 1e-10;
inline constexpr double psd = 1e-10;
inline constexpr double trace = 1e-10;
inline constexpr double span = 1e-9;
inline constexpr double completeness = 1e-8;
}  // namespace tol

inline bool is_finite(const CMatrix& m) {
  return m.allFinite();
}

/// Largest absolute entry. The default norm for tolerance checks.
inline double max_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const CMatrix& m) {
  return max_norm(m - m.adjoint());
}

/// Hilbert-Schmidt inner product <A,B> = Tr(A* B).
inline Complex hs_inner(const CMatrix& a, const CMatrix& b) {
  return (a.adjoint() * b).trace();
}

inline double hs_norm(const CMatrix& a) {
  return a.norm();
}

/// Ordered local dimensions (d_1,...,d_N) of a tensor-product space.
class TensorShape {
 public:
  explicit TensorShape(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("TensorShape: empty");
    for (int d : dims_)
      if (d < 1) throw std::invalid_argument("TensorShape: dims must be >= 1");
  }

  int factors() const { return static_cast<int>(dims_.size()); }
  int dim(int i) const { return dims_.at(static_cast<std::size_t>(i)); }
  const std::vector<int>& dims() const { return dims_; }

  long total() const {
    return std::accumulate(dims_.begin(), dims_.end(), 1L,
                           [](long a, int b) { return a * b; });
  }

  void require_total(long ambient) const {
    if (total() != ambient)
      throw std::invalid_argument("TensorShape: product of dims " +
                                  std::to_string(total()) +
                                  " != ambient dim " + std::to_string(ambient));
  }

  /// Row-major strides: index = sum_i idx[i] * stride[i].
  std::vector<long> strides() const {
    std::vector<long> s(dims_.size());
    long acc = 1;
    for (int i = factors() - 1; i >= 0; --i) {
      s[static_cast<std::size_t>(i)] = acc;
      acc *= dims_[static_cast<std::size_t>(i)];
    }
    return s;
  }

 private:
  std::vector<int> dims_;
};

/// A matrix checked Hermitian at construction (entrywise, absolute).
class HermitianOp {
 public:
  explicit HermitianOp(CMatrix m, double tau = tol::hermiticity) : mat_(std::move(m)) {
    if (mat_.rows() != mat_.cols())
      throw std::invalid_argument("HermitianOp: not square");
    if (!is_finite(mat_)) throw std::invalid_argument("HermitianOp: non-finite entries");
    const double defect = hermiticity_defect(mat_);
    if (defect > tau)
      throw std::invalid_argument("HermitianOp: hermiticity defect " +
                                  std::to_string(defect) + " > " + std::to_string(tau));
  }

  const CMatrix& matrix() const { return mat_; }
  long dim() const { return mat_.rows(); }

 private:
  CMatrix mat_;
};

/// Kronecker product; left factor owns the coarse index.
inline CMatrix tensor(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CVector tensor(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (long i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// Trace out every factor not listed in `keep` (ascending factor indices).
inline CMatrix partial_trace(const CMatrix& m, const TensorShape& shape,
                             const std::vector<int>& keep) {
  if (m.rows() != m.cols()) throw std::invalid_argument("partial_trace: not square");
  shape.require_total(m.rows());
  std::vector<int> traced;
  {
    std::vector<bool> kept(static_cast<std::size_t>(shape.factors()), false);
    for (int k : keep) {
      if (k < 0 || k >= shape.factors())
        throw std::invalid_argument("partial_trace: keep index out of range");
      kept[static_cast<std::size_t>(k)] = true;
    }
    for (int i = 0; i < shape.factors(); ++i)
      if (!kept[static_cast<std::size_t>(i)]) traced.push_back(i);
  }

  const auto strides = shape.strides();
  long dk = 1, dt = 1;
  for (int k : keep) dk *= shape.dim(k);
  for (int t : traced) dt *= shape.dim(t);

  // Enumerate kept and traced multi-indices as flat offsets into the full index.
  auto offsets = [&](const std::vector<int>& factors, long count) {
    std::vector<long> off(static_cast<std::size_t>(count), 0);
    std::vector<int> idx(factors.size(), 0);
    for (long n = 0; n < count; ++n) {
      long o = 0;
      for (std::size_t f = 0; f < factors.size(); ++f)
        o += idx[f] * strides[static_cast<std::size_t>(factors[f])];
      off[static_cast<std::size_t>(n)] = o;
      for (int f = static_cast<int>(factors.size()) - 1; f >= 0; --f) {
        if (++idx[static_cast<std::size_t>(f)] < shape.dim(factors[static_cast<std::size_t>(f)])) break;
        idx[static_cast<std::size_t>(f)] = 0;
      }
    }
    return off;
  };
  std::vector<int> keep_sorted = keep;
  std::sort(keep_sorted.begin(), keep_sorted.end());
  const auto keep_off = offsets(keep_sorted, dk);
  const auto traced_off = offsets(traced, dt);

  CMatrix out = CMatrix::Zero(dk, dk);
  for (long r = 0; r < dk; ++r)
    for (long c = 0; c < dk; ++c) {
      Complex acc = 0;
      for (long s = 0; s < dt; ++s)
        acc += m(keep_off[static_cast<std::size_t>(r)] + traced_off[static_cast<std::size_t>(s)],
                 keep_off[static_cast<std::size_t>(c)] + traced_off[static_cast<std::size_t>(s)]);
      out(r, c) = acc;
    }
  return out;
}

/// Place `op`, acting on the listed factors (ascending), into the full space
/// with identity on every other factor.
inline CMatrix op_on_sites(const CMatrix& op, const std::vector<int>& sites,
                           const TensorShape& shape) {
  long sub = 1;
  for (int s : sites) {
    if (s < 0 || s >= shape.factors())
      throw std::invalid_argument("op_on_sites: site out of range");
    sub *= shape.dim(s);
  }
  if (op.rows() != sub || op.cols() != sub)
    throw std::invalid_argument("op_on_sites: operator dim mismatch");

  const long total = shape.total();
  const auto strides = shape.strides();
  // Sub-index strides within the operator's own row-major ordering.
  std::vector<long> sub_strides(sites.size());
  {
    long acc = 1;
    for (int i = static_cast<int>(sites.size()) - 1; i >= 0; --i) {
      sub_strides[static_cast<std::size_t>(i)] = acc;
      acc *= shape.dim(sites[static_cast<std::size_t>(i)]);
    }
  }
  std::vector<bool> on_site(static_cast<std::size_t>(shape.factors()), false);
  for (int s : sites) on_site[static_cast<std::size_t>(s)] = true;

  auto decompose = [&](long full, long& sub_idx, long& rest_idx) {
    sub_idx = 0;
    rest_idx = 0;
    long rest_acc = 1;
    for (int f = shape.factors() - 1; f >= 0; --f) {
      const long digit = (full / strides[static_cast<std::size_t>(f)]) % shape.dim(f);
      if (on_site[static_cast<std::size_t>(f)]) {
        for (std::size_t k = 0; k < sites.size(); ++k)
          if (sites[k] == f) sub_idx += digit * sub_strides[k];
      } else {
        rest_idx += digit * rest_acc;
        rest_acc *= shape.dim(f);
      }
    }
  };

  CMatrix out = CMatrix::Zero(total, total);
  for (long r = 0; r < total; ++r) {
    long rs, rr;
    decompose(r, rs, rr);
    for (long c = 0; c < total; ++c) {
      long cs, cr;
      decompose(c, cs, cr);
      if (rr == cr) out(r, c) = op(rs, cs);
    }
  }
  return out;
}

struct EigResult {
  Eigen::VectorXd eigenvalues;  // ascending
  CMatrix eigenvectors;         // columns, phase-fixed
};

/// Hermitian eigendecomposition with a fixed phase convention: the first
/// nonzero component of each eigenvector is made real positive.
inline EigResult eig_hermitian(const HermitianOp& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eig_hermitian: solver failed");
  EigResult r{solver.eigenvalues(), solver.eigenvectors()};
  for (long c = 0; c < r.eigenvectors.cols(); ++c) {
    for (long i = 0; i < r.eigenvectors.rows(); ++i) {
      const Complex v = r.eigenvectors(i, c);
      if (std::abs(v) > 1e-12) {
        r.eigenvectors.col(c) *= std::conj(v) / std::abs(v);
        break;
      }
    }
  }
  return r;
}

/// exp(-i H t) via eigendecomposition. Unitary to working precision.
inline CMatrix expm_i(const HermitianOp& h, double t) {
  const EigResult e = eig_hermitian(h);
  CVector phases(e.eigenvalues.size());
  for (long i = 0; i < e.eigenvalues.size(); ++i)
    phases(i) = std::exp(Complex(0.0, -e.eigenvalues(i) * t));
  return e.eigenvectors * phases.asDiagonal() * e.eigenvectors.adjoint();
}

/// Trace norm of a Hermitian matrix (sum of |eigenvalues|).
inline double trace_norm_hermitian(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m);
  return solver.eigenvalues().cwiseAbs().sum();
}

inline double min_eigenvalue(const CMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian);
  return solver.eigenvalues().minCoeff();
}

/// Trace distance (1/2)||rho - sigma||_1 for Hermitian arguments.
inline double trace_distance(const CMatrix& rho, const CMatrix& sigma) {
  return 0.5 * trace_norm_hermitian(rho - sigma);
}

// ---- matrix JSON format: {"rows": n, "cols": m, "entries": [[re, im], ...]} ----

inline nlohmann::json matrix_to_json(const CMatrix& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c)
      entries.push_back({m(r, c).real(), m(r, c).imag()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

inline CMatrix matrix_from_json(const nlohmann::json& j) {
  const long rows = j.at("rows").get<long>();
  const long cols = j.at("cols").get<long>();
  const auto& entries = j.at("entries");
  if (rows < 1 || cols < 1 || static_cast<long>(entries.size()) != rows * cols)
    throw std::invalid_argument("matrix_from_json: bad shape");
  CMatrix m(rows, cols);
  long k = 0;
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c, ++k)
      m(r, c) = Complex(entries[static_cast<std::size_t>(k)][0].get<double>(),
                        entries[static_cast<std::size_t>(k)][1].get<double>());
  if (!is_finite(m)) throw std::invalid_argument("matrix_from_json: non-finite entries");
  return m;
}

// ---- common fixed matrices ----

namespace gates {

inline CMatrix identity(long d) { return CMatrix::Identity(d, d); }

inline CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

inline CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline CMatrix hadamard() {
  CMatrix m(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

inline CMatrix t_gate() {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 1;
  m(1, 1) = std::exp(Complex(0.0, M_PI / 4.0));
  return m;
}

inline CMatrix cnot() {
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return m;
}

inline CVector basis_vector(long d, long i) {
  CVector v = CVector::Zero(d);
  v(i) = 1;
  return v;
}

inline CVector plus_state() {
  CVector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return v;
}

inline CVector bell_phi_plus() {
  CVector v = CVector::Zero(4);
  v(0) = 1.0 / std::sqrt(2.0);
  v(3) = 1.0 / std::sqrt(2.0);
  return v;
}

}  // namespace gates

inline CMatrix projector(const CVector& v) { return v * v.adjoint(); }

}  // namespace fibersim

#endif  // FIBERSIM_MATCORE_HPP
