#ifndef FIBERSIM_CORRELATION_HPP
#define FIBERSIM_CORRELATION_HPP

#include "fibersim/matcore.hpp"
#include "fibersim/random.hpp"
#include "fibersim/states.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace fibersim {

/// A cut of the tensor factors into a nonempty proper subset and its complement.
class Bipartition {
 public:
  Bipartition(TensorShape shape, std::vector<int> part_a)
      : shape_(std::move(shape)), a_(std::move(part_a)) {
    std::sort(a_.begin(), a_.end());
    if (a_.empty() || static_cast<int>(a_.size()) >= shape_.factors())
      throw std::invalid_argument("Bipartition: subset must be nonempty and proper");
    for (int i : a_)
      if (i < 0 || i >= shape_.factors())
        throw std::invalid_argument("Bipartition: index out of range");
  }

  const TensorShape& shape() const { return shape_; }
  const std::vector<int>& part_a() const { return a_; }

  std::vector<int> complement() const {
    std::vector<int> c;
    for (int i = 0; i < shape_.factors(); ++i)
      if (!std::binary_search(a_.begin(), a_.end(), i)) c.push_back(i);
    return c;
  }

  long dim_a() const {
    long d = 1;
    for (int i : a_) d *= shape_.dim(i);
    return d;
  }
  long dim_b() const { return shape_.total() / dim_a(); }

 private:
  TensorShape shape_;
  std::vector<int> a_;
};

inline CMatrix marginal_a(const CMatrix& rho, const Bipartition& b) {
  return partial_trace(rho, b.shape(), b.part_a());
}

inline CMatrix marginal_b(const CMatrix& rho, const Bipartition& b) {
  return partial_trace(rho, b.shape(), b.complement());
}

/// -sum lambda log lambda, natural log, 0 log 0 = 0.
inline double von_neumann_entropy(const CMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho);
  double s = 0.0;
  for (long i = 0; i < solver.eigenvalues().size(); ++i) {
    const double l = solver.eigenvalues()(i);
    if (l > 1e-15) s -= l * std::log(l);
  }
  return s;
}

inline double von_neumann_entropy(const DensityOperator& rho) {
  return von_neumann_entropy(rho.matrix());
}

/// Umegaki relative entropy S(rho||sigma) = Tr(rho log rho - rho log sigma).
/// Returns +infinity when supp(rho) is not contained in supp(sigma).
inline double relative_entropy(const CMatrix& rho, const CMatrix& sigma,
                               double support_tol = 1e-12) {
  Eigen::SelfAdjointEigenSolver<CMatrix> er(rho);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sigma);
  double tr_rho_log_rho = 0.0;
  for (long i = 0; i < er.eigenvalues().size(); ++i) {
    const double l = er.eigenvalues()(i);
    if (l > 1e-15) tr_rho_log_rho += l * std::log(l);
  }
  double tr_rho_log_sigma = 0.0;
  for (long j = 0; j < es.eigenvalues().size(); ++j) {
    const double mu = es.eigenvalues()(j);
    const double weight =
        (es.eigenvectors().col(j).adjoint() * rho * es.eigenvectors().col(j))(0).real();
    if (mu <= support_tol) {
      if (weight > support_tol) return std::numeric_limits<double>::infinity();
      continue;
    }
    tr_rho_log_sigma += weight * std::log(mu);
  }
  return tr_rho_log_rho - tr_rho_log_sigma;
}

inline double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma,
                               double support_tol = 1e-12) {
  return relative_entropy(rho.matrix(), sigma.matrix(), support_tol);
}

/// Partial transpose over the factors in part A.
inline CMatrix partial_transpose(const CMatrix& rho, const Bipartition& b) {
  b.shape().require_total(rho.rows());
  const auto& shape = b.shape();
  const auto strides = shape.strides();
  std::vector<bool> in_a(static_cast<std::size_t>(shape.factors()), false);
  for (int i : b.part_a()) in_a[static_cast<std::size_t>(i)] = true;

  const long total = shape.total();
  CMatrix out(total, total);
  for (long r = 0; r < total; ++r)
    for (long c = 0; c < total; ++c) {
      long rr = 0, cc = 0;
      for (int f = 0; f < shape.factors(); ++f) {
        const long stride = strides[static_cast<std::size_t>(f)];
        const long rd = (r / stride) % shape.dim(f);
        const long cd = (c / stride) % shape.dim(f);
        if (in_a[static_cast<std::size_t>(f)]) {
          rr += cd * stride;
          cc += rd * stride;
        } else {
          rr += rd * stride;
          cc += cd * stride;
        }
      }
      out(rr, cc) = rho(r, c);
    }
  return out;
}

inline double negativity(const DensityOperator& rho, const Bipartition& b) {
  return (trace_norm_hermitian(partial_transpose(rho.matrix(), b)) - 1.0) / 2.0;
}

inline double log_negativity(const DensityOperator& rho, const Bipartition& b) {
  return std::log(trace_norm_hermitian(partial_transpose(rho.matrix(), b)));
}

enum class Separability { Separable, Entangled, Inconclusive };

/// PPT criterion: conclusive for 2x2 and 2x3 cuts, one-sided elsewhere.
inline Separability is_separable_ppt(const DensityOperator& rho, const Bipartition& b,
                                     double eig_tol = 1e-10) {
  const CMatrix pt = partial_transpose(rho.matrix(), b);
  if (min_eigenvalue((pt + pt.adjoint()) / 2.0) < -eig_tol)
    return Separability::Entangled;
  const long da = b.dim_a(), db = b.dim_b();
  const long lo = std::min(da, db), hi = std::max(da, db);
  if (lo == 2 && (hi == 2 || hi == 3)) return Separability::Separable;
  return Separability::Inconclusive;
}

/// I(rho) = S(rho_A) + S(rho_Ac) - S(rho).
inline double mutual_information(const DensityOperator& rho, const Bipartition& b) {
  return von_neumann_entropy(marginal_a(rho.matrix(), b)) +
         von_neumann_entropy(marginal_b(rho.matrix(), b)) -
         von_neumann_entropy(rho.matrix());
}

struct ReeResult {
  double bound;       // upper bound on the relative entropy of entanglement
  CMatrix sigma;      // achieving separable state
  int iterations;
  std::string exactness = "optimized-upper-bound";
};

namespace detail {

// Gradient of -Tr(rho log sigma) with respect to sigma, via the Frechet
// derivative of the matrix logarithm in sigma's eigenbasis.
inline CMatrix rel_entropy_gradient(const CMatrix& rho, const CMatrix& sigma) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sigma);
  const auto& lam = es.eigenvalues();
  const CMatrix v = es.eigenvectors();
  const CMatrix rho_t = v.adjoint() * rho * v;
  const long d = sigma.rows();
  CMatrix k(d, d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j) {
      const double li = std::max(lam(i), 1e-300), lj = std::max(lam(j), 1e-300);
      k(i, j) = std::abs(li - lj) < 1e-14 * std::max(li, lj)
                    ? 1.0 / li
                    : (std::log(li) - std::log(lj)) / (li - lj);
    }
  // K is real symmetric and rho_t Hermitian, so the product is Hermitian.
  return -(v * k.cwiseProduct(rho_t) * v.adjoint());
}

}  // namespace detail

/// Upper bound on the relative entropy of entanglement: Frank-Wolfe descent
/// of S(rho||sigma) over the convex hull of a finite product-state ensemble
/// (marginal-eigenbasis products plus seeded random products). The result is
/// always an upper bound, never claimed tight.
inline ReeResult ree_estimate(const DensityOperator& rho, const Bipartition& b,
                              int ensemble_size = 40, int iterations = 400,
                              std::uint64_t seed = 7) {
  const long da = b.dim_a(), db = b.dim_b();
  const CMatrix rho_m = rho.matrix();

  // Candidate separable extreme points.
  std::vector<CMatrix> candidates;
  {
    Eigen::SelfAdjointEigenSolver<CMatrix> ea(marginal_a(rho_m, b));
    Eigen::SelfAdjointEigenSolver<CMatrix> eb(marginal_b(rho_m, b));
    for (long i = 0; i < da; ++i)
      for (long j = 0; j < db; ++j) {
        const CVector u = ea.eigenvectors().col(i);
        const CVector w = eb.eigenvectors().col(j);
        candidates.push_back(projector(tensor(u, w)));
      }
    Rng rng(seed);
    for (int n = 0; n < ensemble_size; ++n)
      candidates.push_back(
          projector(tensor(rng.haar_pure_state(da), rng.haar_pure_state(db))));
  }

  // Candidates live on the A|Ac-ordered space; permute rho there if the cut
  // interleaves factors. For contiguous leading cuts the permutation is id.
  CMatrix rho_work = rho_m;
  {
    std::vector<int> order = b.part_a();
    const auto comp = b.complement();
    order.insert(order.end(), comp.begin(), comp.end());
    bool identity = true;
    for (std::size_t i = 0; i < order.size(); ++i)
      if (order[i] != static_cast<int>(i)) identity = false;
    if (!identity) {
      const auto& shape = b.shape();
      const auto strides = shape.strides();
      std::vector<long> new_strides(order.size());
      long acc = 1;
      for (int i = static_cast<int>(order.size()) - 1; i >= 0; --i) {
        new_strides[static_cast<std::size_t>(i)] = acc;
        acc *= shape.dim(order[static_cast<std::size_t>(i)]);
      }
      const long total = shape.total();
      std::vector<long> perm(static_cast<std::size_t>(total));
      for (long x = 0; x < total; ++x) {
        long y = 0;
        for (std::size_t i = 0; i < order.size(); ++i) {
          const long digit =
              (x / strides[static_cast<std::size_t>(order[i])]) % shape.dim(order[i]);
          y += digit * new_strides[i];
        }
        perm[static_cast<std::size_t>(x)] = y;
      }
      CMatrix permuted(total, total);
      for (long r = 0; r < total; ++r)
        for (long c = 0; c < total; ++c)
          permuted(perm[static_cast<std::size_t>(r)], perm[static_cast<std::size_t>(c)]) =
              rho_m(r, c);
      rho_work = std::move(permuted);
    }
  }

  CMatrix sigma = CMatrix::Identity(da * db, da * db);
  sigma /= static_cast<double>(da * db);
  double value = relative_entropy(rho_work, sigma);

  auto objective = [&](const CMatrix& s) { return relative_entropy(rho_work, s); };

  int it = 0;
  for (; it < iterations; ++it) {
    const CMatrix grad = detail::rel_entropy_gradient(rho_work, sigma);
    double best = std::numeric_limits<double>::infinity();
    const CMatrix* pick = nullptr;
    for (const auto& c : candidates) {
      const double lin = (grad * c).trace().real();
      if (lin < best) {
        best = lin;
        pick = &c;
      }
    }
    if (!pick) break;
    // Exact-ish line search on gamma in [0, 1) by golden section.
    double lo = 0.0, hi = 1.0 - 1e-9;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    auto eval = [&](double g) {
      return objective(((1.0 - g) * sigma + g * (*pick)).eval());
    };
    double f1 = eval(x1), f2 = eval(x2);
    for (int s = 0; s < 40; ++s) {
      if (f1 < f2) {
        hi = x2; x2 = x1; f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = eval(x1);
      } else {
        lo = x1; x1 = x2; f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = eval(x2);
      }
    }
    const double gamma = (f1 < f2) ? x1 : x2;
    const double next = eval(gamma);
    if (next < value) {
      sigma = ((1.0 - gamma) * sigma + gamma * (*pick)).eval();
      value = next;
    }
    if (value < 1e-12) break;
  }
  return ReeResult{std::max(value, 0.0), sigma, it};
}

struct DiscordResult {
  double value;
  double theta, phi;  // optimal measurement direction on the Bloch sphere
  std::string measured_side = "complement";
};

/// Quantum discord D_A = I - J_A with J_A optimized over rank-1 projective
/// measurements on the complement subsystem (Bloch-sphere grid plus local
/// refinement). The measured subsystem must be a single qubit.
inline DiscordResult discord(const DensityOperator& rho, const Bipartition& b,
                             int grid_n = 24, int refine_steps = 4) {
  if (b.dim_b() != 2)
    throw std::invalid_argument("discord: measured (complement) subsystem must be a qubit");
  const auto comp = b.complement();
  const CMatrix rho_m = rho.matrix();
  const double s_b = von_neumann_entropy(marginal_b(rho_m, b));
  const double s_ab = von_neumann_entropy(rho_m);

  auto conditional_entropy = [&](double theta, double phi) {
    const double nx = std::sin(theta) * std::cos(phi);
    const double ny = std::sin(theta) * std::sin(phi);
    const double nz = std::cos(theta);
    CMatrix n_sigma = nx * gates::pauli_x() + ny * gates::pauli_y() + nz * gates::pauli_z();
    double acc = 0.0;
    for (int sign : {+1, -1}) {
      const CMatrix proj_local =
          (CMatrix::Identity(2, 2) + static_cast<double>(sign) * n_sigma) / 2.0;
      const CMatrix proj = op_on_sites(proj_local, comp, b.shape());
      const CMatrix branch = proj * rho_m * proj;
      const double p = branch.trace().real();
      if (p <= 1e-12) continue;
      const CMatrix cond = marginal_a(branch, b) / p;
      acc += p * von_neumann_entropy(cond);
    }
    return acc;
  };

  double best = std::numeric_limits<double>::infinity();
  double best_theta = 0, best_phi = 0;
  for (int i = 0; i <= grid_n; ++i)
    for (int j = 0; j < 2 * grid_n; ++j) {
      const double theta = M_PI * i / grid_n;
      const double phi = M_PI * j / grid_n;
      const double v = conditional_entropy(theta, phi);
      if (v < best) {
        best = v;
        best_theta = theta;
        best_phi = phi;
      }
    }
  double span_t = M_PI / grid_n, span_p = M_PI / grid_n;
  for (int step = 0; step < refine_steps; ++step) {
    for (int i = -3; i <= 3; ++i)
      for (int j = -3; j <= 3; ++j) {
        const double theta = best_theta + span_t * i / 3.0;
        const double phi = best_phi + span_p * j / 3.0;
        const double v = conditional_entropy(theta, phi);
        if (v < best) {
          best = v;
          best_theta = theta;
          best_phi = phi;
        }
      }
    span_t /= 3.0;
    span_p /= 3.0;
  }

  // D = I - J = S(rho_Ac) - S(rho) + min conditional entropy.
  const double value = s_b - s_ab + best;
  return DiscordResult{std::max(value, -1e-9), best_theta, best_phi};
}

/// Named nonnegative functional on density operators, with exactness class.
struct CorrelationFunctional {
  std::string name;
  std::string exactness;  // "closed-form" | "optimized-upper-bound"
  std::function<double(const DensityOperator&)> eval;
  bool local_unitary_invariant = false;
};

inline CorrelationFunctional negativity_functional(const Bipartition& b) {
  return {"negativity", "closed-form",
          [b](const DensityOperator& rho) { return negativity(rho, b); }, true};
}

inline CorrelationFunctional log_negativity_functional(const Bipartition& b) {
  return {"log_negativity", "closed-form",
          [b](const DensityOperator& rho) { return log_negativity(rho, b); }, true};
}

inline CorrelationFunctional mutual_information_functional(const Bipartition& b) {
  return {"mutual_information", "closed-form",
          [b](const DensityOperator& rho) { return mutual_information(rho, b); }, true};
}

inline CorrelationFunctional discord_functional(const Bipartition& b, int grid_n = 16,
                                                int refine_steps = 3) {
  return {"discord", "optimized-upper-bound",
          [b, grid_n, refine_steps](const DensityOperator& rho) {
            return discord(rho, b, grid_n, refine_steps).value;
          },
          true};
}

}  // namespace fibersim

#endif  // FIBERSIM_CORRELATION_HPP
