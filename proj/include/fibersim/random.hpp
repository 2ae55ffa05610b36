#ifndef FIBERSIM_RANDOM_HPP
#define FIBERSIM_RANDOM_HPP

#include "fibersim/matcore.hpp"

#include <random>

namespace fibersim {

/// Seeded PRNG with deterministic per-job stream splitting.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng split(std::uint64_t seed, std::uint64_t job_index) {
    // SplitMix64 step keeps distinct jobs decorrelated under a shared seed.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (job_index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t integer(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }

  Complex cnormal() { return Complex(normal(), normal()); }

  /// Matrix with i.i.d. standard complex Gaussian entries.
  CMatrix ginibre(long rows, long cols) {
    CMatrix m(rows, cols);
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) m(r, c) = cnormal();
    return m;
  }

  CMatrix random_hermitian(long d) {
    CMatrix g = ginibre(d, d);
    return (g + g.adjoint()) / 2.0;
  }

  CVector haar_pure_state(long d) {
    CVector v(d);
    for (long i = 0; i < d; ++i) v(i) = cnormal();
    return v / v.norm();
  }

  /// Hilbert-Schmidt-random density matrix: GG*/Tr(GG*).
  CMatrix hs_random_density(long d) {
    CMatrix g = ginibre(d, d);
    CMatrix rho = g * g.adjoint();
    return rho / rho.trace().real();
  }

  /// Haar-random unitary via QR of a Ginibre matrix.
  CMatrix haar_unitary(long d) {
    CMatrix g = ginibre(d, d);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (long i = 0; i < d; ++i) {
      Complex ph = r(i, i);
      q.col(i) *= (std::abs(ph) > 1e-15) ? ph / std::abs(ph) : Complex(1, 0);
    }
    return q;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace fibersim

#endif  // FIBERSIM_RANDOM_HPP
