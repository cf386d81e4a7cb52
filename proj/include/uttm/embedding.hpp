#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "uttm/toeplitz.hpp"
#include "uttm/types.hpp"
#include "uttm/util.hpp"

namespace uttm {

struct EmbeddingPair {
  std::size_t m = 1;  // inner dimension
  std::size_t n = 1;  // multiplicity

  std::size_t total() const { return m * n; }
};

/// Tensor inclusion x -> x (x) I_n on dense matrices:
/// e_ij -> sum_k e_{n(i-1)+k, n(j-1)+k}. Unital *-homomorphism, preserves
/// Toeplitz structure and triangularity.
inline CMatrix gamma_embed(const CMatrix& x, EmbeddingPair pair) {
  const auto m = static_cast<Eigen::Index>(pair.m);
  const auto n = static_cast<Eigen::Index>(pair.n);
  if (x.rows() != m || x.cols() != m)
    throw DimensionMismatch("gamma_embed: input is not m x m");
  CMatrix out = CMatrix::Zero(m * n, m * n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index k = 0; k < n; ++k) out(n * i + k, n * j + k) = x(i, j);
  return out;
}

/// Strip version of gamma_embed: coefficient t_d lands at offset n*d.
inline ToeplitzCoefficients dilate_strip(const ToeplitzCoefficients& c,
                                         std::size_t multiplicity) {
  const std::size_t N = c.n * multiplicity;
  ToeplitzCoefficients out{N, std::vector<Complex>(N > 0 ? N - 1 : 0)};
  for (std::size_t d = 1; d < c.n; ++d)
    out.strip[d * multiplicity - 1] = c.strip[d - 1];
  return out;
}

/// Inner automorphism A -> U* A U by the Fourier matrix (U A U* when
/// inverse is set).
inline CMatrix fourier_conjugate(const CMatrix& x, bool inverse = false) {
  if (x.rows() != x.cols())
    throw DimensionMismatch("fourier_conjugate: matrix must be square");
  const CMatrix U = fourier_matrix(static_cast<std::size_t>(x.rows()));
  return inverse ? CMatrix(U * x * U.adjoint()) : CMatrix(U.adjoint() * x * U);
}

/// Composite embedding: Fourier-conjugate, include, conjugate back.
/// On diagonals it acts as the flipped tensor embedding: the diagonal
/// entry at l goes to positions m(k-1)+l for k = 1..n.
inline CMatrix beta_embed(const CMatrix& x, EmbeddingPair pair) {
  if (x.rows() != static_cast<Eigen::Index>(pair.m) || x.rows() != x.cols())
    throw DimensionMismatch("beta_embed: input is not m x m");
  return fourier_conjugate(gamma_embed(fourier_conjugate(x), pair),
                           /*inverse=*/true);
}

/// The flip embedding of a diagonal, the closed form of beta_embed on D_m.
inline CMatrix flip_embed_diagonal(std::span<const double> diag,
                                   EmbeddingPair pair) {
  if (diag.size() != pair.m)
    throw DimensionMismatch("flip_embed_diagonal: diagonal is not length m");
  const auto total = static_cast<Eigen::Index>(pair.total());
  CMatrix out = CMatrix::Zero(total, total);
  for (std::size_t k = 0; k < pair.n; ++k)
    for (std::size_t l = 0; l < pair.m; ++l) {
      const auto p = static_cast<Eigen::Index>(pair.m * k + l);
      out(p, p) = diag[l];
    }
  return out;
}

/// Projection onto the strictly upper triangular part.
inline CMatrix triangular_projection(const CMatrix& x) {
  if (x.rows() != x.cols())
    throw DimensionMismatch("triangular_projection: matrix must be square");
  CMatrix out = x;
  out.triangularView<Eigen::Lower>().setZero();
  return out;
}

namespace detail {

inline CMatrix random_complex_matrix(Eigen::Index rows, Eigen::Index cols,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix x(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) x(i, j) = Complex{gauss(rng), gauss(rng)};
  return x;
}

}  // namespace detail

/// Verifies, on random samples, that the three squares commute:
///   (a) triangular projection commutes with gamma,
///   (b) fourier_conjugate . beta_embed == gamma_embed . fourier_conjugate,
///   (c) beta_embed maps diagonals to diagonals via the flip embedding.
/// Returns the largest operator-norm residual seen.
inline double diagram_check(EmbeddingPair pair, std::size_t samples,
                            std::uint64_t seed) {
  if (pair.total() > 256)
    throw TooLarge("diagram_check: m*n > 256 is not dense-feasible");
  const auto m = static_cast<Eigen::Index>(pair.m);
  std::vector<double> residuals(samples, 0.0);
  parallel_for(samples, [&](std::size_t s) {
    std::mt19937_64 rng(derive_seed(seed, 2 * s + 1));
    std::normal_distribution<double> gauss(0.0, 1.0);

    const CMatrix x = detail::random_complex_matrix(m, m, derive_seed(seed, 2 * s));
    double worst = operator_norm(triangular_projection(gamma_embed(x, pair)) -
                                 gamma_embed(triangular_projection(x), pair));
    worst = std::max(worst,
                     operator_norm(fourier_conjugate(beta_embed(x, pair)) -
                                   gamma_embed(fourier_conjugate(x), pair)));

    std::vector<double> diag(pair.m);
    for (double& v : diag) v = gauss(rng);
    CMatrix d = CMatrix::Zero(m, m);
    for (Eigen::Index l = 0; l < m; ++l) d(l, l) = diag[static_cast<std::size_t>(l)];
    worst = std::max(worst, operator_norm(beta_embed(d, pair) -
                                          flip_embed_diagonal(diag, pair)));
    residuals[s] = worst;
  });
  double out = 0.0;
  for (double r : residuals) out = std::max(out, r);
  return out;
}

}  // namespace uttm
