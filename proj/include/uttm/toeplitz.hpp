#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "uttm/spectra.hpp"
#include "uttm/types.hpp"
#include "uttm/util.hpp"

namespace uttm {

/// Coefficient strip (t_1, ..., t_{n-1}) of a strictly upper triangular
/// Toeplitz matrix; t_0 is implicitly zero. Strips coming from real
/// centered spectra satisfy t_{n-d} = conj(t_d).
struct ToeplitzCoefficients {
  std::size_t n = 0;
  std::vector<Complex> strip;  // strip[d-1] = t_d

  Complex t(std::size_t d) const { return d == 0 ? Complex{0, 0} : strip[d - 1]; }
};

inline double conjugate_symmetry_residual(const ToeplitzCoefficients& c) {
  double worst = 0.0;
  for (std::size_t d = 1; d < c.n; ++d) {
    worst = std::max(worst, std::abs(c.t(c.n - d) - std::conj(c.t(d))));
  }
  return worst;
}

inline void require_conjugate_symmetry(const ToeplitzCoefficients& c,
                                       double tol = 1e-9) {
  const double r = conjugate_symmetry_residual(c);
  if (r > tol)
    throw SymmetryViolation("coefficient strip violates conjugate symmetry: "
                            "residual " + std::to_string(r));
}

/// t_d = (1/n) sum_p lambda_p omega^{d(p-1)}, omega = exp(2 pi i / n).
/// Direct O(n^2) evaluation.
inline ToeplitzCoefficients toeplitz_coefficients_direct(
    const SpectrumSequence& lambda) {
  const std::size_t n = lambda.size();
  ToeplitzCoefficients c{n, std::vector<Complex>(n > 0 ? n - 1 : 0)};
  const double base = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t d = 1; d < n; ++d) {
    Complex acc{0.0, 0.0};
    for (std::size_t p = 0; p < n; ++p) {
      // polar form keeps the root of unity accurate at large d*p
      const double ang = base * static_cast<double>((d * p) % n);
      acc += lambda.values[p] * Complex{std::cos(ang), std::sin(ang)};
    }
    c.strip[d - 1] = acc / static_cast<double>(n);
  }
  return c;
}

/// Same map through a fast transform, O(n log n).
inline ToeplitzCoefficients toeplitz_coefficients_fft(
    const SpectrumSequence& lambda) {
  const std::size_t n = lambda.size();
  ToeplitzCoefficients c{n, std::vector<Complex>(n > 0 ? n - 1 : 0)};
  if (n <= 1) return c;
  std::vector<Complex> in(n), out(n);
  for (std::size_t p = 0; p < n; ++p) in[p] = Complex{lambda.values[p], 0.0};
  Eigen::FFT<double> fft;
  fft.fwd(out, in);
  // fwd computes sum_p x_p exp(-2 pi i d p / n); our kernel has the
  // opposite sign, so conjugate (the input is real).
  for (std::size_t d = 1; d < n; ++d)
    c.strip[d - 1] = std::conj(out[d]) / static_cast<double>(n);
  return c;
}

inline ToeplitzCoefficients toeplitz_coefficients(const SpectrumSequence& lambda) {
  return lambda.size() >= 64 ? toeplitz_coefficients_fft(lambda)
                             : toeplitz_coefficients_direct(lambda);
}

/// Dense strictly upper triangular Toeplitz matrix from a strip.
inline CMatrix build_T(const ToeplitzCoefficients& c) {
  const auto n = static_cast<Eigen::Index>(c.n);
  CMatrix T = CMatrix::Zero(n, n);
  for (Eigen::Index d = 1; d < n; ++d) {
    const Complex td = c.strip[static_cast<std::size_t>(d) - 1];
    for (Eigen::Index i = 0; i + d < n; ++i) T(i, i + d) = td;
  }
  return T;
}

/// Hermitian zero-diagonal Toeplitz matrix T + T*, whose eigenvalues are
/// exactly the input spectrum.
inline CMatrix build_B(const SpectrumSequence& lambda) {
  const CMatrix T = build_T(toeplitz_coefficients(lambda));
  return T + T.adjoint();
}

/// Inverse of the coefficient map: lambda_p = sum_d t_d omega^{-d(p-1)}.
inline SpectrumSequence recover_spectrum(const ToeplitzCoefficients& c) {
  require_conjugate_symmetry(c);
  const std::size_t n = c.n;
  std::vector<double> values(n, 0.0);
  const double base = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t p = 0; p < n; ++p) {
    Complex acc{0.0, 0.0};
    for (std::size_t d = 1; d < n; ++d) {
      const double ang = -base * static_cast<double>((d * p) % n);
      acc += c.strip[d - 1] * Complex{std::cos(ang), std::sin(ang)};
    }
    values[p] = acc.real();  // conjugate symmetry makes the sum real
  }
  SpectrumSequence out;
  out.values = std::move(values);
  return out;
}

/// Unitary Fourier matrix, entries (1/sqrt n) omega^{(j-1)(k-1)}.
inline CMatrix fourier_matrix(std::size_t n) {
  const auto N = static_cast<Eigen::Index>(n);
  CMatrix U(N, N);
  const double base = 2.0 * std::numbers::pi / static_cast<double>(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index k = 0; k < N; ++k) {
      const double ang =
          base * static_cast<double>((static_cast<std::size_t>(j) *
                                      static_cast<std::size_t>(k)) % n);
      U(j, k) = scale * Complex{std::cos(ang), std::sin(ang)};
    }
  }
  return U;
}

/// Self-adjoint kernel matrix with i/n above the diagonal and -i/n below.
inline CMatrix hn_matrix(std::size_t n) {
  if (n < 2) throw DomainError("hn_matrix: need n >= 2");
  const auto N = static_cast<Eigen::Index>(n);
  const Complex above{0.0, 1.0 / static_cast<double>(n)};
  CMatrix H = CMatrix::Zero(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = i + 1; j < N; ++j) {
      H(i, j) = above;
      H(j, i) = -above;
    }
  }
  return H;
}

/// Closed-form eigensystem of hn_matrix(n). Eigenvalues:
///   n odd:   mu_k = (1/n) tan(pi k / n)
///   n even:  mu_k = -(1/n) cot(pi (2k+1) / (2n))
/// Eigenvectors are generated from v0 by the diagonal rotation
/// W = diag(1, omega, omega^2, ...): v_k = W^k v0.
struct HnSpectrum {
  std::size_t n = 0;
  std::vector<double> mu;  // indexed k = 0..n-1
  bool odd = false;
  CVector v0;

  CVector eigenvector(std::size_t k) const {
    CVector v(v0.size());
    const double base = 2.0 * std::numbers::pi / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = base * static_cast<double>((k * j) % n);
      v(static_cast<Eigen::Index>(j)) =
          Complex{std::cos(ang), std::sin(ang)} * v0(static_cast<Eigen::Index>(j));
    }
    return v;
  }

  /// The dot-product indexing (mu_1, ..., mu_{n-1}, mu_n) with mu_n = mu_0,
  /// used by the rotation identity for the skew part norm.
  std::vector<double> rotation_mu() const {
    std::vector<double> out(n);
    for (std::size_t k = 1; k < n; ++k) out[k - 1] = mu[k];
    out[n - 1] = mu[0];
    return out;
  }
};

inline HnSpectrum hn_eigensystem(std::size_t n) {
  if (n < 2) throw DomainError("hn_eigensystem: need n >= 2");
  HnSpectrum s;
  s.n = n;
  s.odd = (n % 2 == 1);
  s.mu.resize(n);
  const double nn = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (s.odd) {
      s.mu[k] = std::tan(std::numbers::pi * static_cast<double>(k) / nn) / nn;
    } else {
      const double ang =
          std::numbers::pi * static_cast<double>(2 * k + 1) / (2.0 * nn);
      s.mu[k] = -1.0 / (std::tan(ang) * nn);
    }
  }
  s.v0.resize(static_cast<Eigen::Index>(n));
  const double scale = 1.0 / std::sqrt(nn);
  for (std::size_t j = 0; j < n; ++j) {
    if (s.odd) {
      s.v0(static_cast<Eigen::Index>(j)) = (j % 2 == 0 ? scale : -scale);
    } else {
      const double ang = std::numbers::pi * static_cast<double>(j) / nn;
      s.v0(static_cast<Eigen::Index>(j)) =
          scale * Complex{std::cos(ang), std::sin(ang)};
    }
  }
  return s;
}

double operator_norm(const CMatrix& M);

/// Residual of rebuilding hn_matrix(n) from its rank-one eigenprojections.
inline double hn_reconstruct(std::size_t n) {
  const HnSpectrum s = hn_eigensystem(n);
  const auto N = static_cast<Eigen::Index>(n);
  CMatrix acc = CMatrix::Zero(N, N);
  for (std::size_t k = 1; k <= n; ++k) {
    const CVector v = s.eigenvector(k % n);
    acc += s.mu[k % n] * (v * v.adjoint());
  }
  return operator_norm(hn_matrix(n) - acc);
}

namespace detail {

/// Power iteration on M*M for the dominant squared singular value.
/// Rayleigh-quotient convergence to 1e-12 relative, capped at 50000 steps.
inline double operator_norm_power(const CMatrix& M) {
  const Eigen::Index n = M.cols();
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex{gauss(rng), gauss(rng)};
  v.normalize();

  double prev = 0.0;
  for (int iter = 0; iter < 50000; ++iter) {
    CVector w = M * v;
    const double lam = w.squaredNorm();  // Rayleigh quotient of M*M at v
    if (lam == 0.0) return 0.0;
    v = M.adjoint() * w;
    const double nv = v.norm();
    if (nv == 0.0) return 0.0;
    v /= nv;
    if (iter > 0 && std::abs(lam - prev) <= 1e-12 * std::max(lam, prev))
      return std::sqrt(lam);
    prev = lam;
  }
  throw ConvergenceFailure("operator_norm: power iteration cap exceeded");
}

}  // namespace detail

/// Largest singular value. Full Hermitian decomposition of M*M up to
/// n = 1024, power iteration beyond.
inline double operator_norm(const CMatrix& M) {
  if (M.size() == 0) return 0.0;
  if (!M.allFinite()) throw Error("operator_norm: non-finite entries");
  if (M.rows() <= 1024 && M.cols() <= 1024) {
    const CMatrix G = M.adjoint() * M;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(G, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    return std::sqrt(std::max(0.0, top));
  }
  return detail::operator_norm_power(M);
}

/// || T_seq || for a raw centered sequence; convenience wrapper used by
/// exhaustive searches and tests.
inline double toeplitz_norm(std::span<const double> seq) {
  SpectrumSequence s;
  s.values.assign(seq.begin(), seq.end());
  return operator_norm(build_T(toeplitz_coefficients(s)));
}

/// || T - T* || via the rotation identity
///   max_l | (lambda rotated by l) . (mu_1, ..., mu_n) |,  mu_n = mu_0,
/// evaluated without forming the matrix.
inline double skew_norm_exact(const SpectrumSequence& lambda) {
  const std::size_t n = lambda.size();
  if (n < 2) return 0.0;
  const std::vector<double> mu = hn_eigensystem(n).rotation_mu();
  double worst = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    double dot = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      // (lambda o rho^l)(k) = lambda_{k - l mod n}
      dot += lambda.values[(k + n - l) % n] * mu[k];
    }
    worst = std::max(worst, std::abs(dot));
  }
  return worst;
}

/// Truncation of f1(x) = (1/pi) sum_k 2x / (k^2 - x^2), valid on [0, 1).
/// Summed smallest-terms-first.
inline double f1_series(double x, long terms) {
  if (!(x >= 0.0 && x < 1.0)) throw DomainError("f1_series: need 0 <= x < 1");
  if (terms < 1) throw DomainError("f1_series: need terms >= 1");
  double acc = 0.0;
  const double x2 = x * x;
  for (long k = terms; k >= 1; --k) {
    const double kk = static_cast<double>(k);
    acc += 2.0 * x / (kk * kk - x2);
  }
  return acc / std::numbers::pi;
}

struct CotSeries {
  double f1 = 0.0;
  double cot_residual = 0.0;  // | cot(pi x) - (1/(pi x) - f1) |
};

/// Cotangent partial-fraction check: cot(pi x) = 1/(pi x) - f1(x).
inline CotSeries cot_series(double x, long terms) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("cot_series: need 0 < x < 1");
  CotSeries out;
  out.f1 = f1_series(x, terms);
  const double cot = 1.0 / std::tan(std::numbers::pi * x);
  out.cot_residual = std::abs(cot - (1.0 / (std::numbers::pi * x) - out.f1));
  return out;
}

}  // namespace uttm
