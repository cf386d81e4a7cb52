#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "uttm/embedding.hpp"
#include "uttm/spectra.hpp"
#include "uttm/toeplitz.hpp"

using namespace uttm;

namespace {

CMatrix random_matrix(std::size_t n, std::uint64_t seed) {
  return detail::random_complex_matrix(static_cast<Eigen::Index>(n),
                                       static_cast<Eigen::Index>(n), seed);
}

}  // namespace

TEST_CASE("gamma_embed is unital and maps matrix units correctly") {
  const EmbeddingPair pair{2, 2};
  CHECK(gamma_embed(CMatrix::Identity(2, 2), pair)
            .isApprox(CMatrix::Identity(4, 4)));

  CMatrix e12 = CMatrix::Zero(2, 2);
  e12(0, 1) = Complex{1, 0};
  const CMatrix g = gamma_embed(e12, pair);
  CMatrix expected = CMatrix::Zero(4, 4);
  expected(0, 2) = Complex{1, 0};
  expected(1, 3) = Complex{1, 0};
  CHECK((g - expected).isZero(0.0));

  CHECK_THROWS_AS(gamma_embed(CMatrix::Zero(3, 3), pair), DimensionMismatch);
}

TEST_CASE("gamma_embed dilates coefficient strips") {
  ToeplitzCoefficients c{2, {Complex{2.0, 1.0}}};
  const auto dilated = dilate_strip(c, 3);
  REQUIRE(dilated.n == 6);
  for (std::size_t d = 1; d < 6; ++d) {
    if (d == 3)
      CHECK(dilated.t(d) == Complex{2.0, 1.0});
    else
      CHECK(dilated.t(d) == Complex{0.0, 0.0});
  }
  // dense route agrees exactly
  CHECK((gamma_embed(build_T(c), EmbeddingPair{2, 3}) - build_T(dilated))
            .isZero(0.0));
}

TEST_CASE("gamma_embed is a normed *-homomorphism", "[property]") {
  const EmbeddingPair pair{5, 3};
  for (std::uint64_t s = 0; s < 8; ++s) {
    const CMatrix x = random_matrix(5, 101 + s);
    const CMatrix y = random_matrix(5, 202 + s);
    REQUIRE(operator_norm(gamma_embed(x * y, pair) -
                          gamma_embed(x, pair) * gamma_embed(y, pair)) <= 1e-10);
    REQUIRE(operator_norm(gamma_embed(x.adjoint(), pair) -
                          gamma_embed(x, pair).adjoint()) == 0.0);
    REQUIRE_THAT(operator_norm(gamma_embed(x, pair)),
                 Catch::Matchers::WithinAbs(operator_norm(x), 1e-9));
  }
}

TEST_CASE("fourier_conjugate matches the dense Toeplitz construction") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = Complex{1, 0};
  d(1, 1) = Complex{-1, 0};
  const CMatrix b = fourier_conjugate(d);
  const CMatrix expected = build_B(validate_spectrum({1.0, -1.0}));
  CHECK(operator_norm(b - expected) <= 1e-14);

  CHECK(fourier_conjugate(CMatrix::Identity(4, 4)).isApprox(CMatrix::Identity(4, 4)));

  const CMatrix x = random_matrix(6, 7);
  CHECK(operator_norm(fourier_conjugate(fourier_conjugate(x), true) - x) <= 1e-12);
  CHECK_THAT(operator_norm(fourier_conjugate(x)),
             Catch::Matchers::WithinAbs(operator_norm(x), 1e-10));
}

TEST_CASE("beta_embed flips diagonals") {
  const EmbeddingPair pair{2, 2};
  CMatrix e11 = CMatrix::Zero(2, 2);
  e11(0, 0) = Complex{1, 0};
  const CMatrix b = beta_embed(e11, pair);
  CMatrix expected = CMatrix::Zero(4, 4);
  expected(0, 0) = Complex{1, 0};
  expected(2, 2) = Complex{1, 0};
  CHECK(operator_norm(b - expected) <= 1e-10);

  CHECK(operator_norm(beta_embed(CMatrix::Identity(3, 3), EmbeddingPair{3, 2}) -
                      CMatrix::Identity(6, 6)) <= 1e-10);

  // diag(a, b, c) -> diag(a, b, c, a, b, c)
  const std::vector<double> diag{0.3, -1.2, 0.9};
  CMatrix d = CMatrix::Zero(3, 3);
  for (int l = 0; l < 3; ++l) d(l, l) = diag[static_cast<std::size_t>(l)];
  CHECK(operator_norm(beta_embed(d, EmbeddingPair{3, 2}) -
                      flip_embed_diagonal(diag, EmbeddingPair{3, 2})) <= 1e-10);
}

TEST_CASE("triangular_projection keeps the strict upper part") {
  CMatrix x(2, 2);
  x << Complex{1, 0}, Complex{2, 0}, Complex{3, 0}, Complex{4, 0};
  const CMatrix p = triangular_projection(x);
  CHECK(p(0, 0) == Complex{0, 0});
  CHECK(p(0, 1) == Complex{2, 0});
  CHECK(p(1, 0) == Complex{0, 0});
  CHECK(p(1, 1) == Complex{0, 0});
  CHECK((triangular_projection(p) - p).isZero(0.0));  // idempotent
}

TEST_CASE("triangular projection of B recovers T") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(8);
  for (double& x : v) x = u(rng);
  const double mean = sum_of(v) / 8.0;
  for (double& x : v) x -= mean;
  const auto lambda = validate_spectrum(v);
  const CMatrix lhs = triangular_projection(build_B(lambda));
  const CMatrix rhs = build_T(toeplitz_coefficients(lambda));
  CHECK(operator_norm(lhs - rhs) <= 1e-12);
}

TEST_CASE("diagram_check residuals") {
  CHECK(diagram_check(EmbeddingPair{2, 2}, 10, 0) <= 1e-10);
  CHECK(diagram_check(EmbeddingPair{1, 4}, 5, 1) <= 1e-12);  // m = 1 is trivial
  CHECK(diagram_check(EmbeddingPair{4, 3}, 25, 2024) <= 1e-9);
  CHECK_THROWS_AS(diagram_check(EmbeddingPair{32, 9}, 1, 0), TooLarge);
}

TEST_CASE("diagram_check is deterministic in the seed") {
  const double a = diagram_check(EmbeddingPair{3, 2}, 8, 99);
  const double b = diagram_check(EmbeddingPair{3, 2}, 8, 99);
  CHECK(a == b);
}
