#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "uttm/spectra.hpp"
#include "uttm/toeplitz.hpp"
#include "uttm/util.hpp"

using namespace uttm;

TEST_CASE("validate_spectrum accepts centered input") {
  auto s = validate_spectrum({1.0, -1.0});
  CHECK(s.adjustment == 0.0);
  CHECK(s.sup_norm() == 1.0);

  auto z = validate_spectrum({0.0, 0.0, 0.0});
  CHECK(z.sup_norm() == 0.0);
}

TEST_CASE("validate_spectrum centers small residues exactly") {
  auto s = validate_spectrum({1.0, 1.0, -1.0, -1.0 + 1e-13});
  CHECK_THAT(s.adjustment, Catch::Matchers::WithinAbs(2.5e-14, 1e-16));
  CHECK(std::abs(sum_of(s.values)) <= 1e-15);
}

TEST_CASE("validate_spectrum rejects bad input") {
  CHECK_THROWS_AS(validate_spectrum({}), EmptyInput);
  CHECK_THROWS_AS(validate_spectrum({1.0, 1.0}), SumTooFarFromZero);
  CHECK_THROWS_AS(validate_spectrum({1.0, -1.0 + 1e-3}), SumTooFarFromZero);
}

TEST_CASE("greedy_rearrange alternates the balanced two-point family") {
  auto plan = greedy_rearrange(validate_spectrum({1.0, 1.0, -1.0, -1.0}));
  auto out = apply_permutation(std::vector<double>{1, 1, -1, -1}, plan.permutation);
  CHECK(out == std::vector<double>{1, -1, 1, -1});
  CHECK(plan.partial_sum_max == 1.0);
}

TEST_CASE("greedy_rearrange hits the sup norm when one entry dominates") {
  auto plan = greedy_rearrange(validate_spectrum({3.0, -1.0, -1.0, -1.0}));
  auto out =
      apply_permutation(std::vector<double>{3, -1, -1, -1}, plan.permutation);
  CHECK(out == std::vector<double>{3, -1, -1, -1});
  CHECK(plan.partial_sum_max == 3.0);
}

TEST_CASE("greedy_rearrange on the zero vector is the identity") {
  auto plan = greedy_rearrange(validate_spectrum({0.0, 0.0}));
  CHECK(plan.permutation == std::vector<std::size_t>{0, 1});
  CHECK(plan.partial_sum_max == 0.0);
}

TEST_CASE("greedy prefix sums stay within the sup norm", "[property]") {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 511;
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    const double mean = sum_of(v) / static_cast<double>(n);
    for (double& x : v) x -= mean;
    const auto lambda = validate_spectrum(v);
    const auto plan = greedy_rearrange(lambda);
    const double sup = lambda.sup_norm();
    const double slack = 1e-12 * std::max(1.0, sup);
    REQUIRE(plan.partial_sum_max <= sup + slack);
    REQUIRE(plan.rotation_sum_max <= 2.0 * sup + slack);

    // permutation really is a bijection
    auto sorted_in = lambda.values;
    auto sorted_out = apply_permutation(lambda.values, plan.permutation);
    std::sort(sorted_in.begin(), sorted_in.end());
    std::sort(sorted_out.begin(), sorted_out.end());
    REQUIRE(sorted_in == sorted_out);
  }
}

TEST_CASE("paired_rearrange follows the opposing-sign rule") {
  auto arr = paired_rearrange(validate_pairs({{1, -1}, {1, -1}}));
  CHECK(arr.flips == std::vector<bool>{false, true});
  CHECK(arr.kappa.values == std::vector<double>{1, -1, -1, 1});
}

TEST_CASE("paired_rearrange leaves zero pairs alone") {
  auto arr = paired_rearrange(validate_pairs({{0, 0}, {0, 0}}));
  CHECK(arr.flips == std::vector<bool>{false, false});
  CHECK(arr.kappa.values == std::vector<double>(4, 0.0));
}

TEST_CASE("paired_rearrange three-pair walkthrough") {
  auto arr = paired_rearrange(validate_pairs({{2, -2}, {1, -1}, {1, -1}}));
  CHECK(arr.flips == std::vector<bool>{false, true, true});
  CHECK(arr.kappa.values == std::vector<double>{2, -1, -1, -2, 1, 1});
  CHECK(max_rotation_prefix_sum(arr.kappa.values) <= 6.0);
}

TEST_CASE("paired_rearrange rejects uncentered pairs") {
  CHECK_THROWS_AS(validate_pairs({{1, -1}, {1, -0.5}}), PairNotCentered);
  CHECK_THROWS_AS(validate_pairs({{1, -1}}), EmptyInput);
}

TEST_CASE("paired rotation sums stay within three sup norms", "[property]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 2 + rng() % 63;
    std::vector<std::array<double, 2>> pairs(m);
    for (auto& p : pairs) {
      const double a = u(rng);
      p = {a, -a};
    }
    const auto spec = validate_pairs(pairs);
    const double sup = spec.sup_norm();
    const auto arr = paired_rearrange(spec);
    REQUIRE(max_prefix_sum(std::span(arr.kappa.values).first(m)) <=
            sup + 1e-12);
    REQUIRE(max_rotation_prefix_sum(arr.kappa.values) <= 3.0 * sup + 1e-12);
  }
}

TEST_CASE("bruteforce_optimal_rearrange small cases") {
  auto two = bruteforce_optimal_rearrange(validate_spectrum({1, -1}), toeplitz_norm);
  CHECK_THAT(two.min_norm, Catch::Matchers::WithinAbs(1.0, 1e-12));

  auto zeros =
      bruteforce_optimal_rearrange(validate_spectrum({0, 0, 0}), toeplitz_norm);
  CHECK(zeros.min_norm == 0.0);
  CHECK(zeros.evaluated == 1);  // one distinct ordering of the zero multiset

  auto four = bruteforce_optimal_rearrange(validate_spectrum({1, 1, -1, -1}),
                                           toeplitz_norm);
  CHECK(four.min_norm <= kGreedyNormBound + 1e-10);
  CHECK(four.evaluated == 6);  // 4!/(2!2!)
}

TEST_CASE("bruteforce_optimal_rearrange rejects large input") {
  std::vector<double> v(10, 0.0);
  CHECK_THROWS_AS(bruteforce_optimal_rearrange(validate_spectrum(v), toeplitz_norm),
                  TooLarge);
}

TEST_CASE("bruteforce permutation realizes the reported sequence") {
  const auto lambda = validate_spectrum({0.5, 0.5, -0.25, -0.75});
  const auto best = bruteforce_optimal_rearrange(lambda, toeplitz_norm);
  CHECK(apply_permutation(lambda.values, best.permutation) == best.best_sequence);
}

TEST_CASE("dirichlet_bound examples") {
  {
    auto r = dirichlet_bound(std::vector<double>{1, 1, 1},
                             std::vector<double>{1, 0, -1});
    CHECK(r.bound == 0.0);
    CHECK(r.actual == 0.0);
  }
  {
    auto r =
        dirichlet_bound(std::vector<double>{0, 1}, std::vector<double>{1, -1});
    CHECK(r.prefix_max == 1.0);
    CHECK(r.bound == 1.0);
    CHECK(r.actual == 1.0);
  }
  {
    auto r = dirichlet_bound(std::vector<double>{1, 2, 4},
                             std::vector<double>{1, -2, 1});
    CHECK(r.prefix_max == 1.0);
    CHECK(r.bound == 3.0);
    CHECK_THAT(r.actual, Catch::Matchers::WithinAbs(1.0, 1e-15));
  }
}

TEST_CASE("dirichlet_bound input checks") {
  CHECK_THROWS_AS(dirichlet_bound(std::vector<double>{1, 0, 1},
                                  std::vector<double>{1, 0, -1}),
                  NotMonotone);
  CHECK_THROWS_AS(
      dirichlet_bound(std::vector<double>{1, 2}, std::vector<double>{1, 0, -1}),
      LengthMismatch);
}

TEST_CASE("dirichlet actual never exceeds the bound", "[property]") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    std::vector<double> a(n), b(n);
    for (double& x : a) x = u(rng);
    std::sort(a.begin(), a.end());
    if (trial % 2) std::reverse(a.begin(), a.end());
    for (double& x : b) x = u(rng);
    const double mean = sum_of(b) / static_cast<double>(n);
    for (double& x : b) x -= mean;
    const auto r = dirichlet_bound(a, b);
    REQUIRE(r.actual <= r.bound + 1e-12);
  }
}
