#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uttm/types.hpp"

namespace uttm {

/// A real sequence of length n >= 1 summing to zero. Produced by
/// validate_spectrum, which centers near-zero-sum inputs exactly.
struct SpectrumSequence {
  std::vector<double> values;
  double adjustment = 0.0;  // mean subtracted during validation

  std::size_t size() const { return values.size(); }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

inline double sum_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

/// Largest absolute prefix sum of v.
inline double max_prefix_sum(std::span<const double> v) {
  double s = 0.0, m = 0.0;
  for (double x : v) {
    s += x;
    m = std::max(m, std::abs(s));
  }
  return m;
}

/// Largest absolute prefix sum over all n cyclic rotations of v.
/// Recomputed exactly from the definition, O(n^2).
inline double max_rotation_prefix_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  double m = 0.0;
  for (std::size_t start = 0; start < n; ++start) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      s += v[(start + k) % n];
      m = std::max(m, std::abs(s));
    }
  }
  return m;
}

inline SpectrumSequence validate_spectrum(std::vector<double> values) {
  if (values.empty()) throw EmptyInput("validate_spectrum: empty input");
  double sup = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("validate_spectrum: non-finite entry");
    sup = std::max(sup, std::abs(v));
  }
  const double mean = sum_of(values) / static_cast<double>(values.size());
  if (sup > 0.0 && std::abs(mean) > kCenteringTol * sup) {
    throw SumTooFarFromZero("validate_spectrum: mean " + std::to_string(mean) +
                            " exceeds " + std::to_string(kCenteringTol) +
                            " * sup norm; input is not a centered spectrum");
  }
  // Center exactly; a second pass removes the rounding residue of the first.
  for (int pass = 0; pass < 2 && mean != 0.0; ++pass) {
    const double m = sum_of(values) / static_cast<double>(values.size());
    for (double& v : values) v -= m;
  }
  return SpectrumSequence{std::move(values), mean};
}

inline std::vector<double> apply_permutation(std::span<const double> values,
                                             std::span<const std::size_t> perm) {
  if (values.size() != perm.size())
    throw LengthMismatch("apply_permutation: size mismatch");
  std::vector<double> out(values.size());
  for (std::size_t p = 0; p < perm.size(); ++p) out[p] = values[perm[p]];
  return out;
}

/// A permutation together with its prefix-sum certificate. partial_sum_max
/// and rotation_sum_max are recomputed from the rearranged sequence, not
/// carried over from the construction.
struct RearrangementPlan {
  std::vector<std::size_t> permutation;  // rearranged[p] = values[permutation[p]]
  double partial_sum_max = 0.0;
  double rotation_sum_max = 0.0;
};

/// Two-pool greedy rearrangement. Pools (nonnegative / negative entries,
/// each FIFO by original index) are drained so the running sum always steps
/// toward zero; every prefix sum of the result is bounded by the sup norm.
/// Zeros count as nonnegative; a zero running sum draws from the
/// nonnegative pool. Deterministic.
inline RearrangementPlan greedy_rearrange(const SpectrumSequence& lambda) {
  const std::size_t n = lambda.size();
  std::vector<std::size_t> nonneg, neg;
  nonneg.reserve(n);
  neg.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    (lambda.values[i] >= 0.0 ? nonneg : neg).push_back(i);
  }

  RearrangementPlan plan;
  plan.permutation.reserve(n);
  std::size_t in = 0, ineg = 0;
  double running = 0.0;
  for (std::size_t step = 0; step < n; ++step) {
    bool want_negative = running > 0.0;
    std::size_t pick;
    if (want_negative) {
      pick = ineg < neg.size() ? neg[ineg++] : nonneg[in++];
    } else {
      pick = in < nonneg.size() ? nonneg[in++] : neg[ineg++];
    }
    plan.permutation.push_back(pick);
    running += lambda.values[pick];
  }

  const std::vector<double> rearranged =
      apply_permutation(lambda.values, plan.permutation);
  plan.partial_sum_max = max_prefix_sum(rearranged);
  plan.rotation_sum_max = max_rotation_prefix_sum(rearranged);
  return plan;
}

/// m pairs, each summing to zero.
struct PairedSpectrum {
  std::vector<std::array<double, 2>> pairs;

  std::size_t count() const { return pairs.size(); }

  double sup_norm() const {
    double m = 0.0;
    for (const auto& p : pairs)
      m = std::max({m, std::abs(p[0]), std::abs(p[1])});
    return m;
  }
};

inline PairedSpectrum validate_pairs(std::vector<std::array<double, 2>> pairs) {
  if (pairs.size() < 2) throw EmptyInput("validate_pairs: need m >= 2 pairs");
  double sup = 0.0;
  for (const auto& p : pairs)
    sup = std::max({sup, std::abs(p[0]), std::abs(p[1])});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (std::abs(pairs[i][0] + pairs[i][1]) > kZeroSumTol * std::max(1.0, sup))
      throw PairNotCentered("validate_pairs: pair " + std::to_string(i) +
                            " does not sum to zero");
  }
  return PairedSpectrum{std::move(pairs)};
}

struct PairedArrangement {
  SpectrumSequence kappa;   // interleaved order: chosen firsts, then seconds
  std::vector<bool> flips;  // flips[i]: pair i contributes its second entry first
};

/// Pair-preserving rearrangement: scan pairs in order, flipping a pair
/// whenever its first entry would push the running sum of chosen firsts
/// away from zero. A zero running sum never flips. The output interleaves
/// all chosen firsts followed by their complements, so the rotation-maximal
/// prefix sum stays within 3x the sup norm.
inline PairedArrangement paired_rearrange(const PairedSpectrum& spec) {
  const std::size_t m = spec.count();
  if (m < 2) throw EmptyInput("paired_rearrange: need m >= 2 pairs");

  PairedArrangement out;
  out.flips.reserve(m);
  std::vector<double> firsts(m), seconds(m);
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double a = spec.pairs[i][0];
    const bool flip = (running > 0.0 && a > 0.0) || (running < 0.0 && a < 0.0);
    out.flips.push_back(flip);
    firsts[i] = flip ? spec.pairs[i][1] : spec.pairs[i][0];
    seconds[i] = flip ? spec.pairs[i][0] : spec.pairs[i][1];
    running += firsts[i];
  }
  out.kappa.values = std::move(firsts);
  out.kappa.values.insert(out.kappa.values.end(), seconds.begin(), seconds.end());
  return out;
}

struct BruteforceResult {
  std::vector<std::size_t> permutation;  // realizes best_sequence from the input
  std::vector<double> best_sequence;
  double min_norm = 0.0;
  std::size_t evaluated = 0;  // distinct multiset orderings tried
};

/// Exhaustive minimum of norm_fn over all distinct orderings of the
/// multiset. Orderings are visited in lexicographic order and the first
/// minimizer is kept, so ties resolve to the lexicographically smallest
/// sequence. Guarded to n <= 9.
template <class NormFn>
BruteforceResult bruteforce_optimal_rearrange(const SpectrumSequence& lambda,
                                              NormFn&& norm_fn) {
  const std::size_t n = lambda.size();
  if (n > 9)
    throw TooLarge("bruteforce_optimal_rearrange: n = " + std::to_string(n) +
                   " exceeds the n <= 9 cap");

  std::vector<double> seq = lambda.values;
  std::sort(seq.begin(), seq.end());

  BruteforceResult best;
  best.min_norm = std::numeric_limits<double>::infinity();
  do {
    const double norm = norm_fn(std::span<const double>(seq));
    ++best.evaluated;
    if (norm < best.min_norm) {
      best.min_norm = norm;
      best.best_sequence = seq;
    }
  } while (std::next_permutation(seq.begin(), seq.end()));

  // Recover an index permutation: assign each output slot the smallest
  // unused original index carrying that value.
  std::vector<bool> used(n, false);
  best.permutation.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!used[i] && lambda.values[i] == best.best_sequence[p]) {
        used[i] = true;
        best.permutation[p] = i;
        break;
      }
    }
  }
  return best;
}

struct DirichletBound {
  double prefix_max = 0.0;  // M, the largest absolute prefix sum of b
  double bound = 0.0;       // M * |a_n - a_1|
  double actual = 0.0;      // |sum a_j b_j|
};

/// Summation-by-parts bound: for monotone a and zero-sum b,
/// |sum a_j b_j| <= M |a_n - a_1|.
inline DirichletBound dirichlet_bound(std::span<const double> a,
                                      std::span<const double> b) {
  if (a.size() != b.size())
    throw LengthMismatch("dirichlet_bound: length mismatch");
  if (a.empty()) throw EmptyInput("dirichlet_bound: empty input");
  bool nondec = true, noninc = true;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    nondec = nondec && a[i] <= a[i + 1];
    noninc = noninc && a[i] >= a[i + 1];
  }
  if (!nondec && !noninc)
    throw NotMonotone("dirichlet_bound: a is not monotone");
  double supb = 0.0;
  for (double x : b) supb = std::max(supb, std::abs(x));
  if (std::abs(sum_of(b)) > kZeroSumTol * std::max(1.0, supb))
    throw SumTooFarFromZero("dirichlet_bound: b does not sum to zero");

  DirichletBound out;
  out.prefix_max = max_prefix_sum(b);
  out.bound = out.prefix_max * std::abs(a.back() - a.front());
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  out.actual = std::abs(dot);
  return out;
}

}  // namespace uttm
